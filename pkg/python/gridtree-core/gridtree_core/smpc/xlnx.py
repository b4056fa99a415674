"""Two-party shares of ln(x) and x ln(x).

Alice and Bob hold additive shares x_a, x_b of a count x in Z_m. The ln
circuit returns fixed-point shares u_a + u_b = ln(x) and re-shares x into the
fixed-point ring; two share multiplications then give

    s_a + s_b = x_a u_a + (x_a u_b + x_b u_a) + x_b u_b = x ln(x).
"""

import math
from typing import Tuple

from ..errors import DomainViolation, SpecError
from ..partynet import Network
from .circuits import IdealCircuitSpec, ideal_circuit_eval
from .domains import FixedPointRing, Share

LN2 = math.log(2)


def xlnx_ring(domain, frac_bits: int = 20) -> FixedPointRing:
    """Fixed-point ring wide enough for x ln(x) with x below the domain modulus."""
    g = domain.modulus.bit_length()
    return FixedPointRing(frac_bits + g, frac_bits + 3 * g + 8)


def ln_series(x: int, n_terms: int) -> float:
    """ln(x) for an integer x >= 1, expanded around the power of two 2^j <= x.

    With y = (x - 2^j) / (x + 2^j), ln(x) = j ln 2 + 2 sum_{i<n} y^(2i+1) / (2i+1).
    y stays below 1/3, and at x = 2^j the series term vanishes.
    """
    if x < 1:
        raise DomainViolation(f"ln of {x} is undefined")
    j = x.bit_length() - 1
    base = 1 << j
    y = (x - base) / (x + base)
    y2 = y * y
    term, series = y, 0.0
    for i in range(n_terms):
        series += term / (2 * i + 1)
        term *= y2
    return j * LN2 + 2 * series


def _ln_circuit(net: Network, x_a: Share, x_b: Share, n_terms: int, ring, zero_ok: bool):
    if x_a.domain != x_b.domain:
        raise SpecError("ln shares must live in one domain")
    if n_terms < 1:
        raise SpecError("the ln circuit needs at least one Taylor term")
    alice, bob = x_a.owner, x_b.owner
    lifted = FixedPointRing(0, ring.ring_bits)

    def function(inputs, rng):
        x = (inputs[alice].value + inputs[bob].value) % x_a.domain.modulus
        if x == 0 and zero_ok:
            ln = 0
        else:
            ln = ring.encode(ln_series(x, n_terms))
        u_a, x_lift_a = ring.random(rng), ring.random(rng)
        return {
            alice: (u_a, x_lift_a),
            bob: ((ln - u_a) % ring.modulus, (x - x_lift_a) % ring.modulus),
        }

    spec = IdealCircuitSpec("ln", (alice, bob), (alice, bob), function, size=n_terms)
    out = ideal_circuit_eval(net, spec, {alice: x_a, bob: x_b})
    return (
        Share(out[alice][0], ring, alice),
        Share(out[bob][0], ring, bob),
        Share(out[alice][1], lifted, alice),
        Share(out[bob][1], lifted, bob),
    )


def ln_shares(
    net: Network,
    x_a: Share,
    x_b: Share,
    n_terms: int = 10,
    *,
    frac_bits: int = 20,
    zero_ok: bool = False,
) -> Tuple[Share, Share]:
    ring = xlnx_ring(x_a.domain, frac_bits)
    u_a, u_b, _, _ = _ln_circuit(net, x_a, x_b, n_terms, ring, zero_ok)
    return u_a, u_b


def mult_shares(
    net: Network, a: Share, b: Share, out=None, *, wrap: bool = False
) -> Tuple[Share, Share]:
    """Random shares of a * b for Alice (holding ``a``) and Bob (holding ``b``).

    The product is rescaled to the output scale and must fit a fixed-point
    output ring. With ``wrap`` it is taken modulo the output ring instead, as
    for cross terms of two sharings.
    """
    out = out or (a.domain if isinstance(a.domain, FixedPointRing) else b.domain)
    alice, bob = a.owner, b.owner
    shift = a.domain.frac_bits + b.domain.frac_bits - out.frac_bits

    def function(inputs, rng):
        product = a.domain.signed(inputs[alice].value) * b.domain.signed(inputs[bob].value)
        if shift > 0:
            product = (product + (1 << (shift - 1))) >> shift
        elif shift < 0:
            product <<= -shift
        bounded = not wrap and isinstance(out, FixedPointRing)
        if bounded and abs(product) >= 1 << (out.ring_bits - 1):
            raise DomainViolation("share product overflows the fixed-point ring")
        r = out.random(rng)
        return {alice: r, bob: (product - r) % out.modulus}

    spec = IdealCircuitSpec("mult", (alice, bob), (alice, bob), function)
    shares = ideal_circuit_eval(net, spec, {alice: a, bob: b})
    return Share(shares[alice], out, alice), Share(shares[bob], out, bob)


def x_ln_x(
    net: Network,
    x_a: Share,
    x_b: Share,
    n_terms: int = 10,
    *,
    frac_bits: int = 20,
    zero_ok: bool = False,
) -> Tuple[Share, Share]:
    """Shares s_a (Alice) and s_b (Bob) of x ln(x) for x = x_a + x_b.

    With ``zero_ok`` an x of 0 yields 0, the limit of x ln(x).
    """
    ring = xlnx_ring(x_a.domain, frac_bits)
    u_a, u_b, lift_a, lift_b = _ln_circuit(net, x_a, x_b, n_terms, ring, zero_ok)
    v_a, v_b = mult_shares(net, u_a, lift_b, out=ring, wrap=True)
    w_a, w_b = mult_shares(net, lift_a, u_b, out=ring, wrap=True)
    s_a = (lift_a.value * u_a.value + v_a.value + w_a.value) % ring.modulus
    s_b = (lift_b.value * u_b.value + v_b.value + w_b.value) % ring.modulus
    return Share(s_a, ring, x_a.owner), Share(s_b, ring, x_b.owner)
