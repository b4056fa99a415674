import math
import random

import pytest

from gridtree_core.errors import DomainViolation, SpecError
from gridtree_core.partynet import Network, PartyId
from gridtree_core.smpc import (
    FixedPointRing,
    Share,
    SumDomain,
    all_zero_except_one_circuit,
    argmax_circuit,
    ideal_circuit_eval,
    is_zero_circuit,
    ln_series,
    ln_shares,
    mult_shares,
    pick_max,
    reconstruct,
    x_ln_x,
)

ALICE, BOB, CAROL = PartyId(1, 1), PartyId(2, 1), PartyId(3, 1)


@pytest.fixture()
def net():
    return Network([ALICE, BOB, CAROL], seed=9, key_bits=64, tuple_bound=100)


def split(x, domain, rng=random.Random(0)):
    x_a = domain.random(rng)
    return Share(x_a, domain, ALICE), Share((x - x_a) % domain.modulus, domain, BOB)


def test_arity_is_checked(net):
    spec = is_zero_circuit([ALICE, BOB], [ALICE])
    with pytest.raises(SpecError):
        ideal_circuit_eval(net, spec, {ALICE: 0})
    with pytest.raises(SpecError):
        ideal_circuit_eval(net, spec, {ALICE: 0, BOB: 0, CAROL: 0})


def test_is_zero(net):
    domain = SumDomain(16)
    spec = is_zero_circuit([ALICE, BOB], [ALICE, BOB, CAROL])
    assert ideal_circuit_eval(net, spec, dict(zip((ALICE, BOB), split(0, domain)))) == {
        ALICE: True,
        BOB: True,
        CAROL: True,
    }
    out = ideal_circuit_eval(net, spec, dict(zip((ALICE, BOB), split(5, domain))))
    assert not out[CAROL]
    assert ideal_circuit_eval(net, is_zero_circuit([ALICE], [CAROL]), {ALICE: 0})[CAROL]
    net.close()


def test_circuit_cost_is_charged(net):
    ideal_circuit_eval(net, is_zero_circuit([ALICE, BOB], [CAROL]), {ALICE: 1, BOB: -1})
    garbled = net.transcript.with_tag("is_zero/garbled")
    assert len(garbled) == 1
    assert (garbled[0].sender, garbled[0].receiver) == (ALICE, BOB)
    # one unit per bit of log|T|
    assert net.transcript.counters[ALICE]["circuit_units"] == net.log_bound == 7
    outputs = net.transcript.with_tag("is_zero/output")
    assert [e.receiver for e in outputs] == [CAROL]


def test_argmax_adds_shares_and_breaks_ties_by_rank(net):
    spec = argmax_circuit([ALICE, BOB], [ALICE, BOB, CAROL])
    inputs = {
        ALICE: {"scores": {"a": 1.0, "b": 2.0}},
        BOB: {"scores": {"a": 1.0, "b": 0.0}, "ranks": {"a": 1, "b": 0}},
    }
    assert set(ideal_circuit_eval(net, spec, inputs).values()) == {"b"}
    inputs[BOB]["ranks"] = {"a": 0, "b": 1}
    assert set(ideal_circuit_eval(net, spec, inputs).values()) == {"a"}


def test_argmax_reveal(net):
    spec = argmax_circuit(
        [ALICE], [ALICE, CAROL], reveal=lambda r, w: w if r == ALICE else "hidden"
    )
    out = ideal_circuit_eval(net, spec, {ALICE: {"scores": {"x": 1, "y": 3}}})
    assert out == {ALICE: "y", CAROL: "hidden"}


def test_pick_max():
    assert pick_max({"a": 1.0, "b": 1.00005}, {"a": 0, "b": 1}, 1e-4) == "a"
    assert pick_max({"a": 1.0, "b": 1.1}, {"a": 0, "b": 1}, 1e-4) == "b"
    with pytest.raises(SpecError):
        pick_max({}, {}, 0.0)


@pytest.mark.parametrize(
    "counts, expected",
    [({"yes": 3, "no": 0}, "yes"), ({"yes": 3, "no": 1}, None), ({"yes": 0, "no": 0}, None)],
)
def test_all_zero_except_one(net, counts, expected):
    spec = all_zero_except_one_circuit([ALICE], [ALICE, BOB])
    out = ideal_circuit_eval(net, spec, {ALICE: {"scores": counts}})
    assert out == {ALICE: expected, BOB: expected}


def test_undeclared_output(net):
    spec = is_zero_circuit([ALICE], [BOB])
    rogue = spec.__class__(spec.name, spec.input_parties, (), spec.function)
    with pytest.raises(SpecError):
        ideal_circuit_eval(net, rogue, {ALICE: 0})


@pytest.mark.parametrize("x", [1, 2, 5, 7, 100, 1023, 1024, 9999])
def test_ln_series(x):
    assert ln_series(x, 10) == pytest.approx(math.log(x), abs=1e-9)


def test_ln_series_domain():
    with pytest.raises(DomainViolation):
        ln_series(0, 10)
    assert ln_series(4, 1) == pytest.approx(math.log(4))


def test_ln_shares(net):
    u_a, u_b = ln_shares(net, *split(5, SumDomain(64)), 10)
    assert (u_a.owner, u_b.owner) == (ALICE, BOB)
    assert reconstruct(u_a, u_b) == pytest.approx(math.log(5), abs=1e-4)
    with pytest.raises(DomainViolation):
        ln_shares(net, *split(0, SumDomain(64)))


def test_x_ln_x_example(net):
    s_a, s_b = x_ln_x(net, *split(5, SumDomain(64)), 10)
    assert reconstruct(s_a, s_b) == pytest.approx(5 * math.log(5), abs=1e-3)
    assert reconstruct(s_a, s_b) == pytest.approx(8.04719, abs=1e-3)


def test_x_ln_x_of_zero(net):
    s_a, s_b = x_ln_x(net, *split(0, SumDomain(64)), 10, zero_ok=True)
    assert reconstruct(s_a, s_b) == pytest.approx(0.0, abs=1e-6)


def test_x_ln_x_sampled():
    domain = SumDomain(1 << 14)
    rng = random.Random(11)
    for x in [1, 2, 3, 10**4] + [rng.randrange(1, 10**4) for _ in range(40)]:
        net = Network([ALICE, BOB], seed=x)
        s_a, s_b = x_ln_x(net, *split(x, domain, rng), 10)
        assert reconstruct(s_a, s_b) == pytest.approx(x * math.log(x), abs=1e-3)


@pytest.mark.slow
def test_x_ln_x_whole_count_range():
    domain = SumDomain(1 << 14)
    rng = random.Random(12)
    net = Network([ALICE, BOB], seed=12)
    for x in range(1, 10**4 + 1):
        s_a, s_b = x_ln_x(net, *split(x, domain, rng), 10)
        assert abs(reconstruct(s_a, s_b) - x * math.log(x)) < 1e-3, x


def test_x_ln_x_few_terms_is_coarser(net):
    coarse = reconstruct(*x_ln_x(net, *split(6, SumDomain(64)), 1))
    assert abs(coarse - 6 * math.log(6)) > 1e-3


def test_mult_shares(net):
    ring = FixedPointRing(16, 64)
    a = Share(ring.encode(1.5), ring, ALICE)
    b = Share(ring.encode(-2.25), ring, BOB)
    p_a, p_b = mult_shares(net, a, b)
    assert (p_a.owner, p_b.owner) == (ALICE, BOB)
    assert reconstruct(p_a, p_b) == pytest.approx(-3.375)


def test_mult_shares_random_pairs(net):
    ring = FixedPointRing(16, 64)
    rng = random.Random(5)
    for _ in range(1000):
        x = ring.decode(ring.encode(rng.uniform(-1000, 1000)))
        y = ring.decode(ring.encode(rng.uniform(-1000, 1000)))
        a, b = Share(ring.encode(x), ring, ALICE), Share(ring.encode(y), ring, BOB)
        p_a, p_b = mult_shares(net, a, b)
        assert abs(reconstruct(p_a, p_b) - x * y) <= 2 * ring.ulp


def test_mult_shares_overflow(net):
    whole = FixedPointRing(0, 16)
    a, b = Share(whole.encode(200), whole, ALICE), Share(whole.encode(200), whole, BOB)
    with pytest.raises(DomainViolation):
        mult_shares(net, a, b)
    with pytest.raises(DomainViolation):
        mult_shares(net, a, b, out=FixedPointRing(4, 16))
    p_a, p_b = mult_shares(net, a, b, wrap=True)
    assert (p_a.value + p_b.value) % whole.modulus == 40000 % whole.modulus


def test_fixed_point_ring():
    ring = FixedPointRing(8, 16)
    assert ring.decode(ring.encode(-1.5)) == -1.5
    assert ring.ulp == 1 / 256
    with pytest.raises(DomainViolation):
        ring.encode(200.0)
    with pytest.raises(DomainViolation):
        FixedPointRing(16, 16)


def test_shares_of_different_domains():
    with pytest.raises(SpecError):
        reconstruct(Share(1, SumDomain(8)), Share(1, SumDomain(16)))
