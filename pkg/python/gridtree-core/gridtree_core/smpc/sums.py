"""Ring-based secure sums."""

from math import gcd
from typing import List, Optional, Sequence, Tuple

from traitlets.log import get_logger

from ..errors import ConfigError, TooFewParties
from ..partynet import Network, PartyId
from .domains import Share, SumDomain


def _check(parties: Sequence[PartyId], inputs: Sequence[int], domain: SumDomain, minimum=3):
    if len(parties) < minimum:
        raise TooFewParties(f"a secure sum needs at least {minimum} parties, got {len(parties)}")
    if len(inputs) != len(parties):
        raise TooFewParties(f"{len(parties)} parties but {len(inputs)} inputs")
    for value in inputs:
        domain.check(value)


def _ring(net: Network, order, values, domain: SumDomain, mask: int, close: bool):
    """Pass a masked running total around ``order``.

    Returns the total as held by the last party, or, when ``close`` is set, as
    held again by the initiator after the closing hop.
    """
    m = domain.modulus
    running = (values[0] + mask) % m
    for position in range(1, len(order)):
        running = net.transfer(order[position - 1], order[position], running, domain.bits, "ring")
        running = (running + values[position]) % m
        net.tick()
    if close:
        running = net.transfer(order[-1], order[0], running, domain.bits, "ring")
        net.tick()
    return running


def _announce(net: Network, sender, recipients, value, nbits, tag="announce"):
    for receiver in recipients:
        net.transfer(sender, receiver, value, nbits, tag)
    net.tick()


def secure_sum(
    net: Network,
    parties: Sequence[PartyId],
    inputs: Sequence[int],
    domain: SumDomain,
    *,
    recipients: Optional[Sequence[PartyId]] = None,
    mask: Optional[int] = None,
    tag: str = "secure_sum",
) -> int:
    """Sum private inputs modulo ``domain`` and announce the result.

    Party 0 draws the mask and the ring follows party order. ``mask`` fixes the
    mask, which lets tests enumerate it.
    """
    _check(parties, inputs, domain)
    first = parties[0]
    r = domain.random(net.party(first).rng) if mask is None else mask % domain.modulus
    with net.section(tag):
        total = (_ring(net, parties, inputs, domain, r, close=True) - r) % domain.modulus
        targets = [p for p in (recipients if recipients is not None else parties) if p != first]
        _announce(net, first, targets, total, domain.bits)
    return total


def secure_sum_shares(
    net: Network,
    parties: Sequence[PartyId],
    inputs: Sequence[int],
    domain: SumDomain,
    *,
    tag: str = "secure_sum_shares",
) -> Tuple[Share, Share]:
    """Leave the sum split between the last and the first party.

    The last party holds Σ + r, the first holds r multiplied by -1, both mod m.
    With two parties the inputs are already such a split and nothing is sent.
    """
    _check(parties, inputs, domain, minimum=2)
    first, last = parties[0], parties[-1]
    if len(parties) == 2:
        return Share(inputs[1], domain, last), Share(inputs[0], domain, first)
    r = domain.random(net.party(first).rng)
    with net.section(tag):
        held = _ring(net, parties, inputs, domain, r, close=False)
    return Share(held, domain, last), Share((-r) % domain.modulus, domain, first)


def split_value(value: int, n_splits: int, domain: SumDomain, rng) -> List[int]:
    parts = [domain.random(rng) for _ in range(n_splits - 1)]
    parts.append((value - sum(parts)) % domain.modulus)
    return parts


def ring_order(parties: Sequence[PartyId], round_: int) -> List[PartyId]:
    """Party order of split round ``round_``.

    The step size walks through the strides coprime to k and the initiator
    rotates with the round, so consecutive rounds have different neighbours.
    """
    k = len(parties)
    strides = [s for s in range(1, k) if gcd(s, k) == 1]
    stride = strides[round_ % len(strides)]
    start = round_ % k
    return [parties[(start + position * stride) % k] for position in range(k)]


def split_secure_sum(
    net: Network,
    parties: Sequence[PartyId],
    inputs: Sequence[int],
    domain: SumDomain,
    n_splits: int,
    *,
    recipients: Optional[Sequence[PartyId]] = None,
    tag: str = "split_secure_sum",
) -> int:
    _check(parties, inputs, domain)
    if n_splits < 2:
        raise ConfigError("split_secure_sum needs n_splits >= 2")
    splits = {
        pid: split_value(value, n_splits, domain, net.party(pid).rng)
        for pid, value in zip(parties, inputs)
    }
    get_logger().debug("secure sum over %d parties in %d rounds", len(parties), n_splits)
    collector = parties[0]
    total = 0
    with net.section(tag):
        for round_ in range(n_splits):
            order = ring_order(parties, round_)
            initiator = order[0]
            r = domain.random(net.party(initiator).rng)
            with net.section(f"round{round_}"):
                values = [splits[pid][round_] for pid in order]
                closed = _ring(net, order, values, domain, r, close=True)
                partial = (closed - r) % domain.modulus
                partial = net.transfer(initiator, collector, partial, domain.bits, "collect")
            total = (total + partial) % domain.modulus
        net.tick()
        targets = [p for p in (recipients if recipients is not None else parties) if p != collector]
        _announce(net, collector, targets, total, domain.bits)
    return total


def split_secure_sum_shares(
    net: Network,
    parties: Sequence[PartyId],
    inputs: Sequence[int],
    domain: SumDomain,
    n_splits: int,
    *,
    tag: str = "split_secure_sum_shares",
) -> Tuple[Share, Share]:
    """Split-input version of :func:`secure_sum_shares`.

    Each round leaves its masked partial sum at the round's last party and the
    negated mask at its initiator; the pieces are then gathered by the last and
    the first party of ``parties``.
    """
    _check(parties, inputs, domain)
    if n_splits < 2:
        raise ConfigError("split_secure_sum_shares needs n_splits >= 2")
    splits = {
        pid: split_value(value, n_splits, domain, net.party(pid).rng)
        for pid, value in zip(parties, inputs)
    }
    first, last = parties[0], parties[-1]
    m = domain.modulus
    held, negated = 0, 0
    with net.section(tag):
        for round_ in range(n_splits):
            order = ring_order(parties, round_)
            r = domain.random(net.party(order[0]).rng)
            with net.section(f"round{round_}"):
                values = [splits[pid][round_] for pid in order]
                partial = _ring(net, order, values, domain, r, close=False)
                partial = net.transfer(order[-1], last, partial, domain.bits, "collect")
                mask = net.transfer(order[0], first, (-r) % m, domain.bits, "collect")
            held, negated = (held + partial) % m, (negated + mask) % m
        net.tick()
    return Share(held, domain, last), Share(negated, domain, first)
