"""Circuit evaluation behind a pluggable backend.

The default backend is an ideal functionality: it computes the declared
function in the clear and hands each declared recipient its output, while the
transcript is charged what a garbled circuit of that size would cost
(one oblivious transfer per input bit, ``size * log|T| * t`` bits sent from
the garbler to the evaluator).
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, Hashable, Mapping, Optional, Sequence, Tuple

from ..errors import SpecError
from ..partynet import IDEAL, Network, PartyId, payload_bits
from .domains import Share, reconstruct

CircuitFunction = Callable[[Mapping[PartyId, Any], Any], Mapping[PartyId, Any]]


@dataclass(frozen=True)
class IdealCircuitSpec:
    name: str
    input_parties: Tuple[PartyId, ...]
    recipients: Tuple[PartyId, ...]
    function: CircuitFunction
    size: int = 1


class CircuitBackend:
    """Evaluates circuit specs on behalf of the parties of a network."""

    def evaluate(self, net: Network, spec: IdealCircuitSpec, inputs: Mapping[PartyId, Any]):
        raise NotImplementedError


class IdealCircuitBackend(CircuitBackend):
    def evaluate(self, net, spec, inputs):
        outputs = spec.function(dict(inputs), net.functionality_rng)
        unexpected = set(outputs) - set(spec.recipients)
        if unexpected:
            raise SpecError(f"{spec.name} produced output for undeclared {sorted(unexpected)}")

        garbler = spec.input_parties[0]
        others = [p for p in (*spec.input_parties[1:], *spec.recipients) if p != garbler]
        units = spec.size * net.log_bound
        net.charge(garbler, circuit_units=units)
        with net.section(spec.name):
            if others:
                evaluator = others[0]
                net.transfer(garbler, evaluator, None, units * net.key_bits, "garbled")
                net.charge(evaluator, circuit_units=net.log_bound)
                net.tick()
            for receiver in spec.recipients:
                output = outputs[receiver]
                net.transfer(IDEAL, receiver, output, payload_bits(output), "output")
            net.tick()
        return {receiver: outputs[receiver] for receiver in spec.recipients}


_IDEAL_BACKEND = IdealCircuitBackend()


def ideal_circuit_eval(
    net: Network, spec: IdealCircuitSpec, inputs: Mapping[PartyId, Any]
) -> Dict[PartyId, Any]:
    if set(inputs) != set(spec.input_parties):
        raise SpecError(
            f"{spec.name} expects inputs from {[str(p) for p in spec.input_parties]}, "
            f"got {[str(p) for p in inputs]}"
        )
    backend = net.circuit_backend or _IDEAL_BACKEND
    return backend.evaluate(net, spec, inputs)


def _dedupe(parties: Sequence[PartyId]) -> Tuple[PartyId, ...]:
    return tuple(dict.fromkeys(parties))


def _total(values) -> Any:
    """Reconstruct a secret from its shares, or add plain numbers."""
    values = [v for v in values if v is not None]
    if values and isinstance(values[0], Share):
        return reconstruct(*values)
    return sum(values)


def is_zero_circuit(input_parties, recipients) -> IdealCircuitSpec:
    """Each input party provides a share or a plain count; recipients learn whether the sum is 0."""

    def function(inputs, rng):
        zero = _total(inputs.values()) == 0
        return {r: zero for r in recipients}

    return IdealCircuitSpec("is_zero", _dedupe(input_parties), _dedupe(recipients), function)


def _scores(inputs) -> Dict[Hashable, Any]:
    by_candidate: Dict[Hashable, list] = {}
    for contribution in inputs.values():
        for candidate, value in contribution.get("scores", {}).items():
            by_candidate.setdefault(candidate, []).append(value)
    return {c: _total(v) for c, v in by_candidate.items()}


def _ranks(inputs) -> Dict[Hashable, int]:
    ranks: Dict[Hashable, int] = {}
    for contribution in inputs.values():
        ranks.update(contribution.get("ranks", {}))
    return ranks


def pick_max(scores: Mapping[Hashable, float], ranks: Mapping[Hashable, int], tolerance: float):
    """Candidate with the highest score.

    Scores within ``tolerance`` of the best tie and go to the lowest rank.
    """
    if not scores:
        raise SpecError("argmax over no candidates")
    best = max(scores.values())
    tied = [c for c, s in scores.items() if s >= best - tolerance]
    return min(tied, key=lambda c: ranks.get(c, 0))


def argmax_circuit(
    input_parties,
    recipients,
    *,
    tolerance: float = 0.0,
    reveal: Optional[Callable[[PartyId, Hashable], Any]] = None,
    size: int = 1,
) -> IdealCircuitSpec:
    """Inputs are dicts with ``scores`` (candidate to share or number) and ``ranks``.

    Shares of one candidate from several parties are added up. ``reveal``
    decides what each recipient learns about the winner; by default everyone
    learns it.
    """

    def function(inputs, rng):
        winner = pick_max(_scores(inputs), _ranks(inputs), tolerance)
        return {r: (reveal(r, winner) if reveal else winner) for r in recipients}

    return IdealCircuitSpec("argmax", _dedupe(input_parties), _dedupe(recipients), function, size)


def all_zero_except_one_circuit(
    input_parties,
    recipients,
    *,
    reveal: Optional[Callable[[PartyId, Optional[Hashable]], Any]] = None,
    size: int = 1,
) -> IdealCircuitSpec:
    """Inputs are dicts with ``scores`` holding class count shares.

    The output is the single class with a non-zero count, or ``None`` when
    zero or several classes are present.
    """

    def function(inputs, rng):
        nonzero = [c for c, n in _scores(inputs).items() if n != 0]
        single = nonzero[0] if len(nonzero) == 1 else None
        return {r: (reveal(r, single) if reveal else single) for r in recipients}

    return IdealCircuitSpec(
        "all_zero_except_one", _dedupe(input_parties), _dedupe(recipients), function, size
    )
