"""Closed-form cost expressions of the grid protocols and a fit harness.

The expressions are asymptotic, so every hidden constant is one. The harness
does not compare absolute values; it fits the scaling exponent of the
measured transcript counters along one swept parameter and sets it next to
the exponent of the model over the same points.
"""

import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence

import jinja2
import numpy as np
from traitlets.log import get_logger

from .configuration import GridTreeConfiguration
from .dataset import GridPartition, Relation, fragments, make_partition
from .errors import ConfigError, FitError
from .partynet import CostCounters, snapshot_counters
from .protocols import induce

GRID_STRATEGIES = ("grid-hmerge", "grid-vmerge")

# Exponent of the leading term for the parameters a sweep usually varies.
LEADING_EXPONENTS = {
    "h": {"grid-hmerge": 2, "grid-vmerge": 1},
    "v": {"grid-hmerge": 1, "grid-vmerge": 2},
    "tuples": {"grid-hmerge": 1, "grid-vmerge": 1},
    "attributes": {"grid-hmerge": 1, "grid-vmerge": 1},
}

EXPONENT_TOLERANCE = 0.2

TEMPLATE_DIR = Path(__file__).resolve().parent / "templates"


@dataclass(frozen=True)
class CostParams:
    """Size parameters of one protocol run.

    ``tuples`` is |T|, ``attributes`` is |R|, ``classes`` is the number of
    class values and ``values`` the largest number of values of an attribute.
    """

    h: int
    v: int
    tuples: int
    attributes: int
    classes: int
    values: int
    key_bits: int
    taylor_terms: int

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ConfigError(f"cost parameter {f.name} must be positive")

    @property
    def k(self) -> int:
        return self.h * self.v

    @property
    def counts_per_attribute(self) -> int:
        """Counts a vertical merge computes per attribute: N, N_c, N_a and N_ac."""
        d, m = self.classes, self.values
        return 1 + d + m + d * m

    @classmethod
    def from_run(
        cls,
        relation: Relation,
        partition: GridPartition,
        configuration: GridTreeConfiguration,
    ) -> "CostParams":
        return cls(
            h=partition.h,
            v=partition.v,
            tuples=len(relation),
            attributes=len(relation.attributes),
            classes=len(relation.class_domain),
            values=max(len(relation.domains[a]) for a in relation.attributes),
            key_bits=configuration.key_bits,
            taylor_terms=configuration.taylor_terms,
        )

    def to_json(self):
        return dict(asdict(self), k=self.k)


def predict_hmerge(params: CostParams) -> Dict[str, float]:
    p = params
    return {
        "computation": (
            p.attributes * (p.v + p.classes + p.values) * p.h**2 * p.tuples * p.key_bits**3
        ),
        "communication": p.attributes * (p.v + p.classes) * p.h**2 * p.tuples * p.key_bits,
    }


def predict_vmerge(params: CostParams, include_optional: bool = True) -> Dict[str, float]:
    p = params
    c = p.counts_per_attribute
    log_t = math.log2(p.tuples) if p.tuples > 1 else 1.0
    computation = (
        p.attributes * p.h * c * p.v**2 * p.tuples * p.key_bits**3
        + p.attributes * c * log_t
        + p.attributes * log_t
    )
    communication = (
        p.attributes * p.h * c * p.v**2 * p.tuples * p.key_bits
        + p.attributes * c * p.taylor_terms * log_t * p.key_bits
        + p.attributes * log_t * p.key_bits
    )
    if include_optional:
        computation += p.h * log_t
        communication += p.h * log_t
    return {"computation": computation, "communication": communication}


PREDICTORS = {"grid-hmerge": predict_hmerge, "grid-vmerge": predict_vmerge}


class Measurement(NamedTuple):
    strategy: str
    params: CostParams
    counters: CostCounters


def measure(
    strategy: str,
    relation: Relation,
    partition: GridPartition,
    configuration: Optional[GridTreeConfiguration] = None,
) -> CostCounters:
    """Run ``strategy`` once and total the transcript."""
    configuration = configuration or GridTreeConfiguration()
    result = induce(strategy, partition, fragments(relation, partition), configuration)
    counters = snapshot_counters(result.transcript)
    get_logger().debug(
        "%s at v=%d h=%d: %d messages, %d bytes",
        strategy,
        partition.v,
        partition.h,
        counters.messages,
        counters.bytes,
    )
    return counters


def sweep(
    relation: Relation,
    configuration: GridTreeConfiguration,
    h_values: Sequence[int] = (2, 3, 4, 5),
    v_values: Sequence[int] = (2, 3, 4, 5),
    fixed_v: int = 3,
    fixed_h: int = 3,
) -> List[Measurement]:
    """Sweep h for the horizontal merge and v for the vertical merge.

    The pair (fixed_v, fixed_h) should lie on both sweeps so the two strategies
    meet at a matched configuration.
    """
    if not configuration.agreed_size and configuration.pad_policy != "total":
        # padded sizes must not shrink with the fragments as h or v grows
        names = configuration.trait_names(config=True)
        values = {name: getattr(configuration, name) for name in names}
        configuration = GridTreeConfiguration(**dict(values, pad_policy="total"))
    plan = [("grid-hmerge", fixed_v, h) for h in h_values]
    plan += [("grid-vmerge", v, fixed_h) for v in v_values]
    points = []
    for strategy, v, h in plan:
        partition = make_partition(relation, v, h, seed=configuration.seed)
        params = CostParams.from_run(relation, partition, configuration)
        counters = measure(strategy, relation, partition, configuration)
        points.append(Measurement(strategy, params, counters))
    return points


def _swept_parameter(points: Sequence[Measurement]) -> str:
    names = [f.name for f in fields(CostParams)]
    varying = [n for n in names if len({getattr(p.params, n) for p in points}) > 1]
    if len(varying) != 1:
        raise FitError(
            f"{points[0].strategy}: a sweep must vary exactly one parameter, "
            f"found {varying or 'none'}"
        )
    return varying[0]


def fit_exponent(xs: Iterable[float], ys: Iterable[float]) -> float:
    """Least-squares slope of log(y) against log(x)."""
    xs, ys = np.asarray(list(xs), dtype=float), np.asarray(list(ys), dtype=float)
    if len(np.unique(xs)) < 4:
        raise FitError(f"need at least 4 distinct sweep points, got {len(np.unique(xs))}")
    if (xs <= 0).any() or (ys <= 0).any():
        raise FitError("sweep values and measurements must be positive")
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)


def _fit_strategy(strategy: str, points: Sequence[Measurement]):
    if len(points) < 4:
        raise FitError(f"{strategy}: need at least 4 measurement points, got {len(points)}")
    parameter = _swept_parameter(points)
    predict = PREDICTORS[strategy]
    xs = [getattr(p.params, parameter) for p in points]
    predicted = [predict(p.params) for p in points]
    exponents = {
        "bytes": fit_exponent(xs, [p.counters.bytes for p in points]),
        "messages": fit_exponent(xs, [p.counters.messages for p in points]),
        "model_communication": fit_exponent(xs, [q["communication"] for q in predicted]),
        "model_computation": fit_exponent(xs, [q["computation"] for q in predicted]),
    }
    leading = LEADING_EXPONENTS.get(parameter, {}).get(strategy)
    return {
        "strategy": strategy,
        "parameter": parameter,
        "points": [
            {"params": p.params.to_json(), "predicted": q, "measured": p.counters.to_json()}
            for p, q in zip(points, predicted)
        ],
        "exponents": exponents,
        "leading_exponent": leading,
        "agrees": None
        if leading is None
        else abs(exponents["bytes"] - leading) <= EXPONENT_TOLERANCE,
    }


def _verdict(points: Sequence[Measurement]):
    by_params: Dict[CostParams, Dict[str, CostCounters]] = {}
    for p in points:
        by_params.setdefault(p.params, {})[p.strategy] = p.counters
    matched = [
        (params, seen) for params, seen in by_params.items() if set(GRID_STRATEGIES) <= set(seen)
    ]
    if not matched:
        return None
    comparisons = []
    for params, seen in matched:
        hm, vm = seen["grid-hmerge"].bytes, seen["grid-vmerge"].bytes
        comparisons.append(
            {
                "params": params.to_json(),
                "bytes": {"grid-hmerge": hm, "grid-vmerge": vm},
                "cheaper": "grid-hmerge" if hm < vm else "grid-vmerge",
            }
        )
    winners = {c["cheaper"] for c in comparisons}
    return {
        "cheaper": winners.pop() if len(winners) == 1 else "mixed",
        "matched": comparisons,
    }


def fit_and_compare(measured: Sequence[Measurement]) -> dict:
    """Fit scaling exponents per strategy and compare strategies where their params match.

    Raises :class:`FitError` when a strategy has fewer than four points or its
    points do not vary exactly one parameter.
    """
    grouped: Dict[str, List[Measurement]] = {}
    for point in measured:
        if point.strategy not in PREDICTORS:
            raise FitError(f"no cost model for strategy {point.strategy!r}")
        grouped.setdefault(point.strategy, []).append(point)
    if not grouped:
        raise FitError("no measurements to fit")
    fits = {}
    for strategy, points in grouped.items():
        parameter = _swept_parameter(points) if len(points) >= 4 else None
        if parameter is not None:
            points = sorted(points, key=lambda p: getattr(p.params, parameter))
        fits[strategy] = _fit_strategy(strategy, points)
    return {
        "params": {s: [p["params"] for p in fit["points"]] for s, fit in fits.items()},
        "predicted": {s: [p["predicted"] for p in fit["points"]] for s, fit in fits.items()},
        "measured": {s: [p["measured"] for p in fit["points"]] for s, fit in fits.items()},
        "exponents": {s: fit["exponents"] for s, fit in fits.items()},
        "fits": fits,
        "verdict": _verdict(measured),
    }


def render_report(report: Mapping, template_paths: Optional[Sequence] = None) -> str:
    env = jinja2.Environment(
        loader=jinja2.FileSystemLoader(template_paths or [str(TEMPLATE_DIR)]),
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    return env.get_template("report.txt.j2").render(report=report)
