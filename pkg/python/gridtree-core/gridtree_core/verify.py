"""Margin-aware comparison of an induced tree with centralized ID3."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .dataset import Relation
from .id3 import (
    ClassHistogram,
    Interior,
    Leaf,
    PlainTree,
    best_attribute,
    gain_table,
    id3_build,
    majority,
    split_rows,
)

Path = Tuple[Tuple[str, str], ...]


def _path_text(path: Path) -> str:
    return " & ".join(f"{a}={v}" for a, v in path) or "<root>"


@dataclass
class NodeCheck:
    """Outcome at one interior node of the checked tree."""

    path: Path
    chosen: str
    expected: str
    gains: Dict[str, float]
    margin: float

    @property
    def deficit(self) -> float:
        return max(self.gains.values()) - self.gains.get(self.chosen, float("-inf"))

    def to_json(self):
        return {
            "path": _path_text(self.path),
            "chosen": self.chosen,
            "expected": self.expected,
            "gains": self.gains,
            "margin": self.margin,
        }


@dataclass
class VerificationReport:
    tau_gain: float
    checks: List[NodeCheck] = field(default_factory=list)
    mismatches: List[str] = field(default_factory=list)
    exact: bool = False

    @property
    def passed(self) -> bool:
        return not self.mismatches

    @property
    def margin_safe(self) -> bool:
        return all(check.margin > self.tau_gain for check in self.checks)

    @property
    def notes(self) -> List[str]:
        return [
            f"{_path_text(c.path)}: gain margin {c.margin:.6f} is within tolerance, "
            f"chose {c.chosen} where centralized ID3 picks {c.expected}"
            for c in self.checks
            if c.margin <= self.tau_gain
        ]

    @property
    def verdict(self) -> str:
        if not self.passed:
            return "FAIL"
        return "PASS" if self.exact or self.margin_safe else "PASS (margin note)"

    def to_json(self):
        return {
            "verdict": self.verdict,
            "exact": self.exact,
            "margin_safe": self.margin_safe,
            "tau_gain": self.tau_gain,
            "mismatches": list(self.mismatches),
            "notes": self.notes,
            "nodes": [check.to_json() for check in self.checks],
        }


def _margin(gains: Dict[str, float]) -> float:
    ordered = sorted(gains.values(), reverse=True)
    return ordered[0] - ordered[1] if len(ordered) > 1 else float("inf")


def verify_tree(tree: PlainTree, relation: Relation, tau_gain: float) -> VerificationReport:
    """Walk ``tree`` next to the relation and check every decision.

    Leaves must follow the ID3 leaf rules exactly. An interior node may split
    on any remaining attribute whose gain is within ``tau_gain`` of the best.
    """
    report = VerificationReport(tau_gain)
    _check(tree, relation, list(relation.rows), list(relation.attributes), None, (), report)
    report.exact = report.passed and tree == id3_build(relation)
    return report


def _expected_leaf(relation, rows, attrs, parent_rows) -> Optional[str]:
    domain = relation.class_domain
    if not rows:
        return majority(ClassHistogram.from_rows(parent_rows, relation.class_attr, domain), domain)
    hist = ClassHistogram.from_rows(rows, relation.class_attr, domain)
    if not attrs:
        return majority(hist, domain)
    present = [c for c, n in hist.counts if n]
    return present[0] if len(present) == 1 else None


def _check(tree, relation, rows, attrs, parent_rows, path, report):
    expected = _expected_leaf(relation, rows, attrs, parent_rows)
    where = _path_text(path)
    if expected is not None:
        if not isinstance(tree, Leaf):
            report.mismatches.append(f"{where}: expected leaf {expected}, found a split")
        elif tree.label != expected:
            report.mismatches.append(f"{where}: expected leaf {expected}, found {tree.label}")
        return
    if not isinstance(tree, Interior):
        report.mismatches.append(f"{where}: expected a split, found leaf {tree.label}")
        return
    gains = gain_table(relation, rows, attrs)
    check = NodeCheck(
        path, tree.attribute, best_attribute(gains, relation.schema), gains, _margin(gains)
    )
    report.checks.append(check)
    if tree.attribute not in gains:
        report.mismatches.append(f"{where}: {tree.attribute} is not available at this node")
        return
    if check.deficit > report.tau_gain:
        report.mismatches.append(
            f"{where}: split on {tree.attribute} loses {check.deficit:.6f} bits of gain "
            f"against {check.expected}"
        )
    domain = relation.domains[tree.attribute]
    if set(tree.children) != set(domain):
        report.mismatches.append(f"{where}: branches do not cover the domain of {tree.attribute}")
        return
    rest = [a for a in attrs if a != tree.attribute]
    for value, part in split_rows(rows, tree.attribute, domain).items():
        _check(
            tree.children[value],
            relation,
            part,
            rest,
            rows,
            path + ((tree.attribute, value),),
            report,
        )
