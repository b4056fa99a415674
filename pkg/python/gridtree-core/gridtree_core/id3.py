"""Plaintext ID3: entropy and gain arithmetic plus the reference tree builder.

The protocols reuse :func:`info_gain` and compare their output against
:func:`id3_build`.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .dataset import Relation, Row
from .errors import EmptyTraining, HistogramMismatch, SchemaError, UnseenValue

GAIN_TIE = 1e-12


@dataclass(frozen=True)
class ClassHistogram:
    counts: Tuple[Tuple[str, int], ...]

    @classmethod
    def of(cls, counts: Mapping[str, int]) -> "ClassHistogram":
        if any(n < 0 for n in counts.values()):
            raise HistogramMismatch("class counts must be non-negative")
        return cls(tuple(sorted(counts.items())))

    @classmethod
    def from_rows(cls, rows: Iterable[Row], class_attr: str, domain: Sequence[str] = ()):
        counts = {c: 0 for c in domain}
        for row in rows:
            counts[row[class_attr]] = counts.get(row[class_attr], 0) + 1
        return cls.of(counts)

    @property
    def total(self) -> int:
        return sum(n for _, n in self.counts)

    def as_dict(self) -> Dict[str, int]:
        return dict(self.counts)


def entropy(hist: ClassHistogram) -> float:
    total = hist.total
    if total == 0:
        return 0.0
    result = 0.0
    for _, n in hist.counts:
        if n:
            p = n / total
            result -= p * math.log2(p)
    return result


def info_gain(parent: ClassHistogram, children: Sequence[ClassHistogram]) -> float:
    total = parent.total
    if sum(child.total for child in children) != total:
        raise HistogramMismatch(
            f"children hold {sum(c.total for c in children)} tuples, parent holds {total}"
        )
    if total == 0:
        return 0.0
    remainder = sum(child.total / total * entropy(child) for child in children)
    return entropy(parent) - remainder


def majority(hist: ClassHistogram, domain: Sequence[str] = ()) -> str:
    """Most frequent class; ties go to the class listed first in ``domain``."""
    counts = hist.as_dict()
    order = list(domain) or sorted(counts)
    order += sorted(c for c in counts if c not in order)
    return max(order, key=lambda c: (counts.get(c, 0), -order.index(c)))


@dataclass(frozen=True)
class Leaf:
    label: str


@dataclass(frozen=True)
class Interior:
    attribute: str
    children: Dict[str, "PlainTree"] = field(hash=False)


PlainTree = Union[Leaf, Interior]


def split_rows(rows: Sequence[Row], attribute: str, domain: Sequence[str]):
    parts: Dict[str, List[Row]] = {value: [] for value in domain}
    for row in rows:
        parts.setdefault(row[attribute], []).append(row)
    return parts


def gain_table(rel: Relation, rows: Sequence[Row], attrs: Sequence[str]) -> Dict[str, float]:
    """Information gain of every attribute in ``attrs`` at the node holding ``rows``."""
    parent = ClassHistogram.from_rows(rows, rel.class_attr, rel.class_domain)
    gains = {}
    for attribute in attrs:
        parts = split_rows(rows, attribute, rel.domains[attribute])
        children = [
            ClassHistogram.from_rows(part, rel.class_attr, rel.class_domain)
            for part in parts.values()
        ]
        gains[attribute] = info_gain(parent, children)
    return gains


def best_attribute(gains: Mapping[str, float], schema: Sequence[str]) -> str:
    """Highest gain; gains within ``GAIN_TIE`` tie and go to the lowest schema position."""
    best = max(gains.values())
    tied = [a for a, g in gains.items() if g >= best - GAIN_TIE]
    return min(tied, key=list(schema).index)


def id3_build(rel: Relation, attrs: Optional[Sequence[str]] = None) -> PlainTree:
    attrs = list(rel.attributes if attrs is None else attrs)
    if rel.class_attr in attrs or rel.id_attr in attrs:
        raise SchemaError("the class and key columns cannot be split on")
    if not rel.rows:
        raise EmptyTraining("cannot induce a tree from an empty relation")
    return _grow(rel, list(rel.rows), attrs, None)


def _grow(rel: Relation, rows, attrs, parent_rows) -> PlainTree:
    if not rows:
        hist = ClassHistogram.from_rows(parent_rows, rel.class_attr, rel.class_domain)
        return Leaf(majority(hist, rel.class_domain))
    hist = ClassHistogram.from_rows(rows, rel.class_attr, rel.class_domain)
    if not attrs:
        return Leaf(majority(hist, rel.class_domain))
    present = [c for c, n in hist.counts if n]
    if len(present) == 1:
        return Leaf(present[0])

    gains = gain_table(rel, rows, attrs)
    chosen = best_attribute(gains, rel.schema)
    rest = [a for a in attrs if a != chosen]
    parts = split_rows(rows, chosen, rel.domains[chosen])
    return Interior(
        chosen, {value: _grow(rel, part, rest, rows) for value, part in parts.items()}
    )


def classify_plain(tree: PlainTree, row: Mapping[str, str]) -> str:
    node = tree
    while isinstance(node, Interior):
        value = row.get(node.attribute)
        if value is None or value not in node.children:
            raise UnseenValue(f"no branch for {node.attribute}={value!r}")
        node = node.children[value]
    return node.label


def tree_to_json(tree: PlainTree):
    if isinstance(tree, Leaf):
        return {"kind": "leaf", "class": tree.label}
    return {
        "kind": "interior",
        "attribute": tree.attribute,
        "children": {value: tree_to_json(child) for value, child in tree.children.items()},
    }


def tree_from_json(data) -> PlainTree:
    if data["kind"] == "leaf":
        return Leaf(data["class"])
    return Interior(
        data["attribute"],
        {value: tree_from_json(child) for value, child in data["children"].items()},
    )


def tree_depth(tree: PlainTree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(tree_depth(child) for child in tree.children.values())


def tree_paths(tree: PlainTree, prefix=()):
    """Yield ``(path, label)`` pairs, a path being a tuple of (attribute, value)."""
    if isinstance(tree, Leaf):
        yield prefix, tree.label
        return
    for value, child in tree.children.items():
        yield from tree_paths(child, prefix + ((tree.attribute, value),))
