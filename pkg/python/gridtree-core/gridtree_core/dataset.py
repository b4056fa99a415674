"""Relations, grid partitions and their fragments."""

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import pandas as pd
from pandas.errors import EmptyDataError

from .errors import (
    DuplicateKey,
    EmptyInput,
    IncompleteGrid,
    PartitionError,
    SchemaError,
)
from .partynet import PartyId

Row = Dict[str, str]

PARTITION_FILE = "partition.json"


@dataclass
class Relation:
    """A table of discrete string values keyed by ``id_attr``."""

    schema: Tuple[str, ...]
    id_attr: str
    class_attr: str
    rows: List[Row]
    domains: Dict[str, Tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.schema = tuple(self.schema)
        for name in (self.id_attr, self.class_attr):
            if name not in self.schema:
                raise SchemaError(f"column {name!r} is not part of the schema")
        seen = set()
        for row in self.rows:
            key = row[self.id_attr]
            if key in seen:
                raise DuplicateKey(f"identifier {key!r} appears more than once")
            seen.add(key)
        if not self.domains:
            self.domains = {
                a: tuple(sorted({row[a] for row in self.rows})) for a in self.attributes
            }
            self.domains[self.class_attr] = tuple(
                sorted({row[self.class_attr] for row in self.rows})
            )

    @property
    def attributes(self) -> Tuple[str, ...]:
        """Non-key attributes other than the class, in schema order."""
        return tuple(a for a in self.schema if a not in (self.id_attr, self.class_attr))

    @property
    def non_key_attributes(self) -> Tuple[str, ...]:
        return tuple(a for a in self.schema if a != self.id_attr)

    @property
    def ids(self) -> List[str]:
        return [row[self.id_attr] for row in self.rows]

    @property
    def class_domain(self) -> Tuple[str, ...]:
        return self.domains[self.class_attr]

    def __len__(self):
        return len(self.rows)

    def __eq__(self, other):
        if not isinstance(other, Relation):
            return NotImplemented
        if (self.schema, self.id_attr, self.class_attr) != (
            other.schema,
            other.id_attr,
            other.class_attr,
        ):
            return False

        def key(rel):
            return sorted(tuple(row[a] for a in rel.schema) for row in rel.rows)

        return key(self) == key(other)

    def select(self, rows: Sequence[Row]) -> "Relation":
        """A relation over the same schema and domains holding ``rows``."""
        return Relation(self.schema, self.id_attr, self.class_attr, list(rows), self.domains)


def _read_rows(path, required: Sequence[str]) -> Tuple[Tuple[str, ...], List[Row]]:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except FileNotFoundError:
        raise EmptyInput(f"{path} does not exist") from None
    except EmptyDataError:
        raise EmptyInput(f"{path} is empty") from None
    if len(frame.columns) == 0:
        raise EmptyInput(f"{path} has no header row")
    frame.columns = [str(c).strip() for c in frame.columns]
    for name in required:
        if name not in frame.columns:
            raise SchemaError(f"{path} has no column {name!r}")
    if frame.empty:
        raise EmptyInput(f"{path} holds no tuples")
    rows = [{k: str(v).strip() for k, v in record.items()} for record in frame.to_dict("records")]
    return tuple(frame.columns), rows


def load_relation(path, id_attr: str, class_attr: str) -> Relation:
    schema, rows = _read_rows(path, (id_attr, class_attr))
    return Relation(schema, id_attr, class_attr, rows)


def load_tuples(path, id_attr: str) -> List[Row]:
    """Rows to classify; the class column may be missing."""
    return _read_rows(path, (id_attr,))[1]


def synthetic_relation(
    n_tuples=30, n_attributes=5, n_values=3, n_classes=2, seed=0, noise=0.0
) -> Relation:
    """A random relation whose class depends on the first attributes.

    Values are prefixed by their attribute (``a2v0``) and classes are ``c0``,
    ``c1``... so every token names exactly one column.
    """
    rng = random.Random(f"synthetic/{seed}")
    attrs = [f"a{i}" for i in range(n_attributes)]
    schema = ("id", *attrs, "class")
    rows = []
    for t in range(n_tuples):
        values = [rng.randrange(n_values) for _ in attrs]
        if rng.random() < noise:
            label = rng.randrange(n_classes)
        else:
            label = (values[0] + (values[1] if n_attributes > 1 else 0) // 2) % n_classes
        row = {"id": f"t{t:04d}", "class": f"c{label}"}
        row.update({a: f"{a}v{v}" for a, v in zip(attrs, values)})
        rows.append(row)
    return Relation(schema, "id", "class", rows)


@dataclass(frozen=True)
class Fragment:
    """The part S_ij of a relation held by party ``owner``."""

    owner: PartyId
    columns: Tuple[str, ...]
    rows: Tuple[Tuple[str, ...], ...]

    @property
    def ids(self) -> List[str]:
        return [row[0] for row in self.rows]

    def records(self) -> List[Row]:
        return [dict(zip(self.columns, row)) for row in self.rows]

    def column(self, name: str) -> Dict[str, str]:
        """Map from tuple id to the value of column ``name``."""
        index = self.columns.index(name)
        return {row[0]: row[index] for row in self.rows}


@dataclass(frozen=True)
class GridPartition:
    v: int
    h: int
    attr_groups: Tuple[Tuple[str, ...], ...]
    tuple_groups: Tuple[Tuple[str, ...], ...]
    seed: int
    schema: Tuple[str, ...]
    id_attr: str
    class_attr: str

    @property
    def k(self):
        return self.v * self.h

    def party_ids(self) -> List[PartyId]:
        return [PartyId(i, j) for i in range(1, self.v + 1) for j in range(1, self.h + 1)]

    def group_parties(self, i: int) -> List[PartyId]:
        """The h parties of vertical group ``i``."""
        return [PartyId(i, j) for j in range(1, self.h + 1)]

    def layer_parties(self, j: int) -> List[PartyId]:
        """The v parties of horizontal layer ``j``."""
        return [PartyId(i, j) for i in range(1, self.v + 1)]

    def group_of(self, attribute: str) -> int:
        for i, block in enumerate(self.attr_groups, start=1):
            if attribute in block:
                return i
        raise SchemaError(f"attribute {attribute!r} is not partitioned")

    def to_json(self):
        return {
            "v": self.v,
            "h": self.h,
            "attr_groups": [list(g) for g in self.attr_groups],
            "tuple_groups": [list(g) for g in self.tuple_groups],
            "seed": self.seed,
            "schema": list(self.schema),
            "id_attr": self.id_attr,
            "class_attr": self.class_attr,
        }

    @classmethod
    def from_json(cls, data):
        try:
            return cls(
                v=int(data["v"]),
                h=int(data["h"]),
                attr_groups=tuple(tuple(g) for g in data["attr_groups"]),
                tuple_groups=tuple(tuple(g) for g in data["tuple_groups"]),
                seed=int(data["seed"]),
                schema=tuple(data["schema"]),
                id_attr=data["id_attr"],
                class_attr=data["class_attr"],
            )
        except (KeyError, TypeError, ValueError) as e:
            raise PartitionError(f"malformed partition description: {e}") from e


def partition_kind(partition: GridPartition) -> str:
    if partition.v == 1 and partition.h == 1:
        return "centralized"
    if partition.v == 1:
        return "horizontal"
    if partition.h == 1:
        return "vertical"
    return "grid"


def make_partition(rel: Relation, v: int, h: int, seed: int = 0) -> GridPartition:
    attrs = list(rel.attributes)
    if not 1 <= v < len(rel.non_key_attributes):
        raise PartitionError(
            f"v must lie in [1, {len(rel.non_key_attributes) - 1}] for "
            f"{len(rel.non_key_attributes)} non-key attributes, got {v}"
        )
    if not 1 <= h <= len(rel):
        raise PartitionError(f"h must lie in [1, {len(rel)}], got {h}")
    rng = random.Random(f"partition/{seed}")

    shuffled = list(attrs)
    rng.shuffle(shuffled)
    blocks: List[List[str]] = [[] for _ in range(v)]
    for position, name in enumerate(shuffled):
        blocks[position % v].append(name)
    blocks[-1].append(rel.class_attr)
    order = {name: rel.schema.index(name) for name in rel.schema}
    attr_groups = tuple(tuple(sorted(b, key=order.__getitem__)) for b in blocks)

    ids = rel.ids
    shuffled_ids = list(ids)
    rng.shuffle(shuffled_ids)
    rows_of: List[set] = [set() for _ in range(h)]
    for position, key in enumerate(shuffled_ids):
        rows_of[position % h].add(key)
    tuple_groups = tuple(tuple(k for k in ids if k in block) for block in rows_of)

    return GridPartition(
        v, h, attr_groups, tuple_groups, seed, rel.schema, rel.id_attr, rel.class_attr
    )


def fragments(rel: Relation, partition: GridPartition) -> Dict[PartyId, Fragment]:
    by_id = {row[rel.id_attr]: row for row in rel.rows}
    result = {}
    for i, block in enumerate(partition.attr_groups, start=1):
        columns = (rel.id_attr, *block)
        for j, ids in enumerate(partition.tuple_groups, start=1):
            rows = tuple(tuple(by_id[key][c] for c in columns) for key in ids)
            result[PartyId(i, j)] = Fragment(PartyId(i, j), columns, rows)
    return result


def reassemble(partition: GridPartition, parts: Mapping[PartyId, Fragment]) -> Relation:
    missing = [pid for pid in partition.party_ids() if pid not in parts]
    if missing:
        raise IncompleteGrid("missing fragment(s) " + ", ".join(str(p) for p in missing))
    rows: List[Row] = []
    for j in range(1, partition.h + 1):
        layer: Dict[str, Row] = {}
        for pid in partition.layer_parties(j):
            for record in parts[pid].records():
                layer.setdefault(record[partition.id_attr], {}).update(record)
        rows.extend(layer.values())
    return Relation(partition.schema, partition.id_attr, partition.class_attr, rows)


def fragment_filename(pid: PartyId) -> str:
    return f"fragment_{pid.i}_{pid.j}.csv"


def write_fragments(partition: GridPartition, parts: Mapping[PartyId, Fragment], out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / PARTITION_FILE).write_text(json.dumps(partition.to_json(), indent=2) + "\n")
    written = []
    for pid in partition.party_ids():
        frag = parts[pid]
        path = out / fragment_filename(pid)
        pd.DataFrame(list(frag.rows), columns=list(frag.columns)).to_csv(path, index=False)
        written.append(path)
    return written


def read_partition(path) -> GridPartition:
    path = Path(path)
    if path.is_dir():
        path = path / PARTITION_FILE
    if not path.exists():
        raise IncompleteGrid(f"no partition description at {path}")
    return GridPartition.from_json(json.loads(path.read_text()))


def read_fragments(path, partition: Optional[GridPartition] = None):
    """Load ``partition.json`` and every fragment CSV next to it."""
    directory = Path(path)
    if directory.is_file():
        directory = directory.parent
    partition = partition or read_partition(directory)
    parts = {}
    for pid in partition.party_ids():
        fpath = directory / fragment_filename(pid)
        if not fpath.exists():
            raise IncompleteGrid(f"fragment {fpath.name} is missing")
        frame = pd.read_csv(fpath, dtype=str, keep_default_na=False)
        rows = tuple(tuple(str(v) for v in record) for record in frame.itertuples(index=False))
        parts[pid] = Fragment(pid, tuple(frame.columns), rows)
    return partition, parts
