"""Shared recursion of the privacy-preserving ID3 protocols.

A driver walks the tree depth first. At every node it asks, in this order,
whether the node's tuple set is empty, whether attributes are left, whether
the class is uniform, and otherwise which attribute splits best. Subclasses
answer each question with their own multi-party subprotocols.
"""

import uuid
from typing import Dict, FrozenSet, Mapping, Optional, Sequence, Tuple

from traitlets.config import LoggingConfigurable

from ..configuration import GridTreeConfiguration
from ..dataset import Fragment, GridPartition
from ..errors import ConfigError
from ..partynet import Network, PartyId
from ..smpc import (
    ClassVerdict,
    SumDomain,
    ideal_circuit_eval,
    is_zero_circuit,
    secure_sum_shares,
    secure_union,
    split_secure_sum_shares,
)
from .tree import INTERIOR, LEAF, DistributedTree, InteriorPayload, LeafPayload, SkeletonNode

Context = Dict[PartyId, FrozenSet[str]]
Candidate = Tuple[int, int]


def path_label(path: Sequence[int]) -> str:
    return ".".join(["r", *map(str, path)])


class ProtocolDriver(LoggingConfigurable):
    strategy = "abstract"

    def __init__(
        self,
        net: Network,
        partition: GridPartition,
        parts: Mapping[PartyId, Fragment],
        configuration: GridTreeConfiguration,
        **kwargs,
    ):
        super().__init__(**kwargs)
        self.net = net
        self.partition = partition
        self.configuration = configuration
        self.v, self.h = partition.v, partition.h
        self.validate()
        self.class_attr = partition.class_attr
        self.total = sum(len(parts[pid].rows) for pid in partition.group_parties(1))
        self.counts = SumDomain.for_count(self.total)
        self.pad = configuration.padded_size([len(f.rows) for f in parts.values()], self.total)
        self.run_id = str(uuid.UUID(int=net.rng.getrandbits(128)))
        self.group_attrs: Dict[int, Tuple[str, ...]] = {}
        self.nodes: Dict[str, SkeletonNode] = {}
        self._majority: Dict[Tuple[int, ...], str] = {}
        self._provision(parts)

    def validate(self):
        raise NotImplementedError

    # party state

    def _provision(self, parts):
        schema = self.partition.schema
        for pid, fragment in parts.items():
            own = tuple(c for c in fragment.columns[1:] if c != self.class_attr)
            holds_class = self.class_attr in fragment.columns
            if holds_class and pid.i != self.v:
                raise ConfigError(f"{pid} holds the class attribute outside group {self.v}")
            self.net.party(pid).store.update(
                fragment=fragment,
                attributes=own,
                positions={a: schema.index(a) for a in own},
                holds_class=holds_class,
                columns={c: fragment.column(c) for c in fragment.columns[1:]},
                domains={},
                tree={},
            )
            self.group_attrs[pid.i] = own
        for j in range(1, self.h + 1):
            if not self.store(PartyId(self.v, j))["holds_class"]:
                raise ConfigError(f"vertical group {self.v} must hold the class attribute")

    def store(self, pid: PartyId):
        return self.net.party(pid).store

    def column(self, pid: PartyId, name: str) -> Dict[str, str]:
        return self.store(pid)["columns"][name]

    def domain(self, pid: PartyId, name: str) -> Tuple[str, ...]:
        return self.store(pid)["domains"][name]

    @property
    def class_domain(self) -> Tuple[str, ...]:
        return self.domain(PartyId(self.v, 1), self.class_attr)

    @property
    def all_parties(self):
        return self.partition.party_ids()

    def root_context(self) -> Context:
        return {pid: frozenset(self.store(pid)["fragment"].ids) for pid in self.all_parties}

    def filtered(self, ctx: Context, pid: PartyId, name: str, value: str) -> FrozenSet[str]:
        column = self.column(pid, name)
        return frozenset(t for t in ctx[pid] if column[t] == value)

    def restrict(self, ctx: Context, group: int, attribute: str, value: str) -> Context:
        child = dict(ctx)
        for pid in self.partition.group_parties(group):
            child[pid] = self.filtered(ctx, pid, attribute, value)
        return child

    # setup

    def setup(self):
        """Every vertical group agrees on the value domains of its columns."""
        for i in range(1, self.v + 1):
            parties = self.partition.group_parties(i)
            columns = list(self.group_attrs[i]) + ([self.class_attr] if i == self.v else [])
            for position, name in enumerate(columns):
                sets = [set(self.column(pid, name).values()) for pid in parties]
                agreed = max(1, max(len(s) for s in sets))
                values = secure_union(
                    self.net, parties, sets, agreed, min_parties=2, tag=f"domain{i}.{position}"
                )
                for pid in parties:
                    self.store(pid)["domains"][name] = tuple(sorted(values))

    # tree bookkeeping

    def node_id(self, path) -> str:
        return f"{self.run_id}:{path_label(path)}"

    def leaf(self, node_id: str, label: str) -> str:
        self.nodes[node_id] = SkeletonNode(node_id, self.v, LEAF)
        for pid in self.partition.group_parties(self.v):
            self.store(pid)["tree"][node_id] = LeafPayload(label)
        return node_id

    def interior(self, node_id: str, group: int, attribute: str, branches: Dict[str, str]) -> str:
        self.nodes[node_id] = SkeletonNode(node_id, group, INTERIOR, tuple(branches.values()))
        for pid in self.partition.group_parties(group):
            self.store(pid)["tree"][node_id] = InteriorPayload(attribute, dict(branches))
        return node_id

    # questions answered by each protocol

    def is_empty(self, ctx: Context, path) -> bool:
        raise NotImplementedError

    def attributes_exhausted(self, remaining: Mapping[int, Tuple[str, ...]]) -> bool:
        raise NotImplementedError

    def majority(self, ctx: Context, path) -> str:
        raise NotImplementedError

    def class_test(self, ctx: Context, path) -> ClassVerdict:
        raise NotImplementedError

    def best_attribute(self, ctx: Context, remaining, path) -> Candidate:
        raise NotImplementedError

    # shared subprotocols

    def sum_shares(self, parties: Sequence[PartyId], values: Sequence[int], domain, tag="sum"):
        """Shares of the sum, held by the last and the first party.

        With ``n_splits`` above 1 and at least three parties every input is split
        and summed over that many rings.
        """
        n_splits = self.configuration.n_splits
        if n_splits > 1 and len(parties) >= 3:
            return split_secure_sum_shares(self.net, parties, values, domain, n_splits, tag=tag)
        return secure_sum_shares(self.net, parties, values, domain, tag=tag)

    def zero_test(self, parties: Sequence[PartyId], values: Sequence[int], domain) -> bool:
        """Whether the private ``values`` sum to zero; everybody learns the answer."""
        last, first = self.sum_shares(parties, values, domain)
        spec = is_zero_circuit([last.owner, first.owner], self.all_parties)
        out = ideal_circuit_eval(self.net, spec, {last.owner: last, first.owner: first})
        return out[self.all_parties[0]]

    def reveal_candidate(self, recipient: PartyId, winner: Candidate):
        """Everybody learns the owner group; only that group learns which attribute."""
        return winner if recipient.i == winner[0] else winner[0]

    @property
    def score_tolerance(self) -> float:
        return self.configuration.xlnx_tolerance / 10

    # recursion

    def run(self) -> DistributedTree:
        with self.net.section(self.strategy):
            with self.net.section("setup"):
                self.setup()
            self.log.debug(
                "%s: setup done after %d messages", self.strategy, len(self.net.transcript)
            )
            remaining = {i: attrs for i, attrs in self.group_attrs.items()}
            root = self.grow(self.root_context(), remaining, (), None)
        self.log.info(
            "%s induced %d nodes over a %dx%d grid", self.strategy, len(self.nodes), self.v, self.h
        )
        payloads = {pid: self.store(pid)["tree"] for pid in self.all_parties}
        return DistributedTree(self.run_id, root, self.nodes, payloads, self.v, self.h)

    def _majority_of(self, ctx, path) -> str:
        if path not in self._majority:
            self._majority[path] = self.majority(ctx, path)
        return self._majority[path]

    def grow(self, ctx: Context, remaining, path, parent: Optional[Tuple[Context, tuple]]) -> str:
        node_id = self.node_id(path)
        with self.net.section(f"node:{path_label(path)}"):
            if parent is not None and self.is_empty(ctx, path):
                return self.leaf(node_id, self._majority_of(*parent))
            if self.attributes_exhausted(remaining):
                return self.leaf(node_id, self._majority_of(ctx, path))
            verdict = self.class_test(ctx, path)
            if verdict.uniform:
                return self.leaf(node_id, verdict.value)
            with self.net.section("default"):
                group, index = self.best_attribute(ctx, remaining, path)
        attribute = self.group_attrs[group][index]
        rest = dict(remaining)
        rest[group] = tuple(a for a in remaining[group] if a != attribute)
        branches = {}
        values = self.domain(PartyId(group, 1), attribute)
        for ordinal, value in enumerate(values):
            child = self.restrict(ctx, group, attribute, value)
            branches[value] = self.grow(child, rest, (*path, ordinal), (ctx, path))
        return self.interior(node_id, group, attribute, branches)
