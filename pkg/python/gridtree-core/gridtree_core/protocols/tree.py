"""Distributed decision trees: a public skeleton plus per-party private payloads."""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple, Union

from ..errors import DanglingNode, Forbidden, IncompleteGrid, UnseenValue
from ..id3 import Interior, Leaf, PlainTree
from ..partynet import Network, PartyId, payload_bits

SKELETON_FILE = "skeleton.json"

LEAF = "leaf"
INTERIOR = "interior"


@dataclass(frozen=True)
class SkeletonNode:
    """Public part of a node: identifier, owning vertical group and children."""

    node_id: str
    owner: int
    kind: str
    children: Tuple[str, ...] = ()

    def to_json(self):
        return {
            "nodeID": self.node_id,
            "owner": {"group": self.owner},
            "kind": self.kind,
            "children": list(self.children),
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            data["nodeID"], int(data["owner"]["group"]), data["kind"], tuple(data["children"])
        )


@dataclass(frozen=True)
class InteriorPayload:
    attribute: str
    branches: Dict[str, str] = field(hash=False)

    def to_json(self):
        return {"kind": INTERIOR, "attribute": self.attribute, "branches": dict(self.branches)}


@dataclass(frozen=True)
class LeafPayload:
    label: str

    def to_json(self):
        return {"kind": LEAF, "class": self.label}


Payload = Union[InteriorPayload, LeafPayload]


def payload_from_json(data) -> Payload:
    if data["kind"] == LEAF:
        return LeafPayload(data["class"])
    return InteriorPayload(data["attribute"], dict(data["branches"]))


def payload_filename(pid: PartyId) -> str:
    return f"payload_{pid.i}_{pid.j}.json"


class DistributedTree:
    def __init__(
        self,
        run_id: str,
        root: str,
        nodes: Mapping[str, SkeletonNode],
        payloads: Mapping[PartyId, Dict[str, Payload]],
        v: int,
        h: int,
    ):
        self.run_id = run_id
        self.root = root
        self.nodes = dict(nodes)
        self.payloads = payloads
        self.v = v
        self.h = h

    def __len__(self):
        return len(self.nodes)

    def node(self, node_id: str) -> SkeletonNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise DanglingNode(f"no node {node_id!r} in the skeleton") from None

    def party_ids(self):
        return [PartyId(i, j) for i in range(1, self.v + 1) for j in range(1, self.h + 1)]

    def skeleton_json(self):
        return {
            "run": self.run_id,
            "root": self.root,
            "v": self.v,
            "h": self.h,
            "nodes": [node.to_json() for node in self.nodes.values()],
        }

    def payload_json(self, pid: PartyId):
        held = self.payloads.get(pid, {})
        return {
            "party": pid.to_json(),
            "nodes": {node_id: payload.to_json() for node_id, payload in held.items()},
        }

    def save(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / SKELETON_FILE).write_text(json.dumps(self.skeleton_json(), indent=2) + "\n")
        for pid in self.party_ids():
            path = out / payload_filename(pid)
            path.write_text(json.dumps(self.payload_json(pid), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, out_dir) -> "DistributedTree":
        out = Path(out_dir)
        skeleton_path = out / SKELETON_FILE
        if not skeleton_path.exists():
            raise IncompleteGrid(f"no tree skeleton at {skeleton_path}")
        skeleton = json.loads(skeleton_path.read_text())
        nodes = {}
        for data in skeleton["nodes"]:
            node = SkeletonNode.from_json(data)
            nodes[node.node_id] = node
        tree = cls(skeleton["run"], skeleton["root"], nodes, {}, skeleton["v"], skeleton["h"])
        payloads = {}
        for pid in tree.party_ids():
            path = out / payload_filename(pid)
            if not path.exists():
                raise IncompleteGrid(f"payload file {path.name} is missing")
            try:
                data = json.loads(path.read_text())
                payloads[pid] = {k: payload_from_json(p) for k, p in data["nodes"].items()}
            except (ValueError, KeyError, TypeError) as e:
                raise IncompleteGrid(f"payload file {path.name} is unreadable: {e}") from None
        tree.payloads = payloads
        return tree

    def _payload(self, node: SkeletonNode) -> Payload:
        for j in range(1, self.h + 1):
            held = self.payloads.get(PartyId(node.owner, j), {})
            if node.node_id in held:
                return held[node.node_id]
        raise DanglingNode(f"no party of group {node.owner} holds node {node.node_id!r}")


def classify_distributed(
    tree: DistributedTree,
    net: Network,
    row_parts: Mapping[PartyId, Mapping[str, str]],
    start: Optional[str] = None,
) -> str:
    """Walk the tree with a tuple spread over one horizontal layer.

    ``row_parts`` maps each party of the layer to its own attribute values.
    Control starts at the party of the root's owner group and is handed on,
    by node identifier only, whenever the next node has another owner.
    """
    layers = {pid.j for pid in row_parts}
    if len(layers) != 1:
        raise UnseenValue("a tuple must be held by the parties of exactly one layer")
    (j,) = layers
    current = start or tree.root
    holder = None
    with net.section("classify"):
        while True:
            node = tree.node(current)
            owner = PartyId(node.owner, j)
            if holder is not None and owner != holder:
                current = net.transfer(holder, owner, current, payload_bits(current), "control")
                net.tick()
            holder = owner
            payload = tree.payloads.get(owner, {}).get(current)
            if payload is None:
                raise DanglingNode(f"{owner} holds no payload for node {current!r}")
            if isinstance(payload, LeafPayload):
                return payload.label
            value = row_parts.get(owner, {}).get(payload.attribute)
            if value is None or value not in payload.branches:
                raise UnseenValue(f"no branch for the value held by {owner} at {current!r}")
            current = payload.branches[value]


def render_plaintext(tree: DistributedTree, test_mode: bool = False) -> PlainTree:
    """Combine every party's payloads into a plaintext tree (test harness only)."""
    if not test_mode:
        raise Forbidden("rendering a distributed tree needs every party and test mode")

    def walk(node_id):
        node = tree.node(node_id)
        payload = tree._payload(node)
        if isinstance(payload, LeafPayload):
            return Leaf(payload.label)
        return Interior(
            payload.attribute,
            {value: walk(child) for value, child in payload.branches.items()},
        )

    return walk(tree.root)


def render_skeleton(tree: DistributedTree):
    """Nested view of the public skeleton; nodes carry no attribute or class."""

    def walk(node_id):
        node = tree.node(node_id)
        return {
            "nodeID": node.node_id,
            "owner": node.owner,
            "kind": node.kind,
            "children": [walk(child) for child in node.children],
        }

    return walk(tree.root)
