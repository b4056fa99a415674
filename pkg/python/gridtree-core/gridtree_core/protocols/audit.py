"""Post-run scan of party state for tokens a party should never have seen."""

import dataclasses
from enum import Enum
from typing import Iterator, List, NamedTuple

from ..dataset import GridPartition, Relation
from ..partynet import Network, PartyId


class Finding(NamedTuple):
    party: PartyId
    token: str
    where: str


def _strings(obj) -> Iterator[str]:
    if isinstance(obj, str):
        yield obj
    elif isinstance(obj, Enum) or obj is None or isinstance(obj, (int, float, bool)):
        return
    elif isinstance(obj, dict):
        for key, value in obj.items():
            yield from _strings(key)
            yield from _strings(value)
    elif isinstance(obj, (list, tuple, set, frozenset)):
        for item in obj:
            yield from _strings(item)
    elif dataclasses.is_dataclass(obj):
        for f in dataclasses.fields(obj):
            yield from _strings(getattr(obj, f.name))


def _allowed(rel: Relation, partition: GridPartition, pid: PartyId):
    own = set(partition.attr_groups[pid.i - 1])
    tokens = set(own)
    for name in own:
        tokens.update(rel.domains[name])
    return tokens


def audit_visibility(net: Network, partition: GridPartition, relation: Relation) -> List[Finding]:
    """Attribute names, values and class labels outside each party's vertical group
    that turn up in its private store or in anything it received."""
    universe = set(relation.non_key_attributes)
    for name in relation.non_key_attributes:
        universe.update(relation.domains[name])
    findings = []
    for pid in partition.party_ids():
        party = net.party(pid)
        foreign = universe - _allowed(relation, partition, pid)
        for key, value in party.store.items():
            findings.extend(
                Finding(pid, s, f"store:{key}") for s in _strings(value) if s in foreign
            )
        for message in party.view:
            findings.extend(
                Finding(pid, s, f"message:{message.tag}")
                for s in _strings(message.payload)
                if s in foreign
            )
    return findings
