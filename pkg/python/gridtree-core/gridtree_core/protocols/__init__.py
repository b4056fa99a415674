"""Privacy-preserving ID3 protocols and distributed classification."""

from typing import Mapping, NamedTuple, Optional

from ..configuration import GridTreeConfiguration
from ..dataset import Fragment, GridPartition
from ..errors import ConfigError
from ..partynet import Network, PartyId, Transcript, run_protocol
from .audit import Finding, audit_visibility  # noqa: F401
from .hmerge import HMergeDriver
from .horizontal import HorizontalDriver
from .tree import (  # noqa: F401
    DistributedTree,
    InteriorPayload,
    LeafPayload,
    SkeletonNode,
    classify_distributed,
    render_plaintext,
    render_skeleton,
)
from .vmerge import VMergeDriver

DRIVERS = {
    "horizontal": HorizontalDriver,
    "grid-hmerge": HMergeDriver,
    "grid-vmerge": VMergeDriver,
}


class Induction(NamedTuple):
    tree: DistributedTree
    network: Network
    transcript: Transcript


def induce(
    strategy: str,
    partition: GridPartition,
    parts: Mapping[PartyId, Fragment],
    configuration: Optional[GridTreeConfiguration] = None,
) -> Induction:
    """Run one protocol over the fragments and return the tree, network and transcript."""
    if strategy not in DRIVERS:
        raise ConfigError(f"unknown strategy {strategy!r}, pick one of {sorted(DRIVERS)}")
    configuration = configuration or GridTreeConfiguration()
    tuple_bound = sum(len(parts[pid].rows) for pid in partition.group_parties(1))

    def program(net):
        driver = DRIVERS[strategy](net, partition, parts, configuration, parent=configuration)
        return driver.run(), net

    (tree, net), transcript = run_protocol(
        partition,
        program,
        seed=configuration.seed,
        key_bits=configuration.key_bits,
        tuple_bound=tuple_bound,
        parent=configuration,
    )
    return Induction(tree, net, transcript)


def ppid3_horizontal(partition, parts, configuration=None) -> DistributedTree:
    return induce("horizontal", partition, parts, configuration).tree


def ppid3_grid_hmerge(partition, parts, configuration=None) -> DistributedTree:
    return induce("grid-hmerge", partition, parts, configuration).tree


def ppid3_grid_vmerge(partition, parts, configuration=None) -> DistributedTree:
    return induce("grid-vmerge", partition, parts, configuration).tree
