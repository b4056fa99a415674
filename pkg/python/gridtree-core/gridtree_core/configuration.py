#############################################################################
# Copyright (c) 2024, gridtree contributors                                 #
#                                                                           #
# Distributed under the terms of the BSD 3-Clause License.                  #
#############################################################################

import math
import os

from traitlets import Bool, Enum, Float, Int, default, validate
from traitlets.config import Configurable

from .errors import ConfigError

STRATEGIES = ("horizontal", "grid-hmerge", "grid-vmerge")


class GridTreeConfiguration(Configurable):
    """Tunables shared by the protocols, the scheduler and the cost report."""

    seed = Int(
        help="Seed of the deterministic randomness of a protocol run. "
        "Falls back to the GRIDTREE_SEED environment variable.",
    ).tag(config=True)

    key_bits = Int(
        128,
        help="Bit length t of the safe prime used by the commutative cipher.",
    ).tag(config=True)

    taylor_terms = Int(
        10,
        help="Number n of Taylor terms in the ln(x) circuit.",
    ).tag(config=True)

    fixed_point_bits = Int(
        20,
        help="Fractional bits f of fixed-point shares.",
    ).tag(config=True)

    n_splits = Int(
        1,
        help="Number of parts each input is split into for the secure sum. "
        "1 runs the plain ring protocol.",
    ).tag(config=True)

    agreed_size = Int(
        0,
        help="Padded size of every item set in the set protocols. "
        "0 derives it from pad_policy.",
    ).tag(config=True)

    pad_policy = Enum(
        ["fragment", "total"],
        default_value="fragment",
        help="How the padded item-set size is agreed when agreed_size is 0: "
        "the largest fragment tuple count, or the total tuple count |T|.",
    ).tag(config=True)

    xlnx_tolerance = Float(
        1e-3,
        help="Absolute tolerance of the reconstructed x ln x value.",
    ).tag(config=True)

    test_mode = Bool(
        False,
        help="Allow all-party cooperation hooks such as rendering a distributed "
        "tree in plaintext.",
    ).tag(config=True)

    @default("seed")
    def _default_seed(self):
        return int(os.environ.get("GRIDTREE_SEED", "0"))

    @validate("key_bits")
    def _valid_key_bits(self, proposal):
        if proposal["value"] < 32:
            raise ConfigError(f"key_bits must be at least 32, got {proposal['value']}")
        return proposal["value"]

    @validate("taylor_terms", "n_splits")
    def _valid_positive(self, proposal):
        if proposal["value"] < 1:
            raise ConfigError(f"{proposal['trait'].name} must be >= 1")
        return proposal["value"]

    @validate("fixed_point_bits")
    def _valid_fixed_point_bits(self, proposal):
        if not 4 <= proposal["value"] <= 60:
            raise ConfigError("fixed_point_bits must lie in [4, 60]")
        return proposal["value"]

    @property
    def tau_gain(self):
        """Gain tolerance in bits: ten times the x ln x tolerance, moved to base 2."""
        return 10 * self.xlnx_tolerance / math.log(2)

    def padded_size(self, fragment_sizes, total):
        if self.agreed_size:
            return self.agreed_size
        if self.pad_policy == "total":
            return max(total, 1)
        return max(max(fragment_sizes, default=0), 1)


def check_strategy(strategy: str, v: int, h: int):
    """Reject strategy and grid shape combinations before any protocol runs."""
    if strategy not in STRATEGIES:
        raise ConfigError(f"unknown strategy {strategy!r}, pick one of {list(STRATEGIES)}")
    if strategy == "horizontal" and (v != 1 or h <= 2):
        raise ConfigError(f"horizontal needs v = 1 and h > 2, got v={v}, h={h}")
    if strategy != "horizontal" and (v < 2 or h < 2):
        raise ConfigError(f"{strategy} needs v >= 2 and h >= 2, got v={v}, h={h}")
