"""Common ground of the two grid protocols."""

from ..errors import ConfigError
from ..partynet import PartyId
from ..smpc import SumDomain
from .base import ProtocolDriver


class GridDriver(ProtocolDriver):
    """Grid partitions with v, h >= 2; group v holds the class attribute.

    Layer 1 parties act as the representatives of their vertical groups.
    """

    def validate(self):
        if self.v < 2 or self.h < 2:
            raise ConfigError(
                f"{self.strategy} needs v >= 2 and h >= 2, got v={self.v}, h={self.h}"
            )
        if self.partition.group_of(self.partition.class_attr) != self.v:
            raise ConfigError(f"the class attribute must belong to vertical group {self.v}")
        if self.h == 2 or self.v == 2:
            self.log.warning(
                "%s on a %dx%d grid runs two-party set protocols; each side learns the "
                "other's padded set size",
                self.strategy,
                self.v,
                self.h,
            )

    def rep(self, group: int) -> PartyId:
        return PartyId(group, 1)

    @property
    def reps(self):
        return [self.rep(i) for i in range(1, self.v + 1)]

    @property
    def class_holders(self):
        return self.partition.group_parties(self.v)

    def attributes_exhausted(self, remaining):
        domain = SumDomain.for_count(len(self.partition.schema))
        with self.net.section("exhausted"):
            counts = [len(remaining[i]) for i in range(1, self.v + 1)]
            return self.zero_test(self.reps, counts, domain)

    def reveal_class(self, recipient: PartyId, index):
        """Class holders learn the class index, everybody else only that a leaf is reached."""
        if recipient.i == self.v:
            return index
        return index is not None

    def winner(self, outputs):
        """The (group, index) candidate as known to the winning group's representative."""
        seen = outputs[self.all_parties[0]]
        group = seen[0] if isinstance(seen, tuple) else seen
        return outputs[self.rep(group)]
