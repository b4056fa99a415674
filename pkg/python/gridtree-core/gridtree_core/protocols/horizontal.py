"""ID3 over horizontally partitioned data with more than two parties."""

from ..errors import ConfigError, TooFewParties
from ..smpc import (
    ABSTAIN,
    BOTTOM,
    Share,
    argmax_circuit,
    ideal_circuit_eval,
    secure_union_class_variant,
    x_ln_x,
    xlnx_ring,
)
from .base import ProtocolDriver


class HorizontalDriver(ProtocolDriver):
    """Every party holds every attribute and the class for its own tuples.

    Counts are summed with the secure sum, leaving Σ + r at the last party
    and r multiplied by -1 at the first, which both feed the x ln x protocol.
    """

    strategy = "horizontal"

    def validate(self):
        if self.v != 1:
            raise ConfigError("the horizontal protocol needs a partition with v = 1")
        if self.h <= 2:
            raise TooFewParties(f"the horizontal protocol needs more than 2 parties, got {self.h}")

    @property
    def parties(self):
        return self.partition.group_parties(1)

    def count_shares(self, counts):
        return self.sum_shares(self.parties, counts, self.counts)

    def is_empty(self, ctx, path):
        with self.net.section("empty"):
            return self.zero_test(self.parties, [len(ctx[p]) for p in self.parties], self.counts)

    def attributes_exhausted(self, remaining):
        return not remaining[1]

    def class_counts(self, ctx, pid):
        column = self.column(pid, self.class_attr)
        return [sum(1 for t in ctx[pid] if column[t] == c) for c in self.class_domain]

    def majority(self, ctx, path):
        alice, bob = self.parties[-1], self.parties[0]
        local = {pid: self.class_counts(ctx, pid) for pid in self.parties}
        scores_a, scores_b = {}, {}
        with self.net.section("majority"):
            for c in range(len(self.class_domain)):
                last, first = self.count_shares([local[pid][c] for pid in self.parties])
                scores_a[c], scores_b[c] = last, first
            ranks = {c: c for c in scores_b}
            spec = argmax_circuit([alice, bob], self.parties)
            out = ideal_circuit_eval(
                self.net,
                spec,
                {alice: {"scores": scores_a}, bob: {"scores": scores_b, "ranks": ranks}},
            )
        return self.class_domain[out[bob]]

    def class_test(self, ctx, path):
        inputs = []
        for pid in self.parties:
            column = self.column(pid, self.class_attr)
            present = {column[t] for t in ctx[pid]}
            if not present:
                inputs.append(ABSTAIN)
            elif len(present) == 1:
                inputs.append(present.pop())
            else:
                inputs.append(BOTTOM)
        return secure_union_class_variant(
            self.net, self.parties, inputs, labels=self.class_domain
        )

    def best_attribute(self, ctx, remaining, path):
        alice, bob = self.parties[-1], self.parties[0]
        config = self.configuration
        ring = xlnx_ring(self.counts, config.fixed_point_bits)
        scores_a, scores_b, ranks = {}, {}, {}
        positions = self.store(bob)["positions"]
        for index, attribute in enumerate(self.group_attrs[1]):
            if attribute not in remaining[1]:
                continue
            acc_a = acc_b = 0
            for value in self.domain(bob, attribute):
                branch = {pid: self.filtered(ctx, pid, attribute, value) for pid in self.parties}
                terms = [(-1, [len(branch[pid]) for pid in self.parties])]
                for c in self.class_domain:
                    labelled = [
                        len(self.filtered(branch, pid, self.class_attr, c)) for pid in self.parties
                    ]
                    terms.append((1, labelled))
                for sign, counts in terms:
                    x_a, x_b = self.count_shares(counts)
                    s_a, s_b = x_ln_x(
                        self.net, x_a, x_b, config.taylor_terms,
                        frac_bits=config.fixed_point_bits, zero_ok=True,
                    )
                    acc_a += sign * s_a.value
                    acc_b += sign * s_b.value
            candidate = (1, index)
            scores_a[candidate] = Share(acc_a % ring.modulus, ring, alice)
            scores_b[candidate] = Share(acc_b % ring.modulus, ring, bob)
            ranks[candidate] = positions[attribute]
        spec = argmax_circuit([alice, bob], self.parties, tolerance=self.score_tolerance)
        out = ideal_circuit_eval(
            self.net, spec, {alice: {"scores": scores_a}, bob: {"scores": scores_b, "ranks": ranks}}
        )
        return out[bob]
