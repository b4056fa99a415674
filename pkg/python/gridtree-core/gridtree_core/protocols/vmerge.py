"""Grid ID3 that first merges vertically, then develops horizontally.

The v parties of each horizontal layer compute intersection sizes of their
tuple sets; the class holder of the layer learns them. The class holders of
all layers then add their counts with the secure sum, which leaves the total
shared between the last and the first layer's class holder.
"""

from typing import Dict

from ..partynet import PartyId
from ..smpc import (
    ClassVerdict,
    Share,
    all_zero_except_one_circuit,
    argmax_circuit,
    ideal_circuit_eval,
    is_zero_circuit,
    secure_intersection_size,
    x_ln_x,
    xlnx_ring,
)
from .grid import GridDriver


class VMergeDriver(GridDriver):
    strategy = "grid-vmerge"

    def setup(self):
        super().setup()
        self._totals: Dict[tuple, dict] = {}

    @property
    def alice(self) -> PartyId:
        return PartyId(self.v, self.h)

    @property
    def bob(self) -> PartyId:
        return PartyId(self.v, 1)

    def layer_order(self, j):
        """Class holder first, so the party that counts is the one that learns the count."""
        return [PartyId(self.v, j)] + [PartyId(i, j) for i in range(1, self.v)]

    def shared_count(self, sets_for_layer, tag):
        """Shares of the number of tuples in the intersection, summed over all layers."""
        per_layer = []
        with self.net.section(tag):
            for j in range(1, self.h + 1):
                order = self.layer_order(j)
                per_layer.append(
                    secure_intersection_size(
                        self.net, order, sets_for_layer(j, order), self.pad,
                        recipients=[order[0]], min_parties=2, tag="count",
                    )
                )
            return self.sum_shares(self.class_holders, per_layer, self.counts)

    def totals(self, ctx, path):
        """Shares of N and of every N_c at this node, computed once per node."""
        if path in self._totals:
            return self._totals[path]
        with self.net.section("merge"):
            n = self.shared_count(lambda j, order: [ctx[p] for p in order], "context")
            n_c = {}
            for c, value in enumerate(self.class_domain):
                n_c[c] = self.shared_count(
                    lambda j, order, value=value: [
                        self.filtered(ctx, order[0], self.class_attr, value),
                        *(ctx[p] for p in order[1:]),
                    ],
                    f"class{c}",
                )
        self._totals[path] = {"n": n, "n_c": n_c}
        return self._totals[path]

    def is_empty(self, ctx, path):
        last, first = self.totals(ctx, path)["n"]
        with self.net.section("empty"):
            spec = is_zero_circuit([last.owner, first.owner], self.all_parties)
            out = ideal_circuit_eval(self.net, spec, {last.owner: last, first.owner: first})
        return out[self.bob]

    def _class_inputs(self, n_c, ranks=False):
        inputs = {
            self.alice: {"scores": {c: pair[0] for c, pair in n_c.items()}},
            self.bob: {"scores": {c: pair[1] for c, pair in n_c.items()}},
        }
        if ranks:
            inputs[self.bob]["ranks"] = {c: c for c in n_c}
        return inputs

    def majority(self, ctx, path):
        n_c = self.totals(ctx, path)["n_c"]
        with self.net.section("majority"):
            spec = argmax_circuit([self.alice, self.bob], self.class_holders)
            out = ideal_circuit_eval(self.net, spec, self._class_inputs(n_c, ranks=True))
        return self.class_domain[out[self.bob]]

    def class_test(self, ctx, path):
        n_c = self.totals(ctx, path)["n_c"]
        with self.net.section("class_test"):
            spec = all_zero_except_one_circuit(
                [self.alice, self.bob], self.all_parties, reveal=self.reveal_class
            )
            out = ideal_circuit_eval(self.net, spec, self._class_inputs(n_c))
        index = out[self.bob]
        if index is None:
            return ClassVerdict(False)
        return ClassVerdict(True, self.class_domain[index])

    def best_attribute(self, ctx, remaining, path):
        config = self.configuration
        ring = xlnx_ring(self.counts, config.fixed_point_bits)
        alice, bob = self.alice, self.bob
        inputs = {alice: {"scores": {}}, bob: {"scores": {}}}

        def xlnx(pair):
            last, first = pair
            return x_ln_x(
                self.net, last, first, config.taylor_terms,
                frac_bits=config.fixed_point_bits, zero_ok=True,
            )

        for g in range(1, self.v + 1):
            if not remaining[g]:
                continue
            rep = self.rep(g)
            positions = self.store(rep)["positions"]
            ranks = inputs.setdefault(rep, {}).setdefault("ranks", {})
            for index, attribute in enumerate(self.group_attrs[g]):
                if attribute not in remaining[g]:
                    continue
                acc_a = acc_b = 0
                with self.net.section(f"attr{g}.{index}"):
                    for ordinal, value in enumerate(self.domain(rep, attribute)):

                        def branch(j, order, value=value, class_value=None):
                            sets = []
                            for p in order:
                                members = ctx[p]
                                if p.i == g:
                                    members = self.filtered(ctx, p, attribute, value)
                                if p.i == self.v and class_value is not None:
                                    column = self.column(p, self.class_attr)
                                    members = frozenset(
                                        t for t in members if column[t] == class_value
                                    )
                                sets.append(members)
                            return sets

                        terms = [(-1, self.shared_count(branch, f"value{ordinal}"))]
                        for c, class_value in enumerate(self.class_domain):
                            terms.append(
                                (
                                    1,
                                    self.shared_count(
                                        lambda j, order, cv=class_value: branch(
                                            j, order, class_value=cv
                                        ),
                                        f"value{ordinal}.class{c}",
                                    ),
                                )
                            )
                        for sign, pair in terms:
                            s_a, s_b = xlnx(pair)
                            acc_a += sign * s_a.value
                            acc_b += sign * s_b.value
                candidate = (g, index)
                inputs[alice]["scores"][candidate] = Share(acc_a % ring.modulus, ring, alice)
                inputs[bob]["scores"][candidate] = Share(acc_b % ring.modulus, ring, bob)
                ranks[candidate] = positions[attribute]
        spec = argmax_circuit(
            list(inputs),
            self.all_parties,
            tolerance=self.score_tolerance,
            reveal=self.reveal_candidate,
        )
        return self.winner(ideal_circuit_eval(self.net, spec, inputs))
