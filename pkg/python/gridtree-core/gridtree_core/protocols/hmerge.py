"""Grid ID3 that first merges horizontally, then develops vertically.

Within each vertical group the h parties unite their tuple sets with the
secure union, encrypting under per-layer keys shared across groups. The
encrypted unions of different groups can then be intersected directly, so a
group representative obtains exact counts without further set protocols.
"""

from typing import Dict

from ..id3 import ClassHistogram, info_gain
from ..partynet import PartyId
from ..smpc import (
    ClassVerdict,
    CommutativeGroup,
    FixedPointRing,
    Share,
    all_zero_except_one_circuit,
    argmax_circuit,
    generate_key,
    ideal_circuit_eval,
    is_zero_circuit,
    secure_union_encrypted,
)
from .grid import GridDriver


class HMergeDriver(GridDriver):
    strategy = "grid-hmerge"

    def setup(self):
        super().setup()
        group = CommutativeGroup.generate(self.net.key_bits, self.net.seed)
        self.layer_keys = [generate_key(group, self.net.rng) for _ in range(self.h)]
        for pid in self.all_parties:
            self.store(pid)["layer_key"] = self.layer_keys[pid.j - 1]
        self._merged: Dict[tuple, dict] = {}

    def union(self, group: int, sets, tag):
        parties = self.partition.group_parties(group)
        return secure_union_encrypted(
            self.net, parties, sets, self.pad, keys=self.layer_keys, min_parties=2, tag=tag
        ).ciphertexts

    def ship(self, sender: PartyId, receiver: PartyId, ciphertexts, tag="union"):
        bits = max(1, len(ciphertexts)) * self.net.key_bits
        return self.net.transfer(sender, receiver, ciphertexts, bits, tag)

    def merged(self, ctx, path):
        """Encrypted context unions per group and per class, plus the class rep's counts."""
        if path in self._merged:
            return self._merged[path]
        class_rep = self.rep(self.v)
        with self.net.section("merge"):
            unions = {
                i: self.union(i, [ctx[p] for p in self.partition.group_parties(i)], f"context{i}")
                for i in range(1, self.v + 1)
            }
            by_class = {
                c: self.union(
                    self.v,
                    [self.filtered(ctx, p, self.class_attr, value) for p in self.class_holders],
                    f"class{c}",
                )
                for c, value in enumerate(self.class_domain)
            }
            received = {}
            for i in range(1, self.v):
                received[i] = self.ship(self.rep(i), class_rep, unions[i])
            self.net.tick()
        received[self.v] = unions[self.v]
        common = frozenset.intersection(*received.values())
        merged = {
            "unions": unions,
            "classes": by_class,
            "n": len(common),
            "n_c": {c: len(common & members) for c, members in by_class.items()},
        }
        self._merged[path] = merged
        return merged

    def is_empty(self, ctx, path):
        class_rep = self.rep(self.v)
        n = self.merged(ctx, path)["n"]
        with self.net.section("empty"):
            out = ideal_circuit_eval(
                self.net, is_zero_circuit([class_rep], self.all_parties), {class_rep: n}
            )
        return out[class_rep]

    def majority(self, ctx, path):
        class_rep = self.rep(self.v)
        n_c = self.merged(ctx, path)["n_c"]
        with self.net.section("majority"):
            spec = argmax_circuit([class_rep], self.class_holders)
            out = ideal_circuit_eval(
                self.net, spec, {class_rep: {"scores": dict(n_c), "ranks": {c: c for c in n_c}}}
            )
        return self.class_domain[out[class_rep]]

    def class_test(self, ctx, path):
        class_rep = self.rep(self.v)
        n_c = self.merged(ctx, path)["n_c"]
        with self.net.section("class_test"):
            spec = all_zero_except_one_circuit(
                [class_rep], self.all_parties, reveal=self.reveal_class
            )
            out = ideal_circuit_eval(self.net, spec, {class_rep: {"scores": dict(n_c)}})
        index = out[class_rep]
        if index is None:
            return ClassVerdict(False)
        return ClassVerdict(True, self.class_domain[index])

    def best_attribute(self, ctx, remaining, path):
        merged = self.merged(ctx, path)
        unions, by_class = merged["unions"], merged["classes"]
        class_rep = self.rep(self.v)
        ring = FixedPointRing(self.configuration.fixed_point_bits, 64)
        inputs = {}
        for g in range(1, self.v + 1):
            if not remaining[g]:
                continue
            rep = self.rep(g)
            with self.net.section(f"group{g}"):
                others = {}
                for i in range(1, self.v + 1):
                    if i == g:
                        continue
                    holder = class_rep if i < self.v and g == self.v else self.rep(i)
                    others[i] = self.ship(holder, rep, unions[i])
                classes = {
                    c: self.ship(class_rep, rep, members, "classes")
                    for c, members in by_class.items()
                }
                self.net.tick()
                common = frozenset.intersection(*others.values())
                node_members = unions[g] & common
                parent = ClassHistogram.of(
                    {str(c): len(node_members & members) for c, members in classes.items()}
                )
                positions = self.store(rep)["positions"]
                scores, ranks = {}, {}
                for index, attribute in enumerate(self.group_attrs[g]):
                    if attribute not in remaining[g]:
                        continue
                    children = []
                    for ordinal, value in enumerate(self.domain(rep, attribute)):
                        sets = [
                            self.filtered(ctx, p, attribute, value)
                            for p in self.partition.group_parties(g)
                        ]
                        branch = self.union(g, sets, f"value{index}.{ordinal}") & common
                        children.append(
                            ClassHistogram.of(
                                {str(c): len(branch & members) for c, members in classes.items()}
                            )
                        )
                    gain = info_gain(parent, children)
                    candidate = (g, index)
                    scores[candidate] = Share(ring.encode(gain), ring, rep)
                    ranks[candidate] = positions[attribute]
                inputs[rep] = {"scores": scores, "ranks": ranks}
        spec = argmax_circuit(
            list(inputs), self.all_parties, tolerance=ring.ulp, reveal=self.reveal_candidate
        )
        return self.winner(ideal_circuit_eval(self.net, spec, inputs))
