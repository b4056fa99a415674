"""Set protocols on commutatively encrypted, padded item sets.

All three protocols share four phases: padding with dummies, encryption
around the ring by every party, collection at parties 0 and 1, and (for the
union) a decryption chain.
"""

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Union

from traitlets.log import get_logger

from ..errors import PaddingOverflow, TooFewParties
from ..partynet import Network, PartyId, payload_bits
from .cipher import CommutativeGroup, CommutativeKey, ItemKind, generate_key, hash_into_group


class Marker(Enum):
    BOTTOM = "bottom"
    ABSTAIN = "abstain"


BOTTOM = Marker.BOTTOM
ABSTAIN = Marker.ABSTAIN


@dataclass(frozen=True)
class PaddedItemSet:
    real: FrozenSet[int]
    dummies: FrozenSet[int]
    agreed_size: int

    def __post_init__(self):
        if len(self.real) + len(self.dummies) != self.agreed_size:
            raise PaddingOverflow("padded set does not match the agreed size")
        if self.real & self.dummies:
            raise PaddingOverflow("dummy item collides with a real item")

    @property
    def items(self) -> List[int]:
        return sorted(self.real | self.dummies)

    @classmethod
    def pad(
        cls,
        group: CommutativeGroup,
        items: Iterable[str],
        agreed_size: int,
        rng,
        hashed: bool = False,
    ):
        encode = (lambda item: hash_into_group(group, item)) if hashed else group.encode
        real = frozenset(encode(item) for item in set(items))
        if len(real) > agreed_size:
            raise PaddingOverflow(f"{len(real)} items exceed the agreed size {agreed_size}")
        dummies = set()
        while len(dummies) < agreed_size - len(real):
            candidate = group.dummy(rng)
            if candidate not in real:
                dummies.add(candidate)
        return cls(real, frozenset(dummies), agreed_size)


@dataclass(frozen=True)
class EncryptedUnion:
    """Union of padded sets encrypted under every party's key, held by ``holder``."""

    holder: PartyId
    ciphertexts: FrozenSet[int]

    def __len__(self):
        return len(self.ciphertexts)


@dataclass(frozen=True)
class ClassVerdict:
    uniform: bool
    value: Optional[str] = None


class SetSession:
    """Parties, keys and the group of one run of a set protocol."""

    def __init__(
        self,
        net: Network,
        parties: Sequence[PartyId],
        group: Optional[CommutativeGroup] = None,
        keys: Optional[Sequence[CommutativeKey]] = None,
        min_parties: int = 3,
    ):
        if len(parties) < min_parties:
            raise TooFewParties(
                f"set protocols need at least {min_parties} parties, got {len(parties)}"
            )
        if len(parties) == 2:
            get_logger().debug(
                "two-party set protocol between %s and %s: each learns the other's set size",
                *parties,
            )
        self.net = net
        self.parties = list(parties)
        self.group = group or (keys[0].group if keys else _default_group(net))
        if keys is None:
            keys = [generate_key(self.group, net.party(pid).rng) for pid in self.parties]
        self.keys = list(keys)

    @property
    def k(self):
        return len(self.parties)

    def set_bits(self, items) -> int:
        return max(1, len(items)) * self.group.bits

    def encrypt(self, position: int, items) -> List[int]:
        key = self.keys[position]
        self.net.charge(self.parties[position], cipher_ops=len(items))
        return sorted(key.encrypt(x) for x in items)

    def decrypt(self, position: int, items) -> List[int]:
        key = self.keys[position]
        self.net.charge(self.parties[position], cipher_ops=len(items))
        return sorted(key.decrypt(x) for x in items)

    def pad(self, sets, agreed_size, hashed=False) -> List[PaddedItemSet]:
        return [
            PaddedItemSet.pad(self.group, items, agreed_size, self.net.party(pid).rng, hashed)
            for pid, items in zip(self.parties, sets)
        ]

    def encrypt_around(self, encoded: Sequence[Sequence[int]]) -> List[List[int]]:
        """Every set travels the ring once; each party encrypts what it receives.

        Afterwards party ``idx`` holds the set that started at ``idx + 1``.
        """
        net, k = self.net, self.k
        current = {idx: self.encrypt(idx, encoded[idx]) for idx in range(k)}
        with net.section("encrypt"):
            for _ in range(k - 1):
                moved = {}
                for idx in range(k):
                    dst = (idx + 1) % k
                    payload = net.transfer(
                        self.parties[idx], self.parties[dst], current[idx],
                        self.set_bits(current[idx]), "ciphertexts",
                    )
                    moved[dst] = self.encrypt(dst, payload)
                current = moved
                net.tick()
        return [current[idx] for idx in range(k)]

    def collect(self, held: Sequence[List[int]]) -> Dict[int, List[List[int]]]:
        """Even positions send to party 0, odd ones and the last party to party 1."""
        net, k = self.net, self.k
        collected: Dict[int, List[List[int]]] = {0: [held[0]], 1: [held[1]]}
        with net.section("collect"):
            for idx in range(2, k):
                dst = 1 if idx == k - 1 or idx % 2 == 1 else 0
                payload = net.transfer(
                    self.parties[idx], self.parties[dst], held[idx],
                    self.set_bits(held[idx]), "ciphertexts",
                )
                collected[dst].append(payload)
            net.tick()
        return collected

    def merge_at_zero(self, collected) -> List[int]:
        net = self.net
        at_one = sorted(set().union(*map(set, collected[1])))
        with net.section("collect"):
            at_one = net.transfer(
                self.parties[1], self.parties[0], at_one, self.set_bits(at_one), "union"
            )
            net.tick()
        return sorted(set(at_one).union(*map(set, collected[0])))

    def decrypt_chain(self, ciphertexts: Sequence[int], tag="decrypt") -> List[int]:
        """Party 0 decrypts first; the value travels to the last party, which ends plain."""
        net = self.net
        values = self.decrypt(0, ciphertexts)
        with net.section(tag):
            for idx in range(1, self.k):
                values = net.transfer(
                    self.parties[idx - 1], self.parties[idx], values, self.set_bits(values),
                    "ciphertexts",
                )
                values = self.decrypt(idx, values)
                net.tick()
        return values


def _default_group(net: Network) -> CommutativeGroup:
    return CommutativeGroup.generate(net.key_bits, net.seed)


def _group_for(net: Network, sets) -> CommutativeGroup:
    group = _default_group(net)
    width = max((len(item.encode("utf-8")) for s in sets for item in s), default=0)
    if width < group.capacity:
        return group
    get_logger().debug("widening the union group for items of %d bytes", width)
    return CommutativeGroup.for_width(width, net.key_bits, net.seed)


def _encrypted_union(session: SetSession, sets, agreed_size, hashed=False) -> List[int]:
    padded = session.pad(sets, agreed_size, hashed)
    held = session.encrypt_around([p.items for p in padded])
    return session.merge_at_zero(session.collect(held))


def secure_union(
    net: Network,
    parties: Sequence[PartyId],
    sets: Sequence[Iterable[str]],
    agreed_size: int,
    *,
    group: Optional[CommutativeGroup] = None,
    keys: Optional[Sequence[CommutativeKey]] = None,
    recipients: Optional[Sequence[PartyId]] = None,
    min_parties: int = 3,
    tag: str = "secure_union",
) -> FrozenSet[str]:
    """Union of the parties' sets, announced by the last party.

    Items are embedded reversibly. Without an explicit group or keys the group
    widens to the longest item, a width the parties announce like the agreed size.
    """
    sets = [set(s) for s in sets]
    if group is None and keys is None:
        group = _group_for(net, sets)
    with net.section(tag):
        session = SetSession(net, parties, group, keys, min_parties)
        union = _encrypted_union(session, sets, agreed_size)
        plain = session.decrypt_chain(union)
        items = sorted(
            value
            for kind, value in map(session.group.decode, plain)
            if kind is ItemKind.REAL
        )
        last = parties[-1]
        targets = [p for p in (parties if recipients is None else recipients) if p != last]
        for receiver in targets:
            net.transfer(last, receiver, items, session.set_bits(items), "announce")
        net.tick()
    return frozenset(items)


def secure_union_encrypted(
    net: Network,
    parties: Sequence[PartyId],
    sets: Sequence[Iterable[str]],
    agreed_size: int,
    *,
    keys: Sequence[CommutativeKey],
    min_parties: int = 3,
    tag: str = "secure_union",
) -> EncryptedUnion:
    """Phases one to three only: party 0 keeps the union still encrypted.

    Items are hashed into the group, so the union can be compared and counted
    but not decrypted back into values.
    """
    with net.section(tag):
        session = SetSession(net, parties, keys=keys, min_parties=min_parties)
        union = _encrypted_union(session, sets, agreed_size, hashed=True)
    return EncryptedUnion(parties[0], frozenset(union))


def secure_intersection_size(
    net: Network,
    parties: Sequence[PartyId],
    sets: Sequence[Iterable[str]],
    agreed_size: int,
    *,
    group: Optional[CommutativeGroup] = None,
    keys: Optional[Sequence[CommutativeKey]] = None,
    recipients: Optional[Sequence[PartyId]] = None,
    min_parties: int = 3,
    tag: str = "secure_intersection_size",
) -> int:
    """Size of the intersection of the real items, told to ``recipients``.

    Runs like the union but party 1 forwards its sets separately, and party 0
    counts the ciphertexts present in all k sets. Dummies are drawn per party
    and never match across sets.
    """
    with net.section(tag):
        session = SetSession(net, parties, group, keys, min_parties)
        padded = session.pad(sets, agreed_size, hashed=True)
        held = session.encrypt_around([p.items for p in padded])
        collected = session.collect(held)
        with net.section("collect"):
            forwarded = net.transfer(
                parties[1], parties[0], collected[1],
                session.set_bits([x for s in collected[1] for x in s]), "sets",
            )
            net.tick()
        counts = Counter(x for s in collected[0] + list(forwarded) for x in set(s))
        size = sum(1 for n in counts.values() if n == session.k)
        targets = [p for p in (recipients or ()) if p != parties[0]]
        for receiver in targets:
            net.transfer(parties[0], receiver, size, payload_bits(size), "announce")
        net.tick()
    return size


def secure_union_class_variant(
    net: Network,
    parties: Sequence[PartyId],
    inputs: Sequence[Union[str, Marker]],
    *,
    group: Optional[CommutativeGroup] = None,
    keys: Optional[Sequence[CommutativeKey]] = None,
    labels: Optional[Sequence[str]] = None,
    min_parties: int = 3,
    tag: str = "class_test",
) -> ClassVerdict:
    """Decide whether all parties that hold tuples hold one and the same class.

    Each party inputs its sole class value, ``BOTTOM`` when it sees several,
    or ``ABSTAIN`` when it holds no tuples. The abstention marker is encrypted
    jointly and discarded by party 0 before the distinct values are counted.
    Values are hashed into the group; a revealed value is looked up among
    ``labels``, the agreed class domain, which defaults to the values input.
    """
    if labels is None:
        labels = sorted({v for v in inputs if not isinstance(v, Marker)})
    with net.section(tag):
        session = SetSession(net, parties, group, keys, min_parties)
        grp = session.group

        def encode(value):
            if value is BOTTOM:
                return hash_into_group(grp, "", ItemKind.BOTTOM)
            if value is ABSTAIN:
                return hash_into_group(grp, "", ItemKind.ABSTAIN)
            return hash_into_group(grp, value)

        held = session.encrypt_around([[encode(value)] for value in inputs])
        distinct = session.merge_at_zero(session.collect(held))

        marker = session.encrypt(0, [encode(ABSTAIN)])
        with net.section("marker"):
            for idx in range(1, session.k):
                marker = net.transfer(
                    parties[idx - 1], parties[idx], marker, session.set_bits(marker),
                    "ciphertexts",
                )
                marker = session.encrypt(idx, marker)
                net.tick()
            marker = net.transfer(
                parties[-1], parties[0], marker, session.set_bits(marker), "ciphertexts"
            )
            net.tick()
        remaining = [x for x in distinct if x not in marker]

        if len(remaining) != 1:
            verdict = ClassVerdict(False)
        elif inputs[0] is not ABSTAIN:
            own = inputs[0]
            verdict = ClassVerdict(False) if own is BOTTOM else ClassVerdict(True, own)
        else:
            plain = session.decrypt_chain(remaining, tag="reveal")
            known = {encode(label): label for label in labels}
            value = known.get(plain[0])
            value = net.transfer(parties[-1], parties[0], value, session.set_bits(plain), "reveal")
            verdict = ClassVerdict(False) if value is None else ClassVerdict(True, value)

        announced = ["uniform", verdict.value] if verdict.uniform else ["not_uniform"]
        for receiver in parties[1:]:
            net.transfer(parties[0], receiver, announced, payload_bits(announced), "verdict")
        net.tick()
    return verdict
