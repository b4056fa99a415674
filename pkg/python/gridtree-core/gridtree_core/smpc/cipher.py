"""Commutative deterministic encryption by exponentiation modulo a safe prime.

Items are mapped into the subgroup of quadratic residues of Z_p^*, which has
prime order q = (p - 1) / 2, either by hashing (equality tests only) or by a
reversible embedding that needs a group wide enough for the item.
Exponentiation with any exponent coprime to p - 1 permutes that subgroup, and
exponentiations commute.
"""

import hashlib
import random
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache
from typing import Tuple

from sympy import igcd, isprime, mod_inverse

from ..errors import EncodingError


class ItemKind(IntEnum):
    REAL = 1
    DUMMY = 2
    BOTTOM = 3
    ABSTAIN = 4


@lru_cache(maxsize=None)
def make_safe_prime(bits: int, seed: int = 0) -> int:
    """Deterministic safe prime p = 2q + 1 of exactly ``bits`` bits."""
    rng = random.Random(f"safe-prime/{bits}/{seed}")
    while True:
        q = rng.getrandbits(bits - 1) | (1 << (bits - 2)) | 1
        if q % 3 != 2:
            continue
        if isprime(q) and isprime(2 * q + 1):
            return 2 * q + 1


@dataclass(frozen=True)
class CommutativeGroup:
    p: int

    @classmethod
    def generate(cls, bits: int = 128, seed: int = 0) -> "CommutativeGroup":
        return cls(make_safe_prime(bits, seed))

    @classmethod
    def for_width(cls, width: int, bits: int = 128, seed: int = 0) -> "CommutativeGroup":
        """Smallest group of at least ``bits`` bits, in steps of 64, that embeds
        items of ``width`` bytes."""
        needed = 8 * (width + 1) + 2
        return cls.generate(max(bits, -(-needed // 64) * 64), seed)

    @property
    def q(self) -> int:
        return (self.p - 1) // 2

    @property
    def bits(self) -> int:
        return self.p.bit_length()

    @property
    def capacity(self) -> int:
        """Bytes an encoded item may occupy, kind prefix included."""
        return (self.q.bit_length() - 1) // 8

    def is_member(self, x: int) -> bool:
        return 0 < x < self.p and pow(x, self.q, self.p) == 1

    def _embed(self, kind: ItemKind, payload: bytes) -> int:
        raw = bytes([kind]) + payload
        if len(raw) > self.capacity:
            raise EncodingError(
                f"item of {len(payload)} bytes does not fit a {self.bits}-bit group"
            )
        n = int.from_bytes(raw, "big")
        return n if pow(n, self.q, self.p) == 1 else self.p - n

    def encode(self, item: str) -> int:
        return self._embed(ItemKind.REAL, item.encode("utf-8"))

    def marker(self, kind: ItemKind) -> int:
        return self._embed(kind, b"")

    def dummy(self, rng) -> int:
        size = max(1, min(8, self.capacity - 1))
        return self._embed(ItemKind.DUMMY, bytes(rng.getrandbits(8) for _ in range(size)))

    def decode(self, x: int) -> Tuple[ItemKind, str]:
        if not self.is_member(x):
            raise EncodingError("value is not an encoded item")
        n = min(x, self.p - x)
        raw = n.to_bytes((n.bit_length() + 7) // 8, "big")
        try:
            kind = ItemKind(raw[0])
        except (ValueError, IndexError):
            raise EncodingError("value carries no item kind") from None
        if kind is ItemKind.REAL:
            return kind, raw[1:].decode("utf-8")
        return kind, ""


@dataclass(frozen=True)
class CommutativeKey:
    group: CommutativeGroup
    e: int
    d: int = field(repr=False)

    def encrypt(self, x: int) -> int:
        return pow(x, self.e, self.group.p)

    def decrypt(self, y: int) -> int:
        return pow(y, self.d, self.group.p)


def generate_key(group: CommutativeGroup, rng) -> CommutativeKey:
    order = group.p - 1
    while True:
        e = rng.randrange(3, order) | 1
        if igcd(e, order) == 1:
            return CommutativeKey(group, e, int(mod_inverse(e, order)))


def commutative_encrypt(key: CommutativeKey, item: int) -> int:
    if not key.group.is_member(item):
        raise EncodingError("item is not encoded into the key's group")
    return key.encrypt(item)


def commutative_decrypt(key: CommutativeKey, ciphertext: int) -> int:
    if not key.group.is_member(ciphertext):
        raise EncodingError("ciphertext is not in the key's group")
    return key.decrypt(ciphertext)


def hash_into_group(group: CommutativeGroup, item: str, kind: ItemKind = ItemKind.REAL) -> int:
    """SHA-256 digest of the item, stretched to the group width and squared mod p.

    The result is a quadratic residue that cannot be decoded; it serves
    protocols that only compare ciphertexts.
    """
    data = bytes([kind]) + item.encode("utf-8")
    width = (group.bits + 7) // 8 + 16
    counter = 0
    while True:
        blocks = b"".join(
            hashlib.sha256(counter.to_bytes(4, "big") + i.to_bytes(4, "big") + data).digest()
            for i in range(-(-width // 32))
        )
        x = pow(int.from_bytes(blocks[:width], "big") % group.p, 2, group.p)
        if x > 1:
            return x
        counter += 1
