"""Finite domains that shares live in."""

from dataclasses import dataclass
from typing import Optional, Union

from ..errors import DomainViolation, SpecError
from ..partynet import PartyId


@dataclass(frozen=True)
class SumDomain:
    """Integers modulo ``modulus``; unsigned, no fractional bits."""

    modulus: int

    frac_bits = 0

    def __post_init__(self):
        if self.modulus < 2:
            raise DomainViolation("a sum domain needs a modulus of at least 2")

    @classmethod
    def for_count(cls, bound: int) -> "SumDomain":
        """Smallest power of two strictly greater than ``bound``."""
        return cls(1 << max(1, int(bound).bit_length()))

    @property
    def bits(self) -> int:
        return (self.modulus - 1).bit_length()

    def check(self, value: int) -> int:
        if not 0 <= value < self.modulus:
            raise DomainViolation(f"{value} lies outside Z_{self.modulus}")
        return value

    def random(self, rng) -> int:
        return rng.randrange(self.modulus)

    def signed(self, value: int) -> int:
        return value % self.modulus

    def decode(self, value: int):
        return value % self.modulus


@dataclass(frozen=True)
class FixedPointRing:
    """Signed fixed-point reals with ``frac_bits`` fractional bits in Z_{2^ring_bits}."""

    frac_bits: int
    ring_bits: int = 64

    def __post_init__(self):
        if self.frac_bits < 0 or self.ring_bits <= self.frac_bits:
            raise DomainViolation("ring must be wider than its fractional part")

    @property
    def modulus(self) -> int:
        return 1 << self.ring_bits

    @property
    def bits(self) -> int:
        return self.ring_bits

    @property
    def ulp(self) -> float:
        return 2.0 ** -self.frac_bits

    def encode(self, real: float) -> int:
        scaled = round(real * (1 << self.frac_bits))
        if abs(scaled) >= 1 << (self.ring_bits - 1):
            raise DomainViolation(f"{real} overflows a {self.ring_bits}-bit fixed-point ring")
        return scaled % self.modulus

    def signed(self, value: int) -> int:
        value %= self.modulus
        if value >= 1 << (self.ring_bits - 1):
            value -= self.modulus
        return value

    def decode(self, value: int) -> float:
        return self.signed(value) / (1 << self.frac_bits)

    def random(self, rng) -> int:
        return rng.getrandbits(self.ring_bits)


Domain = Union[SumDomain, FixedPointRing]


@dataclass(frozen=True)
class Share:
    """An additive share held by ``owner``; two or more shares sum to the secret."""

    value: int
    domain: Domain
    owner: Optional[PartyId] = None

    def __add__(self, other: "Share") -> "Share":
        _same_domain(self, other)
        return Share((self.value + other.value) % self.domain.modulus, self.domain, self.owner)

    def __sub__(self, other: "Share") -> "Share":
        _same_domain(self, other)
        return Share((self.value - other.value) % self.domain.modulus, self.domain, self.owner)

    def scale(self, factor: int) -> "Share":
        return Share((self.value * factor) % self.domain.modulus, self.domain, self.owner)


def _same_domain(*shares: Share):
    domains = {s.domain for s in shares}
    if len(domains) != 1:
        raise SpecError(f"shares live in different domains: {sorted(map(str, domains))}")


def reconstruct(*shares: Share):
    """Add shares in their common domain and decode the result."""
    _same_domain(*shares)
    domain = shares[0].domain
    return domain.decode(sum(s.value for s in shares) % domain.modulus)
