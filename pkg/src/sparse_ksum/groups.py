"""Group ensembles, element arithmetic, and density bookkeeping.

Three concrete abelian families are supported, chosen as an enum rather than
an abstract interface so the hot loops stay monomorphic:

  * ``MODULAR2M``  -- integers mod 2^m, stored as one unsigned word (m <= 127)
  * ``XOR``        -- F_2^m, stored as a packed bit vector (a Python int)
  * ``VECTOR_MOD_Q`` -- Z_q^m, stored as a length-m tuple of digits

Density is the ratio k*log2(r) / log2(|G|).  The dimension m realizing a
requested density delta is the ceiling of k*log2(r) / (delta*log2(q)),
computed with exact integer comparisons so boundary cases never depend on
float rounding.  Densities themselves are exact rationals throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Tuple, Union

from .errors import InvalidParam
from .rng import Rng

Element = Union[int, Tuple[int, ...]]

MODULAR_WORD_BITS = 127  # hard cap so a modular element always fits fixed-width limbs


class Family(str, Enum):
    MODULAR2M = "modular2m"
    VECTOR_MOD_Q = "vector"
    XOR = "xor"


@dataclass(frozen=True)
class GroupSpec:
    """One group out of an ensemble: family plus its size parameters.

    ``q`` is only meaningful for the vector family; it is pinned to 2 for the
    other two so that |G| = q^m holds uniformly (2^m for modular and XOR).
    """

    family: Family
    m: int
    q: int = 2

    def __post_init__(self):
        if self.m < 1:
            raise InvalidParam(f"m must be >= 1, got {self.m}")
        if self.family is Family.VECTOR_MOD_Q:
            if self.q < 2:
                raise InvalidParam(f"q must be >= 2, got {self.q}")
        elif self.q != 2:
            raise InvalidParam(f"q is fixed to 2 for family {self.family.value}")
        if self.family is Family.MODULAR2M and self.m > MODULAR_WORD_BITS:
            raise OverflowError(
                f"modular family caps m at {MODULAR_WORD_BITS} (got {self.m})"
            )

    @property
    def order(self) -> int:
        return self.q ** self.m

    @property
    def element_bits(self) -> int:
        """Bits of a serialized element (digits are packed, not base-q coded)."""
        if self.family is Family.VECTOR_MOD_Q:
            return self.m * max(1, (self.q - 1).bit_length())
        return self.m

    def to_json(self) -> dict:
        return {"family": self.family.value, "m": self.m, "q": self.q}

    @staticmethod
    def from_json(obj: dict) -> "GroupSpec":
        return GroupSpec(Family(obj["family"]), int(obj["m"]), int(obj.get("q", 2)))


@dataclass(frozen=True)
class DensityParams:
    """Problem shape shared by samplers and harnesses: size, solution size,
    and target density (an exact rational, never a float)."""

    r: int
    k: int
    delta: Fraction

    def __post_init__(self):
        if self.k < 3:
            raise InvalidParam(f"k must be >= 3, got {self.k}")
        if self.r < self.k:
            raise InvalidParam(f"r must be >= k, got r={self.r}, k={self.k}")
        if not isinstance(self.delta, Fraction):
            object.__setattr__(self, "delta", Fraction(self.delta))
        if self.delta <= 0:
            raise InvalidParam(f"delta must be positive, got {self.delta}")

    def spec(self, family: Family, q: int = 2) -> GroupSpec:
        return make_spec(self.r, self.k, self.delta, family, q=q)


def make_spec(
    r: int,
    k: int,
    delta: Union[Fraction, int, str],
    family: Family,
    q: int = 2,
) -> GroupSpec:
    """Build the group of the ensemble at instance size r and density delta.

    m is the least integer with m*delta*log2(q) >= k*log2(r); the comparison
    is done as q^(m*num) >= r^(k*den) in exact integer arithmetic.
    """
    if k < 3:
        raise InvalidParam(f"k must be >= 3, got {k}")
    if r < k:
        raise InvalidParam(f"r must be >= k, got r={r}, k={k}")
    delta = Fraction(delta)
    if delta <= 0:
        raise InvalidParam(f"delta must be positive, got {delta}")
    if family is not Family.VECTOR_MOD_Q:
        q = 2
    num, den = delta.numerator, delta.denominator

    rhs = r ** (k * den)
    est = k * math.log2(r) / (float(delta) * math.log2(q))
    m = max(1, math.ceil(est) - 2)
    while q ** (m * num) < rhs:
        m += 1
    while m > 1 and q ** ((m - 1) * num) >= rhs:
        m -= 1
    return GroupSpec(family, m, q)


def density_of(spec: GroupSpec, r: int, k: int) -> float:
    """Realized density k*log2(r)/log2(|G|) of this group at size r."""
    return k * math.log2(r) / (spec.m * math.log2(spec.q))


def is_admissible(spec: GroupSpec, r: int, k: int, delta: Union[Fraction, int, str]) -> bool:
    """Exact check that |G| is within a factor 2 of its ideal value r^(k/delta).

    Equivalent to |realized - delta| / delta <= 1 / log2|G| for m produced by
    the ceiling formula, stated as q^(m*num) <= 2^num * r^(k*den) to avoid
    floats entirely.
    """
    delta = Fraction(delta)
    num, den = delta.numerator, delta.denominator
    lhs = spec.q ** (spec.m * num)
    if lhs < r ** (k * den):
        return False  # undershoot: density above target
    return lhs <= (2 ** num) * (r ** (k * den))


def identity(spec: GroupSpec) -> Element:
    if spec.family is Family.VECTOR_MOD_Q:
        return (0,) * spec.m
    return 0


def add(a: Element, b: Element, spec: GroupSpec) -> Element:
    if spec.family is Family.XOR:
        return a ^ b
    if spec.family is Family.MODULAR2M:
        return (a + b) & ((1 << spec.m) - 1)
    q = spec.q
    return tuple((x + y) % q for x, y in zip(a, b))


def negate(a: Element, spec: GroupSpec) -> Element:
    if spec.family is Family.XOR:
        return a
    if spec.family is Family.MODULAR2M:
        return (-a) & ((1 << spec.m) - 1)
    q = spec.q
    return tuple((-x) % q for x in a)


def sample_element(spec: GroupSpec, rng: Rng) -> Element:
    if spec.family is Family.VECTOR_MOD_Q:
        q, m = spec.q, spec.m
        return tuple(rng.randrange(q) for _ in range(m))
    return rng.getrandbits(spec.m)


def sample_element_excluding(spec: GroupSpec, current: Element, rng: Rng) -> Element:
    """Uniform over G minus {current}, by rejection (expected < 2 draws)."""
    while True:
        x = sample_element(spec, rng)
        if x != current:
            return x


def validate_element(a: Element, spec: GroupSpec) -> None:
    if spec.family is Family.VECTOR_MOD_Q:
        if not (isinstance(a, tuple) and len(a) == spec.m):
            raise InvalidParam(f"vector element must be a length-{spec.m} tuple")
        if any(not (0 <= d < spec.q) for d in a):
            raise InvalidParam("vector digit out of range")
    else:
        if not isinstance(a, int) or not (0 <= a < (1 << spec.m)):
            raise InvalidParam(f"element out of range for m={spec.m}")


def element_to_hex(a: Element, spec: GroupSpec) -> str:
    """Bit-exact big-endian hex; vector digits pack MSB-first."""
    if spec.family is Family.VECTOR_MOD_Q:
        bits = max(1, (spec.q - 1).bit_length())
        value = 0
        for d in a:
            value = (value << bits) | d
    else:
        value = a
    width = max(1, (spec.element_bits + 3) // 4)
    return format(value, f"0{width}x")


def element_from_hex(s: str, spec: GroupSpec) -> Element:
    value = int(s, 16)
    if spec.family is Family.VECTOR_MOD_Q:
        bits = max(1, (spec.q - 1).bit_length())
        mask = (1 << bits) - 1
        digits = []
        for i in range(spec.m):
            shift = bits * (spec.m - 1 - i)
            digits.append((value >> shift) & mask)
        elem: Element = tuple(digits)
    else:
        elem = value
    validate_element(elem, spec)
    return elem
