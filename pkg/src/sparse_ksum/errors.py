"""Exception types shared across the toolkit.

Builtin exceptions are reused where they say the right thing (OverflowError
for the word-size cap, IndexError for bad solution indices); everything else
derives from KsumError so callers can catch toolkit failures in one clause.
"""


class KsumError(Exception):
    """Base class for toolkit-specific failures."""


class InvalidParam(KsumError):
    """Parameters violate a documented precondition (e.g. r < k)."""


class BudgetExceeded(KsumError):
    """An enumeration or memory budget would be exceeded."""


class IntractableError(BudgetExceeded):
    """Exact solution counting is out of reach for these parameters."""


class NotXor(InvalidParam):
    """Operation requires the XOR family."""


class InvalidKRange(InvalidParam):
    """Target solution size outside the supported [k1+1, 2*k1-1] window."""


class InvalidPrime(InvalidParam):
    """Modulus is not a prime (or prime power) where one is required."""


class NonInvertibleK(InvalidParam):
    """k has no inverse modulo q, so the carry shift is undefined."""


class FamilyMismatch(InvalidParam):
    """Instance group family does not match what the operation needs."""


class ModulusMismatch(InvalidParam):
    """Moduli do not nest (inner modulus must divide the outer one)."""


class ConfigError(KsumError):
    """CLI configuration is malformed."""


class VersionMismatch(KsumError):
    """Result row schema version is not supported by this binary."""
