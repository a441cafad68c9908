"""
Exception types raised by the holonomy library.

Conditions that are part of normal operation (an unsaturated ball, a
search that runs out of budget, a numeric-only verdict) are returned as
values instead.
"""


class HolonomyError(Exception):
    """Base class for all library errors."""
    pass


class GroupMembershipError(HolonomyError):
    """Raised when a matrix fails the invariants of its group type."""
    pass


class GroupKindMismatch(HolonomyError):
    """Raised when generators of different group kinds are mixed."""
    pass


class IdentityInput(HolonomyError):
    """Raised when an operation needs a non-identity rotation."""
    pass


class NotMonic(HolonomyError):
    """Raised when a polynomial must be monic but is not."""
    pass


class TraceOutOfRange(HolonomyError):
    """Raised when s = tr - 1 lies outside [-2, 2]."""
    pass


class TraceNotRepresentable(HolonomyError):
    """Raised when an exact trace leaves the rationals or a real quadratic field."""
    pass


class LogBranchFailure(HolonomyError):
    """Raised when no logarithm reproducing a generator can be found."""
    pass


class DimensionMismatch(HolonomyError):
    """Raised when a vector does not match the fiber dimension."""
    pass


class WrongFiber(HolonomyError):
    """Raised when an operation needs the real rank-4 fiber."""
    pass


class BadCaseParams(HolonomyError):
    """Raised when derived-generator case parameters are invalid."""
    pass


class AngleParseError(HolonomyError, ValueError):
    """Raised when an angle string does not follow the angle grammar."""
    pass


class WordParseError(HolonomyError, ValueError):
    """Raised when a curve word does not follow the word grammar."""
    pass


class ConfigError(HolonomyError, ValueError):
    """Raised when a run configuration holds values a command cannot use."""
    pass


class ConnectionFormError(HolonomyError, ValueError):
    """Raised when connection coefficients do not lie in the Lie algebra of the fiber."""
    pass
