"""Exception types raised across the package.

Every invariant violation raises a subclass of :class:`ValidationError`
whose message names the violated invariant and the measured deviation.
"""


class CoherenceLabError(Exception):
    """Base class for all package errors."""


class ValidationError(CoherenceLabError, ValueError):
    """An input violates a documented invariant."""


class NotSquare(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class TraceNotOne(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class NotIsometry(ValidationError):
    pass


class NotTracePreserving(ValidationError):
    pass


class BadRank(ValidationError):
    pass


class RankDeficient(ValidationError):
    pass


class NonFinite(ValidationError):
    pass


class ContractionInfeasible(ValidationError):
    pass


class ParseError(ValidationError):
    """A document could not be decoded into a package value."""


class DimensionMismatch(CoherenceLabError, ValueError):
    """Operands live on Hilbert spaces of different dimension."""


class InconsistentPattern(CoherenceLabError, RuntimeError):
    """A phase scan disagrees with the two-parameter interference model."""
