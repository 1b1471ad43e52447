"""Exception types raised across the package.

Every error derives from :class:`TotcorrError`, itself a ``ValueError`` so
callers that only care about "bad input" can catch the builtin.
"""


class TotcorrError(ValueError):
    """Base class for all validation failures."""


class DimensionMismatch(TotcorrError):
    pass


class NotHermitian(TotcorrError):
    pass


class NotPositive(TotcorrError):
    pass


class TraceNotOne(TotcorrError):
    pass


class NotUnitary(TotcorrError):
    pass


class NotTracePreserving(TotcorrError):
    pass


class DomainError(TotcorrError):
    """A spectral function is undefined on some eigenvalue above the cutoff."""


class InvalidOrder(TotcorrError):
    """Schatten order below 1."""


class EmptyKeepSet(TotcorrError):
    pass


class IndexOutOfRange(TotcorrError):
    pass


class EpsilonOutOfRange(TotcorrError):
    pass


class RankOutOfRange(TotcorrError):
    pass


class UnknownName(TotcorrError):
    pass


class UnknownKind(TotcorrError):
    pass


class ParamOutOfRange(TotcorrError):
    pass


class AlphaOutOfRange(ParamOutOfRange):
    pass


class QOutOfRange(ParamOutOfRange):
    pass


class UnsupportedDimension(TotcorrError):
    pass


class MeasureMissing(TotcorrError):
    pass


class ConfigError(TotcorrError):
    pass
