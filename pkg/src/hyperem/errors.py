"""Exception hierarchy shared by every module."""


class HyperemError(ValueError):
    """Base class for all library errors."""


class DomainError(HyperemError):
    """Arguments outside the mathematical domain of an operation."""


class UnsupportedRegimeError(HyperemError):
    """The operation is undefined for the exponent regime of the request."""


class SpectralGapError(HyperemError):
    """Spectral parameter above (n-1)^2/4, where the exponent pair is complex."""


class InsufficientDataError(HyperemError):
    """Too few samples or events to carry out a fit or a check."""


class DegenerateComparisonError(HyperemError):
    """Two solutions with identical initial data were compared."""
