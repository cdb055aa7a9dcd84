"""Exception types shared across the package."""


class QfhsError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(QfhsError, ValueError):
    """A parameter is outside its admissible range."""


class DataError(QfhsError, ValueError):
    """Input data fails parsing or validation."""


class FilterError(QfhsError, RuntimeError):
    """A recursive filter produced a non-finite value."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class OptimizationError(QfhsError, RuntimeError):
    """The optimizer could not produce a usable result."""


class EmptyTailError(QfhsError, ValueError):
    """Too few tail observations to estimate a quantile or tail mean."""


class InsufficientExceedancesError(QfhsError, ValueError):
    """Fewer exceedances than the regression-based ES estimator needs."""


class SingularMatrixError(QfhsError, RuntimeError):
    """A covariance building block is numerically singular."""


class DegenerateLossError(QfhsError, ValueError):
    """Two model loss vectors are identical, breaking the bootstrap test."""


class AlignmentError(QfhsError, ValueError):
    """Forecast records do not cover identical periods across models."""


class ConfigError(QfhsError, ValueError):
    """A study configuration file is malformed."""

    def __init__(self, message, field=None):
        if field:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field
