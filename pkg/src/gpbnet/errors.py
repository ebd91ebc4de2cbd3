"""Exception types shared across the package."""


class GpbnetError(Exception):
    """Base class for all errors raised by gpbnet."""


class DataFormatError(GpbnetError):
    """Malformed input file: ragged rows, unparseable or missing cells."""


class ConstantColumnError(GpbnetError):
    """A continuous column has zero variance on the fit rows."""


class SchemaError(GpbnetError):
    """Column names/kinds do not match what an operation requires."""


class SingularCovarianceError(GpbnetError):
    """Covariance matrix not positive definite even at maximal jitter."""


class OptimizationError(GpbnetError):
    """Every hyperparameter-optimization restart failed numerically.

    Carries the best initial point seen, so callers can fall back to it.
    """

    def __init__(self, message, fallback=None):
        super().__init__(message)
        self.fallback = fallback


class DegenerateDataError(GpbnetError):
    """Data admits no meaningful fit (e.g. all samples identical)."""
