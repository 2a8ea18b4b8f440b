"""Exception types shared across the package."""


class TailbenchError(Exception):
    """Base class for all package-specific errors."""


class DomainError(TailbenchError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class DegenerateSampleError(TailbenchError, ValueError):
    """A sample carries no usable variation (ties, zero variance, ...)."""


class InsufficientExceedancesError(TailbenchError, ValueError):
    """Fewer than the minimum number of observations exceed the threshold."""


class NoExceedanceError(TailbenchError, ValueError):
    """The smoothed exceedance mass at the threshold is numerically zero."""


class ConfigError(TailbenchError, ValueError):
    """A simulation or CLI configuration is internally inconsistent."""
