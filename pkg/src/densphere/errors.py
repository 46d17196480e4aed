"""Exception types shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, numeric
failures exit 2, I/O failures exit 3.
"""


class DensphereError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(DensphereError):
    """Invalid configuration or argument values (usage error)."""


class DomainError(DensphereError):
    """A point lies outside the unit domain."""


class DataError(DensphereError):
    """Malformed or insufficient input data."""


class NumericError(DensphereError):
    """Non-finite values or a failed numeric routine."""


class SingularDensityError(NumericError):
    """Density is (numerically) zero at a quadrature node or observation.

    ``where`` identifies the offending node or observation index.
    """

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class GradientSingularityError(SingularDensityError):
    """Log-posterior gradient blows up at an observation; the sampler
    treats this as a forced rejection."""


class TrajectoryError(NumericError):
    """A Hamiltonian trajectory aborted mid-flight (forced rejection)."""


class OptimizationError(NumericError):
    """Newton optimization failed; carries the last valid iterate."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class DegenerateTruncationError(NumericError):
    """Truncating a coefficient vector produced a zero vector."""
