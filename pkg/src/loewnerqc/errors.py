"""Exception taxonomy.

Two families: ValidationError for bad inputs, domains, or configuration
(CLI exit code 2), and NumericalError for runtime numerical failures
carrying diagnostics (CLI exit code 3).
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all loewnerqc errors."""


class ValidationError(ToolkitError, ValueError):
    """Invalid input, domain violation, or bad configuration."""


class DomainError(ValidationError):
    """Evaluation requested outside the declared domain."""


class DegenerateChartError(ValidationError):
    """Half-plane chart center has no positive real part."""


class NotHerglotzError(ValidationError):
    """Sampled values left the closed right half-plane."""


class NotQuasiconformalError(ValidationError):
    """A Beltrami trace has modulus >= 1 somewhere."""


class TableRangeError(ValidationError):
    """Time sample outside a tabulated spec's declared range."""


class InvalidRhoError(ValidationError):
    """Radius profile fails the admissibility requirements."""


class NumericalError(ToolkitError, RuntimeError):
    """A numerical procedure failed; carries diagnostics."""


class IntegrationFailureError(NumericalError):
    """ODE stepper hit its step floor or rejected the problem."""

    def __init__(self, message: str, last_time: float | None = None):
        super().__init__(message)
        self.last_time = last_time


class BarrierViolationError(NumericalError):
    """Computed trajectory left the open unit disk."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class ConvergenceError(NumericalError):
    """Iteration failed to meet its tolerance; keeps the last iterates."""

    def __init__(self, message: str, last_iterates: tuple | None = None):
        super().__init__(message)
        self.last_iterates = last_iterates


class BoundaryResolutionError(NumericalError):
    """Radial boundary extrapolation residual above tolerance."""

    def __init__(self, message: str, worst_theta: float | None = None,
                 residual: float | None = None):
        super().__init__(message)
        self.worst_theta = worst_theta
        self.residual = residual


class SingularValueError(NumericalError):
    """A formula hit a pole (for instance p(z, t) = -1)."""


class ReconstructionUnstableError(NumericalError):
    """Fourier tail of a trace does not decay; recovery refused."""


class DerivativeDegenerateError(NumericalError):
    """A required derivative vanished (local univalence lost)."""


class CannotInvertError(NumericalError):
    """Sampled map is not a Moebius transform within tolerance."""


class DegenerateJacobianError(NumericalError):
    """|dF| <= |dbarF| at a sample: orientation or injectivity lost."""
