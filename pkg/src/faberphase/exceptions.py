"""Custom exceptions for FaberPhase.

All exceptions inherit from FaberPhaseError so callers can catch every
package-specific failure with a single except clause.

Exception Hierarchy:
    FaberPhaseError (base)
    ├── ConfigurationError (experiment configuration issues)
    ├── ValidationError (grid, field and shape invariant breaches)
    ├── AssumptionError (potential/coefficient assumptions violated)
    ├── InfeasibleMassError (mass projection cannot reach the target)
    ├── SolverError (eigensolver non-convergence or sign failure)
    ├── OptimizationError (optimizer gave up)
    ├── PropertyViolationError (an asserted property failed)
    └── ArtifactError (CSV/JSON read or write failures)
"""

from typing import Any


class FaberPhaseError(Exception):
    """Base exception for all FaberPhase errors.

    Attributes:
        message: Error message describing what went wrong
        details: Optional additional details about the error
    """

    def __init__(self, message: str, details: str | None = None) -> None:
        self.message = message
        self.details = details
        super().__init__(message)

    def __str__(self) -> str:
        """Return string representation of the error."""
        if self.details:
            return f"{self.message}: {self.details}"
        return self.message


class ConfigurationError(FaberPhaseError):
    """Configuration-related errors.

    Raised for unreadable config files or inconsistent combinations of
    experiment parameters that survive field-level validation.

    Example:
        >>> raise ConfigurationError("Cartesian grids are two-dimensional", details="n=3")
    """

    pass


class ValidationError(FaberPhaseError):
    """Invariant violations of grids, fields and shapes.

    Example:
        >>> raise ValidationError("Grid too coarse", details="N=4 < 8")
    """

    pass


class AssumptionError(FaberPhaseError):
    """A potential or coefficient family violates its structural assumptions.

    Example:
        >>> raise AssumptionError("Degenerate minimum", details="psi''(0) = 0")
    """

    pass


class InfeasibleMassError(FaberPhaseError):
    """No shift of the field reaches the prescribed mass inside the box.

    Attributes:
        target: Requested mean value
        attainable: Largest attainable mean value
    """

    def __init__(
        self,
        message: str,
        details: str | None = None,
        target: float | None = None,
        attainable: float | None = None,
    ) -> None:
        super().__init__(message, details)
        self.target = target
        self.attainable = attainable


class SolverError(FaberPhaseError):
    """Eigensolver failures.

    Attributes:
        iterations: Outer iterations performed before giving up
        residual: Last relative residual
    """

    def __init__(
        self,
        message: str,
        details: str | None = None,
        iterations: int | None = None,
        residual: float | None = None,
    ) -> None:
        super().__init__(message, details)
        self.iterations = iterations
        self.residual = residual


class OptimizationError(FaberPhaseError):
    """Optimizer failures that leave no usable iterate.

    Attributes:
        iterations: Iterations performed
    """

    def __init__(
        self, message: str, details: str | None = None, iterations: int | None = None
    ) -> None:
        super().__init__(message, details)
        self.iterations = iterations


class PropertyViolationError(FaberPhaseError):
    """An asserted numerical property failed.

    Attributes:
        report: The report object that carried the failing check
    """

    def __init__(self, message: str, details: str | None = None, report: Any = None) -> None:
        super().__init__(message, details)
        self.report = report


class ArtifactError(FaberPhaseError):
    """Reading or writing an experiment artifact failed.

    Example:
        >>> raise ArtifactError("Failed to write trace", details="Permission denied")
    """

    pass
