"""Tests for custom exceptions."""

import pytest

from faberphase.exceptions import (
    ArtifactError,
    AssumptionError,
    ConfigurationError,
    FaberPhaseError,
    InfeasibleMassError,
    OptimizationError,
    PropertyViolationError,
    SolverError,
    ValidationError,
)


class TestFaberPhaseError:
    """Test base exception class."""

    def test_inheritance(self):
        """FaberPhaseError is a plain Exception."""
        error = FaberPhaseError("Test error")
        assert isinstance(error, Exception)

    def test_message(self):
        """The message is preserved."""
        assert str(FaberPhaseError("Test error message")) == "Test error message"

    def test_details(self):
        """Details are appended after a colon."""
        error = FaberPhaseError("Grid too coarse", details="N=4 < 8")
        assert error.message == "Grid too coarse"
        assert error.details == "N=4 < 8"
        assert str(error) == "Grid too coarse: N=4 < 8"


class TestHierarchy:
    """Test that every error can be caught through the base class."""

    @pytest.mark.parametrize(
        "cls",
        [
            ConfigurationError,
            ValidationError,
            AssumptionError,
            InfeasibleMassError,
            SolverError,
            OptimizationError,
            PropertyViolationError,
            ArtifactError,
        ],
    )
    def test_subclass(self, cls):
        """Every package error derives from FaberPhaseError."""
        with pytest.raises(FaberPhaseError):
            raise cls("failure")


class TestStructuredErrors:
    """Test errors that carry extra attributes."""

    def test_infeasible_mass(self):
        """InfeasibleMassError records the target and the attainable mass."""
        error = InfeasibleMassError("Target mass cannot be reached", target=0.99, attainable=0.9)
        assert error.target == 0.99
        assert error.attainable == 0.9

    def test_solver_error(self):
        """SolverError records iterations and the last residual."""
        error = SolverError("Eigensolver did not converge", details="residual 1e-3", iterations=500, residual=1e-3)
        assert error.iterations == 500
        assert error.residual == 1e-3
        assert str(error) == "Eigensolver did not converge: residual 1e-3"

    def test_optimization_error(self):
        """OptimizationError records the iterations performed."""
        assert OptimizationError("Stopped", iterations=12).iterations == 12

    def test_property_violation(self):
        """PropertyViolationError carries the failing report."""
        report = {"violations": 2}
        error = PropertyViolationError("2 violations", report=report)
        assert error.report is report

    def test_defaults(self):
        """Optional attributes default to None."""
        error = SolverError("failure")
        assert error.iterations is None
        assert error.residual is None
        assert error.details is None
