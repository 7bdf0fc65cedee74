"""Tests for the report and result models."""

import math

import pytest

from faberphase.models import (
    AssumptionReport,
    Certificate,
    EnergyBreakdown,
    InequalityReport,
    OptimizerTrace,
    TraceRow,
)


def _row(iteration: int, j: float) -> TraceRow:
    return TraceRow(iter=iteration, J=j, lambda1=j, E=0.0, step=0.1, pgnorm=1.0, asym=0.0)


class TestInequalityReport:
    """Test InequalityReport."""

    def test_le_within_slack(self):
        """A small violation inside the slack passes."""
        report = InequalityReport(name="modica_mortola", lhs=1.005, rhs=1.0, slack=0.01)
        assert report.gap == pytest.approx(-0.005)
        assert report.passed

    def test_le_outside_slack(self):
        """A violation beyond the slack fails."""
        assert not InequalityReport(name="hardy_littlewood", lhs=2.0, rhs=1.0).passed

    def test_eq(self):
        """Identities are two-sided."""
        assert InequalityReport(name="norm", relation="eq", lhs=1.0, rhs=1.0 + 1e-14, slack=1e-12).passed
        assert not InequalityReport(name="norm", relation="eq", lhs=1.0, rhs=0.5, slack=1e-12).passed

    def test_serialized_fields(self):
        """gap and passed are part of the dump."""
        data = InequalityReport(name="x", lhs=0.0, rhs=1.0).model_dump()
        assert data["gap"] == 1.0
        assert data["passed"] is True

    def test_invalid_relation(self):
        """Only le and eq are relations."""
        with pytest.raises(ValueError):
            InequalityReport(name="x", relation="ge", lhs=0.0, rhs=1.0)


class TestAssumptionReport:
    """Test AssumptionReport."""

    def test_passed(self):
        """A report passes when every check passes."""
        assert AssumptionReport(subject="potential", checks={"a": True, "b": True}).passed
        assert not AssumptionReport(subject="potential", checks={"a": True, "b": False}).passed


class TestEnergyBreakdown:
    """Test EnergyBreakdown."""

    def test_total(self):
        """The total must equal the sum of its parts."""
        energy = EnergyBreakdown(gradient=1.0, potential=2.0, total=3.0)
        assert energy.lambda1 is None
        with pytest.raises(ValueError, match="gradient \\+ potential"):
            EnergyBreakdown(gradient=1.0, potential=2.0, total=4.0)

    def test_negative_parts(self):
        """Energies are nonnegative."""
        with pytest.raises(ValueError):
            EnergyBreakdown(gradient=-1.0, potential=1.0, total=0.0)


class TestOptimizerTrace:
    """Test OptimizerTrace."""

    def test_monotone(self):
        """Non-increasing J is monotone."""
        trace = OptimizerTrace()
        for i, j in enumerate([3.0, 2.0, 2.0, 1.5]):
            trace.append(_row(i, j))
        assert trace.j_values == [3.0, 2.0, 2.0, 1.5]
        assert trace.is_monotone()

    def test_increase_detected(self):
        """An increase beyond the tolerance breaks monotonicity."""
        trace = OptimizerTrace(rows=[_row(0, 1.0), _row(1, 1.1)])
        assert not trace.is_monotone()
        assert trace.is_monotone(tol=0.2)


class TestCertificate:
    """Test Certificate."""

    @pytest.fixture
    def certificate(self):
        """Uncalibrated certificate."""
        return Certificate(
            eps=0.02,
            gamma=0.01,
            delta=0.1,
            mass=0.25,
            asymmetry=0.0,
            eigen_asymmetry=0.0,
            interface_measure=0.1,
            alpha_delta=0.045,
            implied_constant=0.1 * 0.045 * 0.01 / 0.02,
        )

    def test_uncalibrated(self, certificate):
        """Without a bound there is no verdict."""
        assert certificate.within_bound is None

    def test_bound(self, certificate):
        """The verdict compares the interface measure with the bound."""
        assert certificate.model_copy(update={"bound": 0.2}).within_bound is True
        assert certificate.model_copy(update={"bound": 0.05}).within_bound is False
        assert certificate.model_copy(update={"bound": math.inf}).within_bound is True
