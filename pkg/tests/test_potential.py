"""Tests for phase-field potentials."""

import math

import numpy as np
import pytest

from faberphase.exceptions import AssumptionError, ValidationError
from faberphase.potential import POTENTIAL_NAMES, Potential


class TestBuiltins:
    """Test the built-in potentials."""

    @pytest.mark.parametrize("name", POTENTIAL_NAMES)
    def test_vanish_at_endpoints(self, name):
        """Every built-in potential vanishes at the pure phases."""
        pot = Potential.from_name(name)
        assert pot.psi(0.0) == 0.0
        assert pot.psi(1.0) == 0.0
        assert pot.psi(0.5) > 0.0

    def test_surface_tension_constants(self, well, obstacle):
        """c0 matches the closed forms 1/(6 sqrt 2) and pi/8."""
        assert well.c0() == pytest.approx(1.0 / (6.0 * math.sqrt(2.0)), rel=1e-6)
        assert obstacle.c0() == pytest.approx(math.pi / 8.0, rel=1e-5)

    def test_mixed_constant(self):
        """c0 of the mixed potential is the integral of s^(1/2) (1 - s)."""
        assert Potential.from_name("mixed").c0() == pytest.approx(4.0 / 15.0, rel=1e-5)

    def test_big_psi_monotone(self, obstacle):
        """Psi increases from 0 to c0."""
        s = np.linspace(0.0, 1.0, 101)
        values = obstacle.big_psi(s)
        assert values[0] == 0.0
        assert values[-1] == pytest.approx(obstacle.c0())
        assert np.all(np.diff(values) >= 0.0)

    def test_derivative(self, well):
        """dpsi agrees with a central difference."""
        s = np.linspace(0.1, 0.9, 9)
        h = 1e-6
        fd = (well.psi(s + h) - well.psi(s - h)) / (2.0 * h)
        assert np.allclose(well.dpsi(s), fd, atol=1e-8)

    def test_alpha_delta(self, obstacle, well):
        """alpha_delta is the value at the ends of [delta, 1 - delta]."""
        assert obstacle.alpha_delta(0.1) == pytest.approx(0.045)
        assert well.alpha_delta(0.1) == pytest.approx(0.25 * 0.01 * 0.81)
        with pytest.raises(ValidationError):
            obstacle.alpha_delta(0.5)

    def test_unknown_name(self):
        """Unknown names are rejected."""
        with pytest.raises(ValidationError, match="Unknown potential"):
            Potential.from_name("quartic")

    def test_argument_outside_interval(self, obstacle):
        """Arguments outside [0, 1] are rejected."""
        with pytest.raises(ValidationError):
            obstacle.psi(1.5)


class TestAssumptions:
    """Test the construction-time checks."""

    def test_nonzero_endpoint(self):
        """A potential that does not vanish at 0 is rejected."""
        with pytest.raises(AssumptionError, match="vanish"):
            Potential("custom", lambda s: 0.1 + s * (1.0 - s))

    def test_degenerate_minimum(self):
        """A flat, degenerate minimum is rejected."""
        with pytest.raises(AssumptionError, match="Degenerate"):
            Potential("custom", lambda s: s**4 * (1.0 - s) ** 2)

    def test_negative_inside(self):
        """A potential with a negative part is rejected."""
        with pytest.raises(AssumptionError, match="positive"):
            Potential("custom", lambda s: s * (1.0 - s) * (s - 0.5))

    def test_report(self, well):
        """The report records every check and the endpoint behaviour."""
        report = well.check_assumptions()
        assert report.subject == "potential"
        assert report.passed
        assert set(report.checks) == {
            "vanishes_at_endpoints",
            "positive_inside",
            "nondegenerate_at_zero",
            "nondegenerate_at_one",
        }
        assert report.details["curvature_at_zero"] == pytest.approx(0.5, rel=1e-2)

    def test_custom_potential_without_derivative(self):
        """Custom potentials fall back to finite differences."""
        pot = Potential("custom", lambda s: s * (1.0 - s))
        assert pot.dpsi(0.25) == pytest.approx(0.5, abs=1e-6)
