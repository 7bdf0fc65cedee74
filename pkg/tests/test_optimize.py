"""Tests for projected gradient descent and minimizer certificates."""

import math

import numpy as np
import pytest

from faberphase.exceptions import InfeasibleMassError, OptimizationError, ValidationError
from faberphase.grid import ScalarField, weighted_mean
from faberphase.optimize import (
    OptimizerConfig,
    apply_calibration,
    asymmetry,
    calibrate_interface_constant,
    certify_minimizer,
    initial_field,
    minimize,
    project_admissible,
    project_onto_box_and_mass,
    random_admissible_field,
)


@pytest.fixture
def small_run(cart32, obstacle, family):
    """A few optimizer iterations from an off-center start."""
    config = OptimizerConfig(eps=0.1, gamma=0.01, mass=0.25, max_iter=5)
    return minimize(config, cart32, obstacle, family)


class TestProjection:
    """Test the projection onto the admissible set."""

    def test_two_cells(self):
        """A uniform shift reaches the mean when no bound is active."""
        out = project_onto_box_and_mass(
            np.array([0.2, 0.8]), np.array([1.0, 1.0]), np.array([True, True]), 0.6
        )
        assert out == pytest.approx([0.3, 0.9], abs=1e-12)

    def test_clamps_and_zeroes_boundary(self):
        """Values are clamped to [0, 1] and non-interior cells are zero."""
        values = np.array([2.0, 0.5, -1.0, 0.7])
        interior = np.array([True, True, True, False])
        out = project_onto_box_and_mass(values, np.ones(4), interior, 0.375)
        assert out[3] == 0.0
        assert np.all((out >= 0.0) & (out <= 1.0))
        assert float(np.mean(out)) == pytest.approx(0.375, abs=1e-12)

    def test_infeasible_mass(self, cart32):
        """The boundary layer caps the attainable mass."""
        values = np.ones(cart32.size)
        with pytest.raises(InfeasibleMassError) as exc_info:
            project_admissible(ScalarField(grid=cart32, values=values), 0.99)
        assert exc_info.value.target == 0.99
        assert exc_info.value.attainable < 0.99

    def test_admissible_input_unchanged(self, cart32):
        """Projecting an admissible field returns the same values."""
        phi = initial_field(cart32, 0.25, "radial-bump")
        again = project_admissible(phi, 0.25)
        assert np.array_equal(again.values, phi.values)

    def test_projection_is_admissible(self, cart32):
        """Arbitrary input lands in the admissible set."""
        rng = np.random.default_rng(5)
        phi = project_admissible(ScalarField(grid=cart32, values=rng.normal(size=cart32.size)), 0.3)
        assert weighted_mean(phi) == pytest.approx(0.3, abs=1e-10)
        assert np.all(phi.values[cart32.boundary_layer] == 0.0)


class TestInitialFields:
    """Test the starting fields."""

    @pytest.mark.parametrize("init", ["radial-bump", "offset-bump", "seeded-noise"])
    def test_admissible(self, cart32, init):
        """Every start has the prescribed mass."""
        phi = initial_field(cart32, 0.25, init, np.random.default_rng(1))
        assert phi.mass == 0.25
        assert weighted_mean(phi) == pytest.approx(0.25, abs=1e-10)

    def test_seeded_noise_is_reproducible(self, cart32):
        """The same seed gives the same start."""
        first = initial_field(cart32, 0.25, "seeded-noise", np.random.default_rng(3))
        second = initial_field(cart32, 0.25, "seeded-noise", np.random.default_rng(3))
        assert np.array_equal(first.values, second.values)

    def test_offset_needs_cartesian(self, radial2):
        """Radial grids cannot hold off-center starts."""
        with pytest.raises(ValidationError, match="Cartesian"):
            initial_field(radial2, 0.25, "offset-bump")

    def test_unknown_kind(self, cart32):
        """Unknown kinds are rejected."""
        with pytest.raises(ValidationError, match="Unknown initial field"):
            initial_field(cart32, 0.25, "checkerboard")

    def test_random_admissible_field(self, cart32):
        """Random property-test fields are admissible."""
        phi = random_admissible_field(cart32, 0.4, np.random.default_rng(2))
        assert weighted_mean(phi) == pytest.approx(0.4, abs=1e-10)

    def test_radial_field_is_symmetric(self, cart32):
        """A field depending only on the distance has no asymmetry."""
        values = np.exp(-cart32.squared_distance_units / cart32.cells_per_axis**2)
        assert asymmetry(ScalarField(grid=cart32, values=values)) == pytest.approx(0.0, abs=1e-15)

    def test_offset_field_is_asymmetric(self, cart32):
        """An off-center bump has positive asymmetry."""
        assert asymmetry(initial_field(cart32, 0.25, "offset-bump")) > 0.01


class TestOptimizerConfig:
    """Test OptimizerConfig validation."""

    def test_init_normalized(self):
        """Underscores and case are normalized."""
        assert OptimizerConfig(eps=0.1, gamma=0.0, mass=0.5, init="Radial_Bump").init == "radial-bump"

    @pytest.mark.parametrize("mass", [0.0, 1.0])
    def test_mass_range(self, mass):
        """The mass must lie strictly inside (0, 1)."""
        with pytest.raises(ValueError):
            OptimizerConfig(eps=0.1, gamma=0.0, mass=mass)


class TestMinimize:
    """Test the descent loop."""

    def test_trace_is_monotone(self, small_run):
        """Accepted iterates never increase J."""
        assert small_run.trace.is_monotone()
        assert len(small_run.trace.rows) == small_run.iterations + 1
        assert small_run.trace.rows[0].iter == 0

    def test_result_is_admissible(self, small_run, cart32):
        """The final iterate keeps the mass and the zero boundary layer."""
        phi = small_run.phase
        assert weighted_mean(phi) == pytest.approx(0.25, abs=1e-10)
        assert np.all(phi.values[cart32.boundary_layer] == 0.0)
        assert small_run.energy.j_value == pytest.approx(small_run.trace.rows[-1].J)

    def test_descent_reduces_objective(self, small_run):
        """At least one step is taken and J drops."""
        assert small_run.iterations >= 1
        assert small_run.trace.rows[-1].J < small_run.trace.rows[0].J

    def test_require_converged(self, cart32, obstacle, family):
        """An unfinished run refuses to certify itself."""
        config = OptimizerConfig(eps=0.1, gamma=0.01, mass=0.25, max_iter=1, tol=1e-14)
        result = minimize(config, cart32, obstacle, family)
        assert not result.converged
        with pytest.raises(OptimizationError):
            result.require_converged()

    def test_start_overrides_init(self, cart32, obstacle, family):
        """An explicit start is used as the first iterate."""
        start = initial_field(cart32, 0.25, "radial-bump")
        config = OptimizerConfig(eps=0.1, gamma=0.01, mass=0.25, max_iter=1)
        result = minimize(config, cart32, obstacle, family, start=start)
        assert result.trace.rows[0].asym == pytest.approx(asymmetry(start))


class TestCertificates:
    """Test certificates and the calibrated interface bound."""

    def test_certificate_fields(self, small_run, obstacle):
        """Certificates carry the diagnostics of the minimizer."""
        cert = certify_minimizer(small_run.phase, 0.1, 0.01, 0.1, obstacle, small_run.eigenpair)
        assert cert.mass == 0.25
        assert cert.alpha_delta == pytest.approx(obstacle.alpha_delta(0.1))
        assert cert.implied_constant == pytest.approx(cert.interface_measure * cert.alpha_delta * 0.01 / 0.1)
        assert cert.within_bound is None

    def test_calibration(self, small_run, obstacle):
        """The calibrated constant bounds every certificate it was fitted to."""
        certs = [
            certify_minimizer(small_run.phase, 0.1, 0.01, delta, obstacle, small_run.eigenpair)
            for delta in (0.05, 0.1, 0.2)
        ]
        constant = calibrate_interface_constant(certs)
        assert constant == max(c.implied_constant for c in certs)
        assert all(apply_calibration(c, constant).within_bound for c in certs)

    def test_zero_gamma_bound_is_infinite(self, small_run, obstacle):
        """Without the energy term the bound is vacuous."""
        cert = certify_minimizer(small_run.phase, 0.1, 0.0, 0.1, obstacle, small_run.eigenpair)
        assert math.isinf(apply_calibration(cert, 1.0).bound)

    def test_calibrate_empty(self):
        """At least one certificate is needed."""
        with pytest.raises(ValidationError):
            calibrate_interface_constant([])
