"""Tests for the symmetric-decreasing rearrangement."""

import math

import numpy as np
import pytest

from faberphase.exceptions import ValidationError
from faberphase.grid import ScalarField, build_cartesian_grid, weighted_mean
from faberphase.potential import Potential
from faberphase.rearrange import (
    RearrangementPlan,
    check_composition,
    check_hardy_littlewood,
    check_idempotence,
    check_integral_identity,
    check_level_sets,
    check_nonexpansivity,
    check_norm_preservation,
    check_permutation_oracles,
    check_polya_szego,
    rearrange,
    run_permutation_suite,
    run_rearrangement_suite,
)


@pytest.fixture
def rng():
    """Seeded generator."""
    return np.random.default_rng(7)


class TestPlan:
    """Test RearrangementPlan."""

    def test_sorts_by_distance(self):
        """The largest value goes to the closest cell."""
        plan = RearrangementPlan.from_distances([3.0, 1.0, 2.0])
        out = plan.apply(np.array([0.1, 0.2, 0.3]))
        assert out.tolist() == [0.1, 0.3, 0.2]

    def test_ties_by_index(self):
        """Equidistant cells are filled in index order."""
        plan = RearrangementPlan.from_distances([1.0, 1.0, 0.0])
        out = plan.apply(np.array([0.2, 0.5, 0.9]))
        assert out.tolist() == [0.5, 0.2, 0.9]

    def test_rejects_negative(self):
        """Negative values cannot be rearranged."""
        plan = RearrangementPlan.from_distances([0.0, 1.0])
        with pytest.raises(ValidationError, match="non-negative"):
            plan.apply(np.array([1.0, -0.5]))

    def test_rejects_non_permutation(self):
        """The order must be a permutation."""
        with pytest.raises(ValueError, match="permutation"):
            RearrangementPlan(order=[0, 0, 1])

    def test_cartesian_result_is_radially_decreasing(self, cart32, rng):
        """f* is non-increasing in the distance from the origin."""
        f = ScalarField(grid=cart32, values=rng.random(cart32.size))
        star = rearrange(f)
        order = np.argsort(cart32.squared_distance_units, kind="stable")
        assert np.all(np.diff(star.values[order]) <= 0.0)

    def test_radial_preserves_integral(self, radial2, rng):
        """The weighted variant keeps the integral and returns a decreasing profile."""
        f = ScalarField(grid=radial2, values=rng.random(radial2.size))
        star = rearrange(f)
        assert weighted_mean(star) == pytest.approx(weighted_mean(f), rel=1e-12)
        assert np.all(np.diff(star.values) <= 1e-12)

    def test_radial_plan_is_not_exact(self, radial2):
        """Exact identities refuse unequal shell weights."""
        f = ScalarField(grid=radial2, values=np.ones(radial2.size))
        with pytest.raises(ValidationError, match="equal cell weights"):
            check_norm_preservation(f)


class TestExactProperties:
    """Test the exact discrete identities and inequalities."""

    def test_norms(self, cart32, rng):
        """L1, L2 and Linf norms are preserved."""
        f = ScalarField(grid=cart32, values=rng.random(cart32.size))
        for p in (1, 2, math.inf):
            assert check_norm_preservation(f, p).passed

    def test_inequalities(self, rng):
        """Hardy-Littlewood and nonexpansivity hold on random vectors."""
        f, g = rng.random(50), rng.random(50)
        assert check_hardy_littlewood(f, g).passed
        assert check_nonexpansivity(f, g, "abs").passed
        assert check_nonexpansivity(f, g, "square").passed

    def test_identities(self, rng):
        """Level sets, composition, integral identity and idempotence."""
        g = np.round(rng.random(40) * 4.0) / 4.0
        big_psi = Potential.from_name("double-well").big_psi
        assert check_level_sets(g, [0.0, 0.25, 0.5]).passed
        assert check_composition(g, np.square).passed
        assert check_integral_identity(g, big_psi).passed
        assert check_idempotence(g).passed

    def test_invalid_norm(self, rng):
        """Only p in {1, 2, inf} is supported."""
        with pytest.raises(ValidationError):
            check_norm_preservation(rng.random(5), 3)

    def test_suite_has_no_violations(self, cart32, rng):
        """A seeded suite passes every check."""
        reports = run_rearrangement_suite(cart32, rng, 5, Potential.from_name("double-obstacle").big_psi)
        assert len(reports) == 55
        assert all(r.passed for r in reports)
        assert reports[-1].details["trial"] == 4


class TestPermutationOracles:
    """Test against exhaustive search over permutations."""

    def test_two_cells(self):
        """Pairing the larger values is optimal."""
        plan = RearrangementPlan.from_distances([0.0, 1.0])
        reports = check_permutation_oracles(np.array([0.2, 0.8]), np.array([0.9, 0.1]), plan)
        assert all(r.passed for r in reports)
        assert reports[0].rhs == pytest.approx(0.8 * 0.9 + 0.2 * 0.1)

    def test_suite(self, rng):
        """Seeded random instances agree with the oracles."""
        reports = run_permutation_suite(rng, 20, cells=6)
        assert len(reports) == 40
        assert all(r.passed for r in reports)

    def test_too_many_cells(self, rng):
        """Exhaustive search is limited to small instances."""
        plan = RearrangementPlan.from_distances(np.arange(9.0))
        with pytest.raises(ValidationError, match="too large"):
            check_permutation_oracles(rng.random(9), rng.random(9), plan)


class TestPolyaSzego:
    """Test the Dirichlet energy under rearrangement."""

    def test_zero_trace_bumps(self, cart64):
        """Two separated bumps vanishing near the boundary lose about half their energy."""
        x, y = cart64.points[:, 0], cart64.points[:, 1]
        left = np.maximum(0.0, 0.25 - np.hypot(x + 0.45, y)) ** 2
        right = np.maximum(0.0, 0.25 - np.hypot(x - 0.45, y)) ** 2
        report = check_polya_szego(ScalarField(grid=cart64, values=left + right))
        assert report.name == "polya_szego_dirichlet"
        assert report.passed
        assert report.lhs < 0.75 * report.rhs

    def test_free_boundary_counterexample(self, disk):
        """Without a zero trace the energy of the rearranged |x| grows under refinement."""
        energies = []
        for cells in (64, 128, 256):
            grid = build_cartesian_grid(disk, cells)
            report = check_polya_szego(ScalarField(grid=grid, values=grid.distances), boundary="free")
            assert report.rhs == pytest.approx(math.pi, rel=1e-2)
            energies.append(report.lhs)
        assert all(b / a - 1.0 >= 0.15 for a, b in zip(energies, energies[1:], strict=False))
        assert energies[-1] > math.pi
