"""Tests for the finite-volume stencils."""

import math

import numpy as np
import pytest
from scipy.sparse.linalg import eigsh

from faberphase.grid import build_radial_grid
from faberphase.shapes import Ball, SharpShape
from faberphase.stencil import build_stencil, domain_stencil


class TestStiffness:
    """Test the assembled stiffness matrix."""

    def test_symmetric_positive(self, cart32):
        """K is symmetric with a positive smallest eigenvalue."""
        k = domain_stencil(cart32).stiffness
        assert abs(k - k.T).max() < 1e-14
        smallest = eigsh(k.tocsc(), k=1, sigma=0.0, which="LM", return_eigenvectors=False)
        assert smallest[0] > 0.0

    def test_energy_matches_quadratic_form(self, cart32):
        """u^T K u equals the discrete Dirichlet energy."""
        stencil = domain_stencil(cart32)
        u = np.random.default_rng(3).random(cart32.size)
        assert stencil.dirichlet_energy(u) == pytest.approx(float(u @ (stencil.stiffness @ u)), rel=1e-12)

    def test_domain_stencil_is_cached(self, cart32):
        """The full-ball stencil is built once per grid."""
        assert domain_stencil(cart32) is domain_stencil(cart32)


class TestEnergies:
    """Test the discrete energies against closed forms."""

    def test_radial_energy_of_linear_field(self, disk):
        """The free energy of |x| is the disk area."""
        grid = build_radial_grid(disk, 200)
        stencil = domain_stencil(grid)
        assert stencil.free_energy(grid.nodes) == pytest.approx(math.pi, rel=1e-2)

    def test_cartesian_free_energy_of_distance(self, cart64):
        """The free energy of |x| stays close to pi on a Cartesian grid."""
        stencil = domain_stencil(cart64)
        assert stencil.free_energy(cart64.distances) == pytest.approx(math.pi, rel=3e-2)

    def test_total_variation_of_ramp(self, disk):
        """The total variation of |x| on a radial grid is the disk area."""
        grid = build_radial_grid(disk, 400)
        assert domain_stencil(grid).total_variation(grid.nodes) == pytest.approx(math.pi, rel=1e-2)

    def test_constant_has_no_free_energy(self, cart32):
        """Constants have zero free energy but positive Dirichlet energy."""
        stencil = domain_stencil(cart32)
        ones = np.ones(cart32.size)
        assert stencil.free_energy(ones) == pytest.approx(0.0, abs=1e-14)
        assert stencil.dirichlet_energy(ones) > 0.0


class TestShapeStencil:
    """Test stencils restricted to a shape."""

    def test_sub_ball_has_fewer_dofs(self, cart64, disk):
        """Restricting to a ball of radius 1/2 keeps roughly a quarter of the cells."""
        shape = SharpShape(descriptor=Ball(radius=0.5), domain=disk)
        stencil = build_stencil(cart64, shape.signed_distance)
        assert 0.2 * cart64.size < stencil.size < 0.3 * cart64.size
        assert np.all(cart64.distances[stencil.nodes] < 0.5)
