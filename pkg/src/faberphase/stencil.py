"""Finite-volume stencils for the Dirichlet Laplacian on balls and sub-regions.

A stencil lists the interior faces between active degrees of freedom and
the boundary crossings where an active cell meets the zero level of a
signed distance. The crossing sits at a fraction theta of the cell spacing
and carries the homogeneous Dirichlet condition, which keeps the assembled
matrix symmetric. The radial stencil is the conservative form of
(1/r^{n-1})(r^{n-1} u')' with face areas as metric factors; no face exists
at r = 0.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp

from .constants import THETA_MIN
from .grid import CartesianGrid, RadialGrid

SignedDistance = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Stencil:
    """Face and boundary-crossing description of the discrete Laplacian.

    Attributes:
        kind: Grid kind the stencil was built for
        h: Grid spacing
        nodes: Grid index of every active degree of freedom
        face_i: First active dof of each interior face
        face_j: Second active dof of each interior face
        face_coef: Stiffness coefficient of each interior face
        face_area: Measure of each interior face
        bnd_i: Active dof adjacent to each boundary crossing
        bnd_coef: Diagonal stiffness contribution of each crossing
        bnd_free_coef: Weight of the one-sided extrapolated energy of each crossing
        bnd_opposite: Active dof opposite to the crossing, or -1
    """

    kind: str
    h: float
    nodes: np.ndarray
    face_i: np.ndarray
    face_j: np.ndarray
    face_coef: np.ndarray
    face_area: np.ndarray
    bnd_i: np.ndarray
    bnd_coef: np.ndarray
    bnd_free_coef: np.ndarray
    bnd_opposite: np.ndarray

    @property
    def size(self) -> int:
        """Number of active degrees of freedom."""
        return int(self.nodes.shape[0])

    @cached_property
    def stiffness(self) -> sp.csr_matrix:
        """Symmetric positive definite stiffness matrix K with u^T K u the Dirichlet energy."""
        n = self.size
        c = self.face_coef
        rows = np.concatenate([self.face_i, self.face_j, self.face_i, self.face_j, self.bnd_i])
        cols = np.concatenate([self.face_i, self.face_j, self.face_j, self.face_i, self.bnd_i])
        data = np.concatenate([c, c, -c, -c, self.bnd_coef])
        return sp.csr_matrix(sp.coo_matrix((data, (rows, cols)), shape=(n, n)))

    def dirichlet_energy(self, u: np.ndarray) -> float:
        """Discrete integral of |grad u|^2 with zero boundary values."""
        du = u[self.face_i] - u[self.face_j]
        ub = u[self.bnd_i]
        return float(np.dot(self.face_coef, du * du) + np.dot(self.bnd_coef, ub * ub))

    def free_energy(self, u: np.ndarray) -> float:
        """Discrete integral of |grad u|^2 without imposing a boundary trace.

        Each crossing segment takes the one-sided difference towards the
        opposite neighbor; crossings without one contribute nothing.
        """
        du = u[self.face_i] - u[self.face_j]
        total = float(np.dot(self.face_coef, du * du))
        has_opp = self.bnd_opposite >= 0
        if np.any(has_opp):
            db = u[self.bnd_i[has_opp]] - u[self.bnd_opposite[has_opp]]
            total += float(np.dot(self.bnd_free_coef[has_opp], db * db))
        return total

    def total_variation(self, u: np.ndarray) -> float:
        """Discrete integral of |grad u| over interior faces."""
        du = u[self.face_i] - u[self.face_j]
        if self.kind == "radial":
            return float(np.dot(self.face_area, np.abs(du)))
        # cell-centered isotropic norm from the squared differences of adjacent faces
        squares = np.zeros(self.size)
        np.add.at(squares, self.face_i, du * du)
        np.add.at(squares, self.face_j, du * du)
        return float(self.h * np.sum(np.sqrt(0.5 * squares)))


def _theta(sd_active: np.ndarray, sd_inactive: np.ndarray) -> np.ndarray:
    gap = np.maximum(sd_active - sd_inactive, np.finfo(float).tiny)
    return np.clip(sd_active / gap, THETA_MIN, 1.0)


def _radial_stencil(grid: RadialGrid, shape_sd: SignedDistance | None) -> Stencil:
    domain = grid.domain
    n_nodes = grid.node_count
    h = grid.h
    r = (np.arange(n_nodes + 1) + 0.5) * h  # last entry is the ghost beyond R
    sd = domain.radius - r
    if shape_sd is not None:
        pts = np.zeros((n_nodes + 1, domain.dimension))
        pts[:, 0] = r
        sd = np.minimum(sd, shape_sd(pts))
    active = sd > 0.0
    active[-1] = False

    dof = np.full(n_nodes + 1, -1, dtype=np.int64)
    dof[active] = np.arange(int(active.sum()))

    k = np.arange(n_nodes)
    a, b = active[:-1], active[1:]

    both = a & b
    face_area = domain.sphere_area((k[both] + 1) * h)

    # crossing between an active node and its inactive outer neighbor
    out = a & ~b
    th_out = _theta(sd[:-1][out], sd[1:][out])
    rc_out = r[:-1][out] + th_out * h
    opp_out = np.where(k[out] >= 1, dof[np.maximum(k[out] - 1, 0)], -1)
    mid_out = r[:-1][out] + 0.5 * th_out * h

    # crossing between an active node and its inactive inner neighbor
    inn = ~a & b
    th_in = _theta(sd[1:][inn], sd[:-1][inn])
    rc_in = r[1:][inn] - th_in * h
    nxt = k[inn] + 2
    opp_in = np.where(nxt <= n_nodes - 1, dof[np.minimum(nxt, n_nodes)], -1)
    mid_in = r[1:][inn] - 0.5 * th_in * h

    theta = np.concatenate([th_out, th_in])
    return Stencil(
        kind="radial",
        h=h,
        nodes=np.flatnonzero(active[:-1]),
        face_i=dof[:-1][both],
        face_j=dof[1:][both],
        face_coef=face_area / h,
        face_area=face_area,
        bnd_i=np.concatenate([dof[:-1][out], dof[1:][inn]]),
        bnd_coef=domain.sphere_area(np.concatenate([rc_out, rc_in])) / (theta * h),
        bnd_free_coef=domain.sphere_area(np.concatenate([mid_out, mid_in])) * theta / h,
        bnd_opposite=np.concatenate([opp_out, opp_in]).astype(np.int64),
    )


def _cartesian_stencil(grid: CartesianGrid, shape_sd: SignedDistance | None) -> Stencil:
    m = grid.cells_per_axis
    h = grid.h
    radius = grid.domain.radius
    c = (np.arange(m + 2) - 0.5) * h - radius
    x, y = np.meshgrid(c, c, indexing="ij")
    sd = radius - np.hypot(x, y)
    active = np.pad(grid.mask, 1, constant_values=False)
    if shape_sd is not None:
        sd = np.minimum(sd, shape_sd(np.stack([x, y], axis=-1)))
        active = active & (sd > 0.0)

    grid_index = np.full((m + 2, m + 2), -1, dtype=np.int64)
    grid_index[1:-1, 1:-1][grid.mask] = np.arange(grid.size)
    dof = np.full((m + 2, m + 2), -1, dtype=np.int64)
    dof[active] = np.arange(int(active.sum()))

    face_i, face_j = [], []
    bnd_i, bnd_theta, bnd_opp = [], [], []
    for axis in (0, 1):
        lo = (slice(0, -1), slice(None)) if axis == 0 else (slice(None), slice(0, -1))
        hi = (slice(1, None), slice(None)) if axis == 0 else (slice(None), slice(1, None))
        prev = np.full_like(dof, -1)
        nxt = np.full_like(dof, -1)
        prev[hi] = dof[lo]
        nxt[lo] = dof[hi]

        a, b = active[lo], active[hi]
        sa, sb = sd[lo], sd[hi]
        da, db = dof[lo], dof[hi]

        both = a & b
        face_i.append(da[both])
        face_j.append(db[both])

        ab = a & ~b
        bnd_i.append(da[ab])
        bnd_theta.append(_theta(sa[ab], sb[ab]))
        bnd_opp.append(prev[lo][ab])

        ba = ~a & b
        bnd_i.append(db[ba])
        bnd_theta.append(_theta(sb[ba], sa[ba]))
        bnd_opp.append(nxt[hi][ba])

    fi = np.concatenate(face_i)
    theta = np.concatenate(bnd_theta)
    return Stencil(
        kind="cartesian",
        h=h,
        nodes=grid_index[active],
        face_i=fi,
        face_j=np.concatenate(face_j),
        face_coef=np.ones(fi.shape[0]),
        face_area=np.full(fi.shape[0], h),
        bnd_i=np.concatenate(bnd_i),
        bnd_coef=1.0 / theta,
        bnd_free_coef=theta,
        bnd_opposite=np.concatenate(bnd_opp),
    )


def build_stencil(
    grid: RadialGrid | CartesianGrid, shape_sd: SignedDistance | None = None
) -> Stencil:
    """Build the stencil of the ball, or of its intersection with {shape_sd > 0}.

    Args:
        grid: Radial or Cartesian grid
        shape_sd: Optional signed distance (positive inside) restricting the region

    Returns:
        Stencil over the active degrees of freedom
    """
    if isinstance(grid, RadialGrid):
        return _radial_stencil(grid, shape_sd)
    return _cartesian_stencil(grid, shape_sd)


@lru_cache(maxsize=16)
def domain_stencil(grid: RadialGrid | CartesianGrid) -> Stencil:
    """Cached stencil of the full ball; every grid dof is active."""
    return build_stencil(grid)
