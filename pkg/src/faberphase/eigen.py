"""Principal eigenpair of -Laplace + b^eps(phi) with Dirichlet conditions.

The discrete problem is the generalized symmetric eigenproblem
(K + W diag(b)) u = lambda W u with K the stencil stiffness and W the
quadrature weights. The smallest eigenvalue is found by inverse power
iteration from the all-ones vector; each step solves the shifted-free
system with Jacobi-preconditioned conjugate gradients.
"""

from __future__ import annotations

import math
from typing import Any

import numpy as np
import scipy.sparse as sp
import structlog
from pydantic import BaseModel, ConfigDict, Field
from scipy.sparse.linalg import LinearOperator, cg

from .coefficient import CoefficientFamily
from .constants import DEFAULT_EIGEN_MAX_ITER, DEFAULT_EIGEN_TOL, MAX_EIGEN_TOL, MIN_SHARP_CELLS, SIGN_SLACK
from .exceptions import SolverError, ValidationError
from .grid import CartesianGrid, RadialGrid, ScalarField
from .shapes import SharpShape
from .stencil import Stencil, build_stencil, domain_stencil

logger = structlog.get_logger(__name__)


class OperatorHandle:
    """Assembled operator on the active degrees of freedom of a stencil.

    Args:
        grid: Grid the operator lives on
        stencil: Stencil describing the Laplacian
        potential: Nonnegative potential value per active dof
    """

    def __init__(self, grid: RadialGrid | CartesianGrid, stencil: Stencil, potential: np.ndarray) -> None:
        potential = np.asarray(potential, dtype=float)
        if potential.shape != (stencil.size,):
            raise ValidationError("Potential size does not match the stencil")
        if np.any(potential < 0.0) or not np.all(np.isfinite(potential)):
            raise ValidationError("Potential must be finite and nonnegative")
        self.grid = grid
        self.stencil = stencil
        self.potential = potential
        self.weights = np.asarray(grid.weights)[stencil.nodes]
        self.matrix = sp.csr_matrix(stencil.stiffness + sp.diags(self.weights * potential))

    @property
    def size(self) -> int:
        """Number of unknowns."""
        return self.stencil.size

    def bilinear(self, u: np.ndarray, v: np.ndarray) -> float:
        """a(u, v) = u^T (K + W b) v."""
        return float(u @ (self.matrix @ v))

    def mass(self, u: np.ndarray, v: np.ndarray) -> float:
        """Weighted inner product u^T W v."""
        return float(np.dot(self.weights * u, v))

    def quotient(self, u: np.ndarray) -> float:
        """Rayleigh quotient a(u, u) / ||u||^2_W."""
        return self.bilinear(u, u) / self.mass(u, u)

    def apply(self, u: np.ndarray) -> np.ndarray:
        """Operator action (-Laplace_h u + b u) at every active dof."""
        return (self.matrix @ u) / self.weights

    def embed(self, u: np.ndarray) -> np.ndarray:
        """Extend active-dof values by zero to the whole grid."""
        out = np.zeros(self.grid.size)
        out[self.stencil.nodes] = u
        return out


class EigenPair(BaseModel):
    """Principal eigenvalue with its positive, unit-norm eigenfunction.

    Attributes:
        lambda1: Principal eigenvalue (math.inf for a trivial space)
        w: Eigenfunction on the full grid, zero off the active dofs
        residual: Relative residual ||A w - lambda w||_W / lambda
        iterations: Outer inverse-iteration steps
        trivial: True when no degree of freedom was active
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lambda1: float
    w: ScalarField
    residual: float = Field(default=0.0, ge=0)
    iterations: int = Field(default=0, ge=0)
    trivial: bool = False


def assemble(
    grid: RadialGrid | CartesianGrid,
    phi: ScalarField,
    coefficient: CoefficientFamily,
    eps: float,
) -> OperatorHandle:
    """Assemble -Laplace + b^eps(phi) on the full ball.

    Raises:
        ValidationError: If the field lives on another grid or leaves [0, 1]
    """
    if phi.grid != grid:
        raise ValidationError("Phase field does not live on this grid")
    b = np.asarray(coefficient.b_eps(eps, np.asarray(phi.values)))
    return operator_from_potential(grid, b)


def operator_from_potential(grid: RadialGrid | CartesianGrid, potential: Any) -> OperatorHandle:
    """Operator -Laplace + potential on the full ball for an explicit potential."""
    stencil = domain_stencil(grid)
    values = np.broadcast_to(np.asarray(potential, dtype=float), (grid.size,))
    return OperatorHandle(grid, stencil, np.array(values))


def principal_eigenpair(
    op: OperatorHandle,
    tol: float = DEFAULT_EIGEN_TOL,
    max_iter: int = DEFAULT_EIGEN_MAX_ITER,
    start: np.ndarray | None = None,
) -> EigenPair:
    """Smallest eigenvalue and positive-normalized eigenfunction by inverse iteration.

    Args:
        op: Assembled operator
        tol: Relative residual tolerance in (0, 1e-4]
        max_iter: Maximum outer iterations
        start: Optional positive start vector on the full grid (warm start)

    Raises:
        ValidationError: If tol is out of range
        SolverError: On non-convergence or a sign-indefinite eigenvector
    """
    if not 0.0 < tol <= MAX_EIGEN_TOL:
        raise ValidationError("Eigen tolerance must lie in (0, 1e-4]", details=f"tol={tol}")

    # symmetric scaling W^{-1/2} A W^{-1/2} turns the W-weighted problem into a standard one
    scale = 1.0 / np.sqrt(op.weights)
    scaled = sp.csr_matrix(sp.diags(scale) @ op.matrix @ sp.diags(scale))
    diag = scaled.diagonal()
    precond = LinearOperator(scaled.shape, matvec=lambda x: x / diag, dtype=float)

    if start is not None:
        v = np.abs(np.asarray(start, dtype=float)[op.stencil.nodes]) / scale
    else:
        v = 1.0 / scale
    v = v / np.linalg.norm(v)
    lam = float(v @ (scaled @ v))
    residual = math.inf

    for iteration in range(1, max_iter + 1):
        x, info = cg(scaled, v, x0=v / lam, rtol=0.1 * tol, atol=0.0, M=precond, maxiter=10 * op.size)
        if info < 0:
            raise SolverError("Inner CG breakdown", iterations=iteration, residual=residual)
        v = x / np.linalg.norm(x)
        av = scaled @ v
        lam = float(v @ av)
        residual = float(np.linalg.norm(av - lam * v)) / lam
        if residual <= tol:
            break
    else:
        raise SolverError(
            "Eigensolver did not converge",
            details=f"residual {residual:.3e} > tol {tol:.1e}",
            iterations=max_iter,
            residual=residual,
        )

    if np.sum(v) < 0.0:
        v = -v
    # exponentially small entries under a large penalty come back as round-off of either sign
    floor = -SIGN_SLACK * tol * float(np.max(np.abs(v)))
    if np.any(v < floor):
        raise SolverError(
            "Principal eigenvector is sign-indefinite",
            details=f"{int(np.sum(v < floor))} entries below {floor:.3e}",
            iterations=iteration,
            residual=residual,
        )
    v = np.maximum(v, np.finfo(float).tiny)

    logger.debug("Eigensolve finished", lambda1=lam, iterations=iteration, residual=residual)
    return EigenPair(
        lambda1=lam,
        w=ScalarField(grid=op.grid, values=op.embed(v * scale)),
        residual=residual,
        iterations=iteration,
    )


def sharp_eigenvalue(
    grid: RadialGrid | CartesianGrid,
    shape: SharpShape,
    tol: float = DEFAULT_EIGEN_TOL,
    max_iter: int = DEFAULT_EIGEN_MAX_ITER,
) -> EigenPair:
    """Dirichlet eigenpair of the Laplacian on the part of the grid inside ``shape``.

    Returns lambda1 = inf with a zero eigenfunction when no cell lies inside.

    Raises:
        ValidationError: If the shape does not fit the grid or covers fewer than four cells
    """
    if shape.domain != grid.domain:
        raise ValidationError("Shape and grid use different domains")
    if isinstance(grid, RadialGrid) and not shape.is_radial:
        raise ValidationError("Radial grids only support centered radial shapes", details=shape.label())
    stencil = build_stencil(grid, shape.signed_distance)
    if stencil.size == 0:
        logger.info("Shape covers no cells; eigenvalue is infinite", shape=shape.label())
        return EigenPair(
            lambda1=math.inf, w=ScalarField(grid=grid, values=np.zeros(grid.size)), trivial=True
        )
    if stencil.size < MIN_SHARP_CELLS:
        raise ValidationError(
            "Shape is under-resolved", details=f"{stencil.size} < {MIN_SHARP_CELLS} active cells"
        )
    op = OperatorHandle(grid, stencil, np.zeros(stencil.size))
    return principal_eigenpair(op, tol=tol, max_iter=max_iter)
