"""Diffuse and sharp objectives.

J^eps(phi) = lambda1(-Laplace + b^eps(phi)) + gamma * E^eps(phi) with the
Ginzburg-Landau energy E^eps(phi) = int (eps/2)|grad phi|^2 + psi(phi)/eps,
and its sharp-interface counterpart
J^0(E) = lambda1(E) + gamma * c0 * (P_Omega(E) + contact(E)).
"""

from __future__ import annotations

import math

import numpy as np
import structlog
from scipy.special import jn_zeros

from .coefficient import CoefficientFamily
from .constants import DEFAULT_EIGEN_TOL, EIGEN_FK_SLACK, PS_SLACK_FRACTION
from .eigen import EigenPair, assemble, principal_eigenpair, sharp_eigenvalue
from .exceptions import ValidationError
from .grid import CartesianGrid, RadialGrid, ScalarField
from .models import EnergyBreakdown, InequalityReport, LimitEnergyBreakdown, ShapeRanking
from .potential import Potential
from .rearrange import rearrange
from .shapes import Ball, Rectangle, ShapeUnion, SharpShape
from .stencil import domain_stencil

logger = structlog.get_logger(__name__)


def _check_positive(name: str, value: float, allow_zero: bool = False) -> None:
    if not math.isfinite(value) or value < 0.0 or (value == 0.0 and not allow_zero):
        kind = "nonnegative" if allow_zero else "positive"
        raise ValidationError(f"{name} must be {kind}", details=f"{name}={value}")


def gl_energy(phi: ScalarField, eps: float, potential: Potential) -> EnergyBreakdown:
    """Ginzburg-Landau energy of ``phi`` split into gradient and potential terms."""
    _check_positive("eps", eps)
    stencil = domain_stencil(phi.grid)
    values = np.asarray(phi.values)
    gradient = 0.5 * eps * stencil.dirichlet_energy(values)
    pot = float(np.dot(phi.grid.weights, potential.psi(values))) / eps
    return EnergyBreakdown(gradient=gradient, potential=pot, total=gradient + pot)


def evaluate_objective(
    phi: ScalarField,
    eps: float,
    gamma: float,
    potential: Potential,
    coefficient: CoefficientFamily,
    tol: float = DEFAULT_EIGEN_TOL,
    start: np.ndarray | None = None,
) -> tuple[EnergyBreakdown, EigenPair]:
    """Objective breakdown together with the eigenpair it was computed from."""
    _check_positive("gamma", gamma, allow_zero=True)
    energy = gl_energy(phi, eps, potential)
    pair = principal_eigenpair(assemble(phi.grid, phi, coefficient, eps), tol=tol, start=start)
    breakdown = energy.model_copy(
        update={"lambda1": pair.lambda1, "j_value": pair.lambda1 + gamma * energy.total}
    )
    return breakdown, pair


def j_eps(
    phi: ScalarField,
    eps: float,
    gamma: float,
    potential: Potential,
    coefficient: CoefficientFamily,
    tol: float = DEFAULT_EIGEN_TOL,
) -> EnergyBreakdown:
    """J^eps_gamma(phi) = lambda1 + gamma * E^eps(phi)."""
    breakdown, _ = evaluate_objective(phi, eps, gamma, potential, coefficient, tol=tol)
    return breakdown


def first_variation(
    phi: ScalarField,
    eps: float,
    gamma: float,
    potential: Potential,
    coefficient: CoefficientFamily,
    eigenpair: EigenPair,
) -> ScalarField:
    """Weighted L2 gradient of J^eps_gamma at ``phi``, ignoring the constraints.

    The directional derivative along v is sum_i w_i g_i v_i with
    g = b'(phi) w^2 + gamma * (eps * (K phi) / weights + psi'(phi) / eps).
    """
    values = np.asarray(phi.values)
    w = np.asarray(eigenpair.w.values)
    g = np.asarray(coefficient.db_eps(eps, values)) * w * w
    if gamma != 0.0:
        stencil = domain_stencil(phi.grid)
        laplace = stencil.stiffness @ values / np.asarray(phi.grid.weights)
        g = g + gamma * (eps * laplace + np.asarray(potential.dpsi(values)) / eps)
    return phi.with_values(g)


def total_variation_big_psi(phi: ScalarField, potential: Potential) -> float:
    """Discrete integral of |grad Psi(phi)|."""
    stencil = domain_stencil(phi.grid)
    return stencil.total_variation(np.asarray(potential.big_psi(np.asarray(phi.values))))


def check_modica_mortola(
    phi: ScalarField,
    eps: float,
    potential: Potential,
    slack_fraction: float = PS_SLACK_FRACTION,
) -> InequalityReport:
    """Check int |grad Psi(phi)| <= E^eps(phi) up to a relative discretization slack."""
    energy = gl_energy(phi, eps, potential).total
    return InequalityReport(
        name="modica_mortola",
        lhs=total_variation_big_psi(phi, potential),
        rhs=energy,
        slack=slack_fraction * energy,
    )


def check_diffuse_faber_krahn(
    phi: ScalarField,
    eps: float,
    gamma: float,
    potential: Potential,
    coefficient: CoefficientFamily,
    tol: float = DEFAULT_EIGEN_TOL,
    eigen_slack: float = EIGEN_FK_SLACK,
    energy_slack: float = PS_SLACK_FRACTION,
) -> list[InequalityReport]:
    """Compare ``phi`` with its symmetric-decreasing rearrangement.

    Returns three reports: lambda1(phi*) <= lambda1(phi), E(phi*) <= E(phi)
    and J(phi*) <= J(phi), each with a relative slack.
    """
    star = rearrange(phi)
    plain, _ = evaluate_objective(phi, eps, gamma, potential, coefficient, tol=tol)
    sym, _ = evaluate_objective(star, eps, gamma, potential, coefficient, tol=tol)
    assert plain.lambda1 is not None and sym.lambda1 is not None
    assert plain.j_value is not None and sym.j_value is not None
    return [
        InequalityReport(
            name="diffuse_faber_krahn",
            lhs=sym.lambda1,
            rhs=plain.lambda1,
            slack=eigen_slack * plain.lambda1,
        ),
        InequalityReport(
            name="diffuse_isoperimetric",
            lhs=sym.total,
            rhs=plain.total,
            slack=energy_slack * plain.total,
        ),
        InequalityReport(
            name="objective_rearrangement",
            lhs=sym.j_value,
            rhs=plain.j_value,
            slack=eigen_slack * plain.lambda1 + energy_slack * gamma * plain.total,
        ),
    ]


def j_zero(
    shape: SharpShape,
    grid: RadialGrid | CartesianGrid,
    gamma: float,
    potential: Potential,
    tol: float = DEFAULT_EIGEN_TOL,
) -> LimitEnergyBreakdown:
    """Sharp-interface objective of ``shape``; lambda1 is inf when no cell lies inside."""
    _check_positive("gamma", gamma, allow_zero=True)
    pair = sharp_eigenvalue(grid, shape, tol=tol)
    c0 = potential.c0()
    total = c0 * (shape.relative_perimeter + shape.boundary_contact)
    return LimitEnergyBreakdown(
        lambda1=pair.lambda1,
        perimeter=shape.relative_perimeter,
        contact=shape.boundary_contact,
        c0=c0,
        total=total,
        j_value=pair.lambda1 + gamma * total,
    )


def ball_eigenvalue(radius: float, dimension: int) -> float:
    """Principal Dirichlet eigenvalue of the ball of the given radius."""
    if dimension == 2:
        return float(jn_zeros(0, 1)[0]) ** 2 / radius**2
    return math.pi**2 / radius**2


def analytic_eigenvalue(shape: SharpShape) -> float | None:
    """Closed-form Dirichlet eigenvalue for balls, rectangles and unions of them, else None."""
    n = shape.domain.dimension
    members = shape.descriptor.members if isinstance(shape.descriptor, ShapeUnion) else [shape.descriptor]
    values = []
    for member in members:
        if isinstance(member, Ball):
            values.append(ball_eigenvalue(member.radius, n))
        elif isinstance(member, Rectangle):
            values.append(math.pi**2 * (1.0 / member.width**2 + 1.0 / member.height**2))
        else:
            return None
    return min(values)


def faber_krahn_constant(dimension: int) -> float:
    """Scale-invariant value |B|^(2/n) lambda1(B) shared by all balls."""
    if dimension == 2:
        return math.pi * float(jn_zeros(0, 1)[0]) ** 2
    return (4.0 * math.pi / 3.0) ** (2.0 / 3.0) * math.pi**2


def faber_krahn_deficit(volume: float, lambda1: float, dimension: int) -> float:
    """|E|^(2/n) lambda1(E) minus the ball value; nonnegative for every set."""
    return volume ** (2.0 / dimension) * lambda1 - faber_krahn_constant(dimension)


def compare_shapes(
    shapes: list[SharpShape],
    grid: RadialGrid | CartesianGrid,
    gamma: float,
    potential: Potential,
    tol: float = DEFAULT_EIGEN_TOL,
) -> list[ShapeRanking]:
    """Rank shapes by their sharp-interface objective, smallest first."""
    n = grid.domain.dimension
    rows = []
    for shape in shapes:
        limit = j_zero(shape, grid, gamma, potential, tol=tol)
        rows.append((limit.j_value, shape, limit))
        logger.info("Shape evaluated", shape=shape.label(), lambda1=limit.lambda1, J=limit.j_value)
    rows.sort(key=lambda item: item[0])
    return [
        ShapeRanking(
            rank=rank,
            shape=shape.label(),
            volume=shape.volume,
            lambda_zero=limit.lambda1,
            perimeter=limit.perimeter,
            contact=limit.contact,
            J_zero=limit.j_value,
            fk_deficit=faber_krahn_deficit(shape.volume, limit.lambda1, n),
            iso_ratio=shape.isoperimetric_ratio(),
        )
        for rank, (_, shape, limit) in enumerate(rows, start=1)
    ]
