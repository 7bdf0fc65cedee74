"""Projected gradient descent for J^eps_gamma over admissible phase fields.

The admissible set is the box [0, 1] intersected with the mean constraint
and the zero boundary layer. Every iterate is the exact weighted Euclidean
projection of a gradient step onto that set, with Armijo backtracking on the
projected arc.
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.optimize import bisect

from .coefficient import CoefficientFamily
from .constants import (
    ARMIJO_C,
    BACKTRACK_FACTOR,
    DEFAULT_EIGEN_TOL,
    DEFAULT_OPT_MAX_ITER,
    DEFAULT_PG_TOL,
    MASS_TOL,
    MIN_STEP_RATIO,
    STEP_GROWTH,
)
from .eigen import EigenPair
from .exceptions import InfeasibleMassError, OptimizationError, ValidationError
from .grid import CartesianGrid, PhaseField, RadialGrid, ScalarField, interface_measure, l1_distance
from .models import Certificate, EnergyBreakdown, OptimizerTrace, TraceRow
from .objective import evaluate_objective, first_variation
from .potential import Potential
from .rearrange import rearrange, smooth_random_values

logger = structlog.get_logger(__name__)

InitKind = Literal["radial-bump", "offset-bump", "seeded-noise"]
INIT_KINDS: tuple[str, ...] = ("radial-bump", "offset-bump", "seeded-noise")


class OptimizerConfig(BaseModel):
    """Parameters of one minimization run.

    Attributes:
        eps: Interface width parameter
        gamma: Weight of the Ginzburg-Landau energy
        mass: Prescribed weighted mean m in (0, 1)
        max_iter: Maximum accepted iterations
        tol: Stop tolerance on the projected-gradient norm
        eigen_tol: Relative residual tolerance of every eigensolve
        init: Initial field kind
        initial_step: First trial step; 1 / beta^eps when omitted
        seed: Seed for ``seeded-noise`` starts
    """

    model_config = ConfigDict(frozen=True)

    eps: float = Field(..., gt=0)
    gamma: float = Field(..., ge=0)
    mass: float = Field(..., gt=0, lt=1)
    max_iter: int = Field(default=DEFAULT_OPT_MAX_ITER, ge=1)
    tol: float = Field(default=DEFAULT_PG_TOL, gt=0)
    eigen_tol: float = Field(default=DEFAULT_EIGEN_TOL, gt=0, le=1e-4)
    init: InitKind = "offset-bump"
    initial_step: float | None = Field(default=None, gt=0)
    armijo: float = Field(default=ARMIJO_C, gt=0, lt=1)
    backtrack: float = Field(default=BACKTRACK_FACTOR, gt=0, lt=1)
    seed: int = 0

    @field_validator("init", mode="before")
    @classmethod
    def normalize_init(cls, v: str) -> str:
        """Accept underscores and any case."""
        return str(v).strip().lower().replace("_", "-")


class OptimizationResult(BaseModel):
    """Final iterate of a minimization run with its history.

    Attributes:
        phase: Best admissible iterate
        trace: Accepted iterations, starting with the initial field
        converged: Whether the projected-gradient norm reached the tolerance
        eigenpair: Eigenpair of ``phase``
        energy: Objective breakdown of ``phase``
        iterations: Accepted steps taken
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    phase: PhaseField
    trace: OptimizerTrace
    converged: bool
    eigenpair: EigenPair
    energy: EnergyBreakdown
    iterations: int

    def require_converged(self) -> OptimizationResult:
        """Return self, or raise if the run stopped early.

        Raises:
            OptimizationError: If the tolerance was not reached
        """
        if not self.converged:
            last = self.trace.rows[-1].pgnorm if self.trace.rows else math.nan
            raise OptimizationError(
                "Optimizer stopped before reaching the tolerance",
                details=f"pgnorm={last:.3e}",
                iterations=self.iterations,
            )
        return self


def _interior_mask(grid: RadialGrid | CartesianGrid) -> np.ndarray:
    mask = np.ones(grid.size, dtype=bool)
    mask[grid.boundary_layer] = False
    return mask


def project_onto_box_and_mass(
    values: np.ndarray, weights: np.ndarray, interior: np.ndarray, mass: float
) -> np.ndarray:
    """Weighted Euclidean projection onto {0 <= v <= 1, mean = mass, v = 0 off interior}.

    The projection is clamp(values + mu, 0, 1) on the interior, with mu found by
    bisection on the monotone mean.

    Raises:
        InfeasibleMassError: If the interior cannot carry the requested mass
    """
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    total = float(np.sum(weights))
    sub = values[interior]
    sub_w = weights[interior]
    attainable = float(np.sum(sub_w)) / total
    if not 0.0 < mass < attainable:
        logger.warning("Mass projection infeasible", target=mass, attainable=attainable)
        raise InfeasibleMassError(
            "Target mass cannot be reached",
            details=f"m={mass} must lie in (0, {attainable:.6g})",
            target=mass,
            attainable=attainable,
        )

    def excess(mu: float) -> float:
        return float(np.dot(sub_w, np.clip(sub + mu, 0.0, 1.0))) / total - mass

    lo = -float(np.max(sub))
    hi = 1.0 - float(np.min(sub))
    mu = bisect(excess, lo, hi, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=400)
    out = np.zeros_like(values)
    out[interior] = np.clip(sub + mu, 0.0, 1.0)
    return out


def project_admissible(f: ScalarField, mass: float) -> PhaseField:
    """Closest admissible phase field to ``f`` in the weighted L2 norm.

    Admissible inputs are returned unchanged.
    """
    grid = f.grid
    values = np.asarray(f.values)
    mean = float(np.dot(grid.weights, values)) / grid.total_weight
    if (
        np.all(values >= 0.0)
        and np.all(values <= 1.0)
        and np.all(values[grid.boundary_layer] == 0.0)
        and abs(mean - mass) <= MASS_TOL
    ):
        return PhaseField(grid=grid, values=values, mass=mass)
    projected = project_onto_box_and_mass(values, grid.weights, _interior_mask(grid), mass)
    return PhaseField(grid=grid, values=projected, mass=mass)


def initial_field(
    grid: RadialGrid | CartesianGrid,
    mass: float,
    init: str,
    rng: np.random.Generator | None = None,
) -> PhaseField:
    """Admissible starting field.

    ``radial-bump`` is centered, ``offset-bump`` is shifted along the first
    axis by 0.3 R (Cartesian grids only), ``seeded-noise`` is a smooth random
    field drawn from ``rng``.

    Raises:
        ValidationError: For an unknown kind or an offset start on a radial grid
    """
    radius = grid.domain.radius
    points = grid.points
    if init == "radial-bump":
        values = np.exp(-np.sum(points**2, axis=1) / (2.0 * (0.35 * radius) ** 2))
    elif init == "offset-bump":
        if isinstance(grid, RadialGrid):
            raise ValidationError("An offset start needs a Cartesian grid", details="use radial-bump")
        center = np.array([0.3 * radius, 0.0])
        values = np.exp(-np.sum((points - center) ** 2, axis=1) / (2.0 * (0.3 * radius) ** 2))
    elif init == "seeded-noise":
        rng = rng if rng is not None else np.random.default_rng()
        values = smooth_random_values(rng, points, radius)
    else:
        raise ValidationError("Unknown initial field", details=f"{init!r}; expected one of {INIT_KINDS}")
    return project_admissible(ScalarField(grid=grid, values=values), mass)


def random_admissible_field(
    grid: RadialGrid | CartesianGrid, mass: float, rng: np.random.Generator
) -> PhaseField:
    """Smooth random admissible field for property tests."""
    return project_admissible(
        ScalarField(grid=grid, values=smooth_random_values(rng, grid.points, grid.domain.radius)), mass
    )


def asymmetry(phi: ScalarField) -> float:
    """||phi - phi*||_L1 / |Omega|."""
    return l1_distance(phi, rearrange(phi)) / phi.grid.total_weight


def _objective(breakdown: EnergyBreakdown) -> float:
    return breakdown.j_value if breakdown.j_value is not None else math.inf


def _weighted_norm(values: np.ndarray, weights: np.ndarray, total: float) -> float:
    return math.sqrt(float(np.dot(weights, values * values)) / total)


def minimize(
    config: OptimizerConfig,
    grid: RadialGrid | CartesianGrid,
    potential: Potential,
    coefficient: CoefficientFamily,
    start: PhaseField | None = None,
) -> OptimizationResult:
    """Minimize J^eps_gamma from ``start`` or from the configured initial field.

    Args:
        config: Optimizer parameters
        grid: Grid to optimize on
        potential: Phase-field potential
        coefficient: Coefficient family b^eps
        start: Optional admissible start, overriding ``config.init``

    Returns:
        The best iterate; ``converged`` is False when max_iter was reached or
        no step along the projected arc decreased J.

    Raises:
        SolverError: If an eigensolve fails
    """
    eps, gamma, mass = config.eps, config.gamma, config.mass
    if start is None:
        phi = initial_field(grid, mass, config.init, np.random.default_rng(config.seed))
    else:
        phi = project_admissible(start, mass)
    weights = np.asarray(grid.weights)
    total = grid.total_weight
    interior = _interior_mask(grid)
    ref_step = config.initial_step if config.initial_step is not None else 1.0 / coefficient.beta(eps)

    energy, pair = evaluate_objective(phi, eps, gamma, potential, coefficient, tol=config.eigen_tol)
    trace = OptimizerTrace()

    def projected_gradient(values: np.ndarray, grad: np.ndarray) -> float:
        target = project_onto_box_and_mass(values - ref_step * grad, weights, interior, mass)
        return _weighted_norm(target - values, weights, total) / ref_step

    grad = np.asarray(first_variation(phi, eps, gamma, potential, coefficient, pair).values)
    pgnorm = projected_gradient(np.asarray(phi.values), grad)
    trace.append(
        TraceRow(
            iter=0,
            J=_objective(energy),
            lambda1=pair.lambda1,
            E=energy.total,
            step=0.0,
            pgnorm=pgnorm,
            asym=asymmetry(phi),
        )
    )
    logger.info("Optimizer started", eps=eps, gamma=gamma, mass=mass, init=config.init, J=energy.j_value)

    step = ref_step
    converged = pgnorm <= config.tol
    iterations = 0
    while not converged and iterations < config.max_iter:
        values = np.asarray(phi.values)
        j_now = _objective(energy)
        accepted = False
        while step >= MIN_STEP_RATIO * ref_step:
            trial_values = project_onto_box_and_mass(values - step * grad, weights, interior, mass)
            direction = trial_values - values
            decrease = float(np.dot(weights, grad * direction))
            if decrease >= 0.0:
                break
            trial = PhaseField(grid=grid, values=trial_values, mass=mass)
            trial_energy, trial_pair = evaluate_objective(
                trial, eps, gamma, potential, coefficient, tol=config.eigen_tol, start=pair.w.values
            )
            if _objective(trial_energy) <= j_now + config.armijo * decrease:
                phi, energy, pair = trial, trial_energy, trial_pair
                accepted = True
                break
            step *= config.backtrack
        if not accepted:
            logger.warning("Line search found no descent", iteration=iterations, pgnorm=pgnorm)
            break

        iterations += 1
        grad = np.asarray(first_variation(phi, eps, gamma, potential, coefficient, pair).values)
        pgnorm = projected_gradient(np.asarray(phi.values), grad)
        trace.append(
            TraceRow(
                iter=iterations,
                J=_objective(energy),
                lambda1=pair.lambda1,
                E=energy.total,
                step=step,
                pgnorm=pgnorm,
                asym=asymmetry(phi),
            )
        )
        logger.debug("Optimizer step", iteration=iterations, J=energy.j_value, step=step, pgnorm=pgnorm)
        converged = pgnorm <= config.tol
        step = min(step * STEP_GROWTH, ref_step)

    if not converged:
        logger.warning("Optimizer stopped early", iterations=iterations, pgnorm=pgnorm, tol=config.tol)
    logger.info(
        "Optimizer finished",
        iterations=iterations,
        converged=converged,
        J=energy.j_value,
        lambda1=pair.lambda1,
        asym=trace.rows[-1].asym,
    )
    return OptimizationResult(
        phase=phi,
        trace=trace,
        converged=converged,
        eigenpair=pair,
        energy=energy,
        iterations=iterations,
    )


def certify_minimizer(
    phi: PhaseField,
    eps: float,
    gamma: float,
    delta: float,
    potential: Potential,
    eigenpair: EigenPair,
    calibrated_constant: float | None = None,
    converged: bool = True,
    iterations: int = 0,
    seed: int | None = None,
) -> Certificate:
    """Symmetry and interface diagnostics of a computed minimizer.

    Raises:
        ValidationError: If delta is outside (0, 1/2)
    """
    measure = interface_measure(phi, delta)
    alpha = potential.alpha_delta(delta)
    implied = measure * alpha * gamma / eps
    w = eigenpair.w
    certificate = Certificate(
        eps=eps,
        gamma=gamma,
        delta=delta,
        mass=phi.mass,
        asymmetry=asymmetry(phi),
        eigen_asymmetry=l1_distance(w, rearrange(w)),
        interface_measure=measure,
        alpha_delta=alpha,
        implied_constant=implied,
        converged=converged,
        iterations=iterations,
        seed=seed,
    )
    if calibrated_constant is not None:
        certificate = apply_calibration(certificate, calibrated_constant)
    return certificate


def calibrate_interface_constant(certificates: list[Certificate]) -> float:
    """Smallest C with measure <= C eps / (alpha_delta gamma) for every certificate.

    Raises:
        ValidationError: If the list is empty
    """
    if not certificates:
        raise ValidationError("No certificates to calibrate against")
    return max(c.implied_constant for c in certificates)


def apply_calibration(certificate: Certificate, constant: float) -> Certificate:
    """Attach the bound C eps / (alpha_delta gamma) to a certificate."""
    if certificate.gamma == 0.0:
        bound = math.inf
    else:
        bound = constant * certificate.eps / (certificate.alpha_delta * certificate.gamma)
    return certificate.model_copy(update={"calibrated_constant": constant, "bound": bound})
