"""Optimal interface profile, recovery sequences and sharp-limit checks.

The profile solves eta' = sqrt(2 psi(eta)), eta(0) = 1/2. It is frozen once
it comes within FREEZE_TOL of a pure phase, which reproduces the constant
extension past a finite hitting time. Recovery sequences place the rescaled
profile across the boundary of a parametric shape, with linear blends over
sqrt(eps) <= |t| <= 2 sqrt(eps) so the field is exactly 0 or 1 further out.
"""

from __future__ import annotations

import math
from functools import cached_property
from typing import Any

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field
from scipy.interpolate import CubicHermiteSpline

from .coefficient import CoefficientFamily
from .constants import (
    DEFAULT_EIGEN_TOL,
    FREEZE_TOL,
    GAMMA_EIGEN_GAP_TOL,
    GAMMA_ENERGY_GAP_TOL,
    GAMMA_L1_RATE_MIN,
    GAMMA_PENALTY_TOL,
    MIN_T_MAX,
    PROFILE_STEP,
)
from .exceptions import ValidationError
from .grid import CartesianGrid, RadialGrid, ScalarField, indicator_field, l1_distance, weighted_mean
from .models import GammaReport, GammaRow
from .objective import evaluate_objective, j_zero
from .potential import Potential
from .shapes import SharpShape

logger = structlog.get_logger(__name__)

TAIL_WINDOW = (1e-10, 1e-3)


class TailFit(BaseModel):
    """Exponential envelope |target - eta(t)| <= constant * exp(-rate |t|) on the fitted tail.

    Attributes:
        constant: Envelope constant, raised so the bound holds on every sample
        rate: Fitted decay rate
        start: |t| from which the fit applies
        residual: Largest relative gap between envelope and samples
    """

    constant: float
    rate: float
    start: float
    residual: float


class ProfileSolution(BaseModel):
    """Sampled profile with hitting times or fitted exponential tails.

    Attributes:
        kind: Potential kind
        t: Sample times, increasing and symmetric around 0
        eta: Profile values at ``t``
        slope: sqrt(2 psi(eta)) at ``t``
        t0: Time the profile reaches 0, if finite
        t1: Time the profile reaches 1, if finite
        tail0: Fit of eta towards 0 when t0 is infinite
        tail1: Fit of 1 - eta towards 1 when t1 is infinite
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: str
    t: np.ndarray
    eta: np.ndarray
    slope: np.ndarray
    t0: float | None = None
    t1: float | None = None
    tail0: TailFit | None = None
    tail1: TailFit | None = None
    step: float = Field(default=PROFILE_STEP, gt=0)

    @cached_property
    def _spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.t, self.eta, self.slope)

    @property
    def t_max(self) -> float:
        """Half-width of the sampled window."""
        return float(self.t[-1])

    def eta_at(self, t: Any) -> Any:
        """Profile value at ``t``; constant beyond the sampled window."""
        arr = np.clip(np.asarray(t, dtype=float), self.t[0], self.t[-1])
        out = np.clip(self._spline(arr), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def ode_residual(self, min_gap: float = FREEZE_TOL, margin: int = 2) -> float:
        """Largest |central difference - sqrt(2 psi(eta))| at least ``min_gap`` away from 0 and 1."""
        free = (self.eta > min_gap) & (self.eta < 1.0 - min_gap)
        keep = free.copy()
        for shift in range(1, margin + 1):
            keep[shift:] &= free[:-shift]
            keep[:-shift] &= free[shift:]
        keep[:margin] = False
        keep[-margin:] = False
        idx = np.flatnonzero(keep)
        if idx.size == 0:
            return 0.0
        central = (self.eta[idx + 1] - self.eta[idx - 1]) / (self.t[idx + 1] - self.t[idx - 1])
        return float(np.max(np.abs(central - self.slope[idx])))


def _rk4_branch(
    rhs: Any, direction: float, steps: int, h: float
) -> tuple[np.ndarray, float | None]:
    """Integrate from eta = 1/2 in one time direction; returns values and hitting time."""
    target = 1.0 if direction > 0 else 0.0
    values = np.empty(steps + 1)
    values[0] = 0.5
    eta = 0.5
    hit: float | None = None
    for k in range(1, steps + 1):
        if hit is not None:
            values[k] = target
            continue
        k1 = rhs(eta)
        k2 = rhs(eta + 0.5 * direction * h * k1)
        k3 = rhs(eta + 0.5 * direction * h * k2)
        k4 = rhs(eta + direction * h * k3)
        nxt = min(max(eta + direction * h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0, 0.0), 1.0)
        if abs(nxt - target) <= FREEZE_TOL:
            # near a non-degenerate zero the gap closes like a square root in time
            gap = abs(target - eta)
            speed = rhs(eta)
            hit = (k - 1) * h + (2.0 * gap / speed if speed > 0.0 else h)
            nxt = target
        values[k] = nxt
        eta = nxt
    return values, hit


def _fit_tail(t: np.ndarray, gap: np.ndarray) -> TailFit | None:
    lo, hi = TAIL_WINDOW
    sel = (gap >= lo) & (gap <= hi)
    if np.count_nonzero(sel) < 10:
        return None
    ts, logs = t[sel], np.log(gap[sel])
    slope, _ = np.polyfit(ts, logs, 1)
    rate = -float(slope)
    constant = float(np.max(gap[sel] * np.exp(rate * ts)))
    envelope = constant * np.exp(-rate * ts)
    residual = float(np.max((envelope - gap[sel]) / gap[sel]))
    return TailFit(constant=constant, rate=rate, start=float(ts.min()), residual=residual)


def solve_profile(potential: Potential, t_max: float = MIN_T_MAX, step: float = PROFILE_STEP) -> ProfileSolution:
    """Integrate the profile ODE with RK4 forward and backward from t = 0.

    Raises:
        ValidationError: If t_max < 20 or the step is not positive
    """
    if t_max < MIN_T_MAX:
        raise ValidationError("Profile window too short", details=f"t_max={t_max} < {MIN_T_MAX}")
    if step <= 0.0:
        raise ValidationError("Profile step must be positive", details=f"step={step}")

    def rhs(s: float) -> float:
        return math.sqrt(2.0 * max(float(potential.psi(min(max(s, 0.0), 1.0))), 0.0))

    steps = int(math.ceil(t_max / step))
    forward, t1 = _rk4_branch(rhs, 1.0, steps, step)
    backward, t0_mag = _rk4_branch(rhs, -1.0, steps, step)
    times = np.arange(-steps, steps + 1) * step
    eta = np.concatenate([backward[:0:-1], forward])
    slope = np.sqrt(2.0 * np.maximum(np.asarray(potential.psi(eta)), 0.0))

    tail1 = _fit_tail(times[steps:], 1.0 - forward) if t1 is None else None
    tail0 = _fit_tail(-times[steps::-1], backward) if t0_mag is None else None
    solution = ProfileSolution(
        kind=potential.kind,
        t=times,
        eta=eta,
        slope=slope,
        t0=None if t0_mag is None else -t0_mag,
        t1=t1,
        tail0=tail0,
        tail1=tail1,
        step=step,
    )
    logger.info("Profile solved", kind=potential.kind, t0=solution.t0, t1=solution.t1, t_max=t_max)
    return solution


def profile_rho(sol: ProfileSolution, eps: float, t: Any) -> Any:
    """Interpolated profile at signed distance ``t`` (positive inside the shape).

    Five branches: 0 below -2 sqrt(eps), a linear blend up to eta(-1/sqrt(eps))
    at -sqrt(eps), eta(t / eps) in the middle, a linear blend from
    eta(1/sqrt(eps)) to 1 over [sqrt(eps), 2 sqrt(eps)], and 1 beyond.
    """
    if not eps > 0.0:
        raise ValidationError("eps must be positive", details=f"eps={eps}")
    arr = np.asarray(t, dtype=float)
    root = math.sqrt(eps)
    upper = float(sol.eta_at(1.0 / root))
    lower = float(sol.eta_at(-1.0 / root))
    middle = np.asarray(sol.eta_at(np.clip(arr, -root, root) / eps))
    out = np.select(
        [arr > 2.0 * root, arr > root, arr >= -root, arr >= -2.0 * root],
        [
            np.ones_like(arr),
            upper + (arr - root) / root * (1.0 - upper),
            middle,
            lower * (arr + 2.0 * root) / root,
        ],
        default=0.0,
    )
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def recovery_sequence(
    shape: SharpShape, eps: float, grid: RadialGrid | CartesianGrid, sol: ProfileSolution
) -> ScalarField:
    """Diffuse field approximating the indicator of ``shape``.

    Raises:
        ValidationError: If the transition layer would reach the boundary layer
    """
    if shape.domain != grid.domain:
        raise ValidationError("Shape and grid use different domains")
    if isinstance(grid, RadialGrid) and not shape.is_radial:
        raise ValidationError("Radial grids only support centered radial shapes", details=shape.label())
    reach = shape.outer_extent() + 2.0 * math.sqrt(eps)
    limit = grid.domain.radius - grid.h
    if reach >= limit:
        raise ValidationError(
            "Shape too close to the boundary for a zero-trace recovery field",
            details=f"outer extent + 2 sqrt(eps) = {reach:.4g} >= {limit:.4g}",
        )
    values = profile_rho(sol, eps, shape.signed_distance(grid.points))
    return ScalarField(grid=grid, values=values)


def shape_indicator(shape: SharpShape, grid: RadialGrid | CartesianGrid) -> ScalarField:
    """0/1 field of the grid points inside ``shape``."""
    return indicator_field(grid, shape.signed_distance(grid.points) > 0.0)


def gamma_check(
    shape: SharpShape,
    eps_list: list[float],
    grid: RadialGrid | CartesianGrid,
    gamma: float,
    potential: Potential,
    coefficient: CoefficientFamily,
    tol: float = DEFAULT_EIGEN_TOL,
    sol: ProfileSolution | None = None,
) -> GammaReport:
    """Diffuse objective along a recovery sequence against the sharp objective.

    Raises:
        ValidationError: If the epsilon list is empty or not strictly decreasing
    """
    if not eps_list:
        raise ValidationError("Need at least one epsilon")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:], strict=False)) or min(eps_list) <= 0.0:
        raise ValidationError("Epsilons must be positive and strictly decreasing", details=str(eps_list))
    if sol is None:
        sol = solve_profile(potential, t_max=max(MIN_T_MAX, 1.0 / math.sqrt(min(eps_list))))

    limit = j_zero(shape, grid, gamma, potential, tol=tol)
    indicator = shape_indicator(shape, grid)
    rows: list[GammaRow] = []
    for eps in eps_list:
        field = recovery_sequence(shape, eps, grid, sol)
        breakdown, pair = evaluate_objective(field, eps, gamma, potential, coefficient, tol=tol)
        w = np.asarray(pair.w.values)
        penalty = float(
            np.dot(grid.weights, np.asarray(coefficient.b_eps(eps, np.asarray(field.values))) * w * w)
        )
        energy_gap = abs(breakdown.total - limit.total) / limit.total if limit.total > 0 else 0.0
        row = GammaRow(
            eps=eps,
            F_eps=breakdown.j_value if breakdown.j_value is not None else math.nan,
            F_zero=limit.j_value,
            lambda_eps=pair.lambda1,
            lambda_zero=limit.lambda1,
            eigen_gap=(pair.lambda1 - limit.lambda1) / limit.lambda1,
            energy_gap=energy_gap,
            penalty=penalty,
            l1_error=l1_distance(field, indicator),
            mass=weighted_mean(field),
        )
        logger.info(
            "Recovery field evaluated",
            eps=eps,
            lambda1=row.lambda_eps,
            eigen_gap=row.eigen_gap,
            energy_gap=row.energy_gap,
            penalty=row.penalty,
        )
        rows.append(row)

    rate = None
    errors = np.array([r.l1_error for r in rows])
    if len(rows) >= 2 and np.all(errors > 0.0):
        slope, _ = np.polyfit(np.log(eps_list), np.log(errors), 1)
        rate = float(slope)
    return GammaReport(shape=shape.label(), gamma=gamma, rows=rows, l1_rate=rate, checks=recovery_checks(rows, rate))


def _shrinking(values: list[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:], strict=False))


def recovery_checks(rows: list[GammaRow], l1_rate: float | None) -> dict[str, bool]:
    """Pass/fail of the sharp-limit predictions along a recovery sequence.

    The eigenvalue gap is compared by magnitude; along a recovery sequence the
    diffuse eigenvalue approaches the sharp one from below.
    """
    last = rows[-1]
    checks = {
        "eigen_gap_within_tol": abs(last.eigen_gap) <= GAMMA_EIGEN_GAP_TOL,
        "energy_gap_within_tol": last.energy_gap <= GAMMA_ENERGY_GAP_TOL,
        "penalty_within_tol": last.penalty <= GAMMA_PENALTY_TOL,
        "eigen_gap_decreasing": _shrinking([abs(r.eigen_gap) for r in rows]),
        "penalty_decreasing": _shrinking([r.penalty for r in rows]),
    }
    if l1_rate is not None:
        checks["l1_rate_at_least_min"] = l1_rate >= GAMMA_L1_RATE_MIN
    return checks
