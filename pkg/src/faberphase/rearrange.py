"""Discrete symmetric-decreasing rearrangement and its inequality checks.

On equal-weight grids the rearrangement sorts the values decreasingly and
lays them out along the cells ordered by distance from the origin (ties by
cell index). Every identity and inequality below is then exact up to
floating-point summation. Radial grids have unequal shell weights; there the
layer-cake measure is redistributed instead, which preserves integrals but
only approximates pointwise statements, and plans carry ``exact=False``.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Sequence
from typing import Any

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, field_validator

from .constants import EXACT_SLACK, NORM_RTOL, PS_SLACK_FRACTION
from .exceptions import ValidationError
from .grid import CartesianGrid, RadialGrid, ScalarField
from .models import InequalityReport
from .stencil import domain_stencil

logger = structlog.get_logger(__name__)

ScalarMap = Callable[[np.ndarray], np.ndarray]

CONVEX_MAPS: dict[str, ScalarMap] = {
    "abs": np.abs,
    "square": np.square,
}


class RearrangementPlan(BaseModel):
    """Cell order by increasing distance from the origin.

    Attributes:
        order: Permutation sigma; ``order[k]`` is the k-th closest cell
        weights: Cell weights, or None for equal weights
        cell_weight: Common weight when ``weights`` is None
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    order: np.ndarray
    weights: np.ndarray | None = None
    cell_weight: float = 1.0

    @field_validator("order", mode="before")
    @classmethod
    def validate_order(cls, v: Any) -> np.ndarray:
        """The order must be a permutation of 0..K-1."""
        arr = np.asarray(v, dtype=np.int64).reshape(-1)
        if not np.array_equal(np.sort(arr), np.arange(arr.shape[0])):
            raise ValueError("Rearrangement order must be a permutation")
        arr.setflags(write=False)
        return arr

    @property
    def exact(self) -> bool:
        """True for equal-weight plans, where pointwise claims are exact."""
        return self.weights is None

    @property
    def size(self) -> int:
        """Number of cells."""
        return int(self.order.shape[0])

    @classmethod
    def from_distances(cls, distances: Sequence[float] | np.ndarray, cell_weight: float = 1.0) -> RearrangementPlan:
        """Equal-weight plan from per-cell distances, ties broken by index."""
        return cls(order=np.argsort(np.asarray(distances), kind="stable"), cell_weight=cell_weight)

    @classmethod
    def for_grid(cls, grid: RadialGrid | CartesianGrid) -> RearrangementPlan:
        """Plan of a grid; Cartesian distances are compared as exact integers."""
        if isinstance(grid, CartesianGrid):
            return cls(order=np.argsort(grid.squared_distance_units, kind="stable"), cell_weight=grid.h**2)
        return cls(order=np.arange(grid.size), weights=grid.weights)

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Rearrange a non-negative value vector.

        Raises:
            ValidationError: On negative values or a size mismatch
        """
        v = np.asarray(values, dtype=float)
        if v.shape != (self.size,):
            raise ValidationError("Field size does not match the plan", details=f"{v.shape} vs {self.size}")
        if np.any(v < 0.0):
            raise ValidationError("Rearrangement requires non-negative values")
        if self.weights is None:
            out = np.empty_like(v)
            out[self.order] = np.sort(v)[::-1]
            return out
        return self._layer_cake(v)

    def _layer_cake(self, v: np.ndarray) -> np.ndarray:
        w = self.weights
        assert w is not None
        target = w[self.order]
        if np.all(np.diff(v[self.order]) <= 0.0):
            return v.copy()
        src = np.argsort(-v, kind="stable")
        knots = np.concatenate([[0.0], np.cumsum(w[src])])
        integral = np.concatenate([[0.0], np.cumsum(v[src] * w[src])])
        cuts = np.concatenate([[0.0], np.cumsum(target)])
        cuts[-1] = knots[-1]
        acc = np.interp(cuts, knots, integral)
        out = np.empty_like(v)
        out[self.order] = np.diff(acc) / target
        return out


def rearrange(f: ScalarField, plan: RearrangementPlan | None = None) -> ScalarField:
    """Symmetric-decreasing rearrangement of a non-negative field.

    Raises:
        ValidationError: If the field has negative values
    """
    plan = plan if plan is not None else RearrangementPlan.for_grid(f.grid)
    if not plan.exact:
        logger.debug("Weighted rearrangement on unequal shells", cells=plan.size)
    return f.with_values(plan.apply(f.values))


def _pair(
    f: ScalarField | np.ndarray, plan: RearrangementPlan | None
) -> tuple[np.ndarray, RearrangementPlan]:
    if isinstance(f, ScalarField):
        plan = plan if plan is not None else RearrangementPlan.for_grid(f.grid)
        values = np.asarray(f.values)
    else:
        values = np.asarray(f, dtype=float)
        plan = plan if plan is not None else RearrangementPlan.from_distances(np.arange(values.shape[0]))
    if not plan.exact:
        raise ValidationError(
            "Exact rearrangement identities need equal cell weights",
            details="radial grids only admit the weighted variant",
        )
    return values, plan


def _norm(values: np.ndarray, p: float, weight: float) -> float:
    if math.isinf(p):
        return float(np.max(np.abs(values), initial=0.0))
    return float((weight * np.sum(np.abs(values) ** p)) ** (1.0 / p))


def check_norm_preservation(
    f: ScalarField | np.ndarray, p: float = 2, plan: RearrangementPlan | None = None
) -> InequalityReport:
    """Check ||f*||_p = ||f||_p for p in {1, 2, inf}."""
    if p not in (1, 2, math.inf):
        raise ValidationError("p must be 1, 2 or inf", details=f"p={p}")
    values, plan = _pair(f, plan)
    lhs = _norm(plan.apply(values), p, plan.cell_weight)
    rhs = _norm(values, p, plan.cell_weight)
    return InequalityReport(
        name=f"norm_preservation_p{p}",
        relation="eq",
        lhs=lhs,
        rhs=rhs,
        slack=NORM_RTOL * max(rhs, 1.0) if rhs else 0.0,
    )


def check_hardy_littlewood(
    f: ScalarField | np.ndarray, g: ScalarField | np.ndarray, plan: RearrangementPlan | None = None
) -> InequalityReport:
    """Check sum f_i g_i <= sum f*_i g*_i."""
    fv, plan = _pair(f, plan)
    gv, _ = _pair(g, plan)
    lhs = float(np.dot(fv, gv))
    rhs = float(np.dot(plan.apply(fv), plan.apply(gv)))
    return InequalityReport(
        name="hardy_littlewood", lhs=lhs, rhs=rhs, slack=EXACT_SLACK * max(1.0, abs(rhs))
    )


def check_nonexpansivity(
    f: ScalarField | np.ndarray,
    g: ScalarField | np.ndarray,
    F: str | ScalarMap = "abs",
    plan: RearrangementPlan | None = None,
) -> InequalityReport:
    """Check sum F(f*_i - g*_i) <= sum F(f_i - g_i) for convex F with F(0) = 0."""
    fmap = CONVEX_MAPS[F] if isinstance(F, str) else F
    fv, plan = _pair(f, plan)
    gv, _ = _pair(g, plan)
    lhs = float(np.sum(fmap(plan.apply(fv) - plan.apply(gv))))
    rhs = float(np.sum(fmap(fv - gv)))
    return InequalityReport(
        name=f"nonexpansivity_{F if isinstance(F, str) else 'custom'}",
        lhs=lhs,
        rhs=rhs,
        slack=EXACT_SLACK * max(1.0, abs(rhs)),
    )


def check_idempotence(f: ScalarField | np.ndarray, plan: RearrangementPlan | None = None) -> InequalityReport:
    """Check that rearranging twice changes nothing."""
    values, plan = _pair(f, plan)
    once = plan.apply(values)
    twice = plan.apply(once)
    return InequalityReport(
        name="idempotence", relation="eq", lhs=float(np.max(np.abs(twice - once), initial=0.0)), rhs=0.0
    )


def check_level_sets(
    f: ScalarField | np.ndarray, thresholds: Sequence[float], plan: RearrangementPlan | None = None
) -> InequalityReport:
    """Check #{f* > t} = #{f > t} for each threshold; reports the largest count mismatch."""
    values, plan = _pair(f, plan)
    rearranged = plan.apply(values)
    worst = max(
        (abs(int(np.sum(rearranged > t)) - int(np.sum(values > t))) for t in thresholds), default=0
    )
    return InequalityReport(name="level_sets", relation="eq", lhs=float(worst), rhs=0.0)


def check_composition(
    f: ScalarField | np.ndarray, phi: ScalarMap, plan: RearrangementPlan | None = None
) -> InequalityReport:
    """Check (Phi o f)* = Phi o f* for non-decreasing Phi with Phi(0) = 0."""
    values, plan = _pair(f, plan)
    left = plan.apply(phi(values))
    right = phi(plan.apply(values))
    return InequalityReport(
        name="composition", relation="eq", lhs=float(np.max(np.abs(left - right), initial=0.0)), rhs=0.0
    )


def check_integral_identity(
    f: ScalarField | np.ndarray, big_psi: ScalarMap, plan: RearrangementPlan | None = None
) -> InequalityReport:
    """Check sum Psi(f*_i) = sum Psi(f_i) for Psi with Psi(0) = 0."""
    values, plan = _pair(f, plan)
    lhs = float(plan.cell_weight * np.sum(big_psi(plan.apply(values))))
    rhs = float(plan.cell_weight * np.sum(big_psi(values)))
    return InequalityReport(
        name="integral_identity",
        relation="eq",
        lhs=lhs,
        rhs=rhs,
        slack=EXACT_SLACK * max(abs(rhs), 1.0),
    )


def check_polya_szego(
    f: ScalarField,
    boundary: str = "dirichlet",
    slack_fraction: float = PS_SLACK_FRACTION,
) -> InequalityReport:
    """Compare the discrete Dirichlet energies of f* and f.

    With ``boundary="dirichlet"`` the field is taken with zero trace; with
    ``boundary="free"`` no trace is imposed, which is where the inequality
    is known to fail.
    """
    stencil = domain_stencil(f.grid)
    energy = stencil.dirichlet_energy if boundary == "dirichlet" else stencil.free_energy
    rearranged = rearrange(f)
    lhs = energy(np.asarray(rearranged.values))
    rhs = energy(np.asarray(f.values))
    return InequalityReport(
        name=f"polya_szego_{boundary}",
        lhs=lhs,
        rhs=rhs,
        slack=slack_fraction * rhs,
        details={"boundary": boundary},
    )


def smooth_random_values(rng: np.random.Generator, points: np.ndarray, radius: float, modes: int = 3) -> np.ndarray:
    """Low-order random trigonometric field in [0, 1] evaluated at ``points``."""
    x = points / radius
    out = np.full(points.shape[0], rng.uniform(0.2, 0.8))
    for _ in range(modes):
        k = rng.normal(size=points.shape[1]) * 2.0
        amp = rng.uniform(-0.3, 0.3)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        out = out + amp * np.cos(x @ k * math.pi + phase)
    return np.clip(out, 0.0, 1.0)


def run_rearrangement_suite(
    grid: CartesianGrid, rng: np.random.Generator, trials: int, big_psi: ScalarMap
) -> list[InequalityReport]:
    """Seeded random trials of every exact rearrangement property.

    Each trial draws two non-negative fields, one with many repeated values
    so that ties are exercised, and checks norms, level sets, composition,
    integral identity, Hardy-Littlewood, nonexpansivity and idempotence.
    """
    if not isinstance(grid, CartesianGrid):
        raise ValidationError("The exact suite needs an equal-weight grid")
    plan = RearrangementPlan.for_grid(grid)
    reports: list[InequalityReport] = []
    size = grid.size
    for trial in range(trials):
        f = rng.random(size)
        g = np.round(rng.random(size) * 8.0) / 8.0
        cap = float(rng.uniform(0.2, 0.8))
        trial_reports = [
            check_norm_preservation(f, 1, plan),
            check_norm_preservation(f, 2, plan),
            check_norm_preservation(f, math.inf, plan),
            check_level_sets(g, [0.0, 0.25, 0.5, 0.75], plan),
            check_composition(f, np.square, plan),
            check_composition(g, lambda s, c=cap: np.minimum(s, c), plan),
            check_integral_identity(f, big_psi, plan),
            check_hardy_littlewood(f, g, plan),
            check_nonexpansivity(f, g, "abs", plan),
            check_nonexpansivity(f, g, "square", plan),
            check_idempotence(g, plan),
        ]
        for report in trial_reports:
            report.details["trial"] = trial
        reports.extend(trial_reports)
    failures = sum(not r.passed for r in reports)
    logger.info("Rearrangement suite finished", trials=trials, checks=len(reports), failures=failures)
    return reports


MAX_ORACLE_CELLS = 8


def check_permutation_oracles(
    f: np.ndarray, g: np.ndarray, plan: RearrangementPlan
) -> list[InequalityReport]:
    """Compare rearranged pairings with exhaustive search over all permutations.

    Sum f* g* must equal the largest sum f_i g_sigma(i), and sum |f* - g*|
    the smallest sum |f_i - g_sigma(i)|.

    Raises:
        ValidationError: If the instance has more than MAX_ORACLE_CELLS cells
    """
    fv, plan = _pair(f, plan)
    gv, _ = _pair(g, plan)
    if plan.size > MAX_ORACLE_CELLS:
        raise ValidationError("Instance too large for exhaustive search", details=f"{plan.size} cells")
    fs, gs = plan.apply(fv), plan.apply(gv)
    best_product = -math.inf
    best_distance = math.inf
    for perm in itertools.permutations(range(plan.size)):
        shuffled = gv[list(perm)]
        best_product = max(best_product, float(np.dot(fv, shuffled)))
        best_distance = min(best_distance, float(np.sum(np.abs(fv - shuffled))))
    product = float(np.dot(fs, gs))
    distance = float(np.sum(np.abs(fs - gs)))
    return [
        InequalityReport(
            name="hardy_littlewood_oracle",
            relation="eq",
            lhs=product,
            rhs=best_product,
            slack=EXACT_SLACK * max(1.0, abs(best_product)),
        ),
        InequalityReport(
            name="nonexpansivity_oracle",
            relation="eq",
            lhs=distance,
            rhs=best_distance,
            slack=EXACT_SLACK * max(1.0, abs(best_distance)),
        ),
    ]


def run_permutation_suite(rng: np.random.Generator, trials: int, cells: int = 6) -> list[InequalityReport]:
    """Seeded exhaustive-oracle trials on tiny equal-weight instances with random cell distances."""
    reports: list[InequalityReport] = []
    for trial in range(trials):
        plan = RearrangementPlan.from_distances(rng.random(cells))
        f = rng.random(cells)
        g = np.round(rng.random(cells) * 4.0) / 4.0
        for report in check_permutation_oracles(f, g, plan):
            report.details["trial"] = trial
            reports.append(report)
    failures = sum(not r.passed for r in reports)
    logger.info("Permutation oracle suite finished", trials=trials, cells=cells, failures=failures)
    return reports
