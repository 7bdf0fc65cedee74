"""Interpolation family b^eps between the material phase and the void.

b^eps(s) = beta(1 - s) / (1 + (beta / c) s) with beta = beta_bar * eps^(-kappa_used).
It decreases from beta at s = 0 to 0 at s = 1 and increases pointwise, as eps
decreases, to b^0(s) = c (1 - s) / s, so that b^0(1/2) = c.
"""

from __future__ import annotations

import math
from typing import Any

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .constants import (
    ASSUMPTION_EPS,
    COEFFICIENT_SAMPLES,
    DEFAULT_BETA_BAR,
    DEFAULT_C_HALF,
    DEFAULT_KAPPA_USED,
    N2_KAPPA_SAMPLE,
)
from .exceptions import ValidationError
from .grid import BallDomain
from .models import AssumptionReport

logger = structlog.get_logger(__name__)


def _check_eps(eps: float) -> float:
    if not math.isfinite(eps) or eps <= 0.0:
        raise ValidationError("eps must be positive", details=f"eps={eps}")
    return float(eps)


def _check_unit(s: Any) -> np.ndarray:
    arr = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValidationError("Phase value outside [0, 1]")
    return arr


def kappa_limit(dimension: int) -> float:
    """Supremum of admissible schedule exponents in the given dimension."""
    return 1.0 if dimension == 2 else 2.0 / dimension


class CoefficientFamily(BaseModel):
    """The coefficient family with its scale schedule and pointwise limit.

    Attributes:
        dimension: Space dimension the schedule must be admissible for
        kappa_used: Exponent of the schedule beta = beta_bar * eps^(-kappa_used)
        beta_bar: Scale constant of the schedule
        c_half: Value of the limit coefficient at s = 1/2

    Example:
        >>> family = CoefficientFamily(dimension=2)
        >>> family.beta(0.01)
        10.0
    """

    model_config = ConfigDict(frozen=True)

    dimension: int = Field(default=2)
    kappa_used: float = Field(default=DEFAULT_KAPPA_USED)
    beta_bar: float = Field(default=DEFAULT_BETA_BAR)
    c_half: float = Field(default=DEFAULT_C_HALF)

    @field_validator("beta_bar", "c_half")
    @classmethod
    def validate_positive(cls, v: float) -> float:
        """Validate strictly positive constants."""
        if not math.isfinite(v) or v <= 0.0:
            raise ValueError(f"Coefficient constants must be positive, got {v}")
        return v

    @model_validator(mode="after")
    def validate_kappa(self) -> CoefficientFamily:
        """The schedule exponent must keep beta = o(eps^(-kappa)) admissible."""
        limit = kappa_limit(self.dimension)
        if not 0.0 < self.kappa_used < limit:
            raise ValueError(
                f"kappa_used must lie in (0, {limit:g}) for dimension {self.dimension}, "
                f"got {self.kappa_used}"
            )
        return self

    @classmethod
    def for_domain(
        cls,
        domain: BallDomain,
        kappa_used: float = DEFAULT_KAPPA_USED,
        beta_bar: float = DEFAULT_BETA_BAR,
        c_half: float | None = None,
    ) -> CoefficientFamily:
        """Family with the default limit constant 10 / R^2 for ``domain``."""
        if c_half is None:
            c_half = DEFAULT_C_HALF / domain.radius**2
        return cls(
            dimension=domain.dimension, kappa_used=kappa_used, beta_bar=beta_bar, c_half=c_half
        )

    def beta(self, eps: float) -> float:
        """Return beta^eps = b^eps(0)."""
        return self.beta_bar * _check_eps(eps) ** (-self.kappa_used)

    def b_eps(self, eps: float, s: Any) -> Any:
        """Evaluate b^eps(s)."""
        beta = self.beta(eps)
        arr = _check_unit(s)
        out = beta * (1.0 - arr) / (1.0 + (beta / self.c_half) * arr)
        return float(out) if out.ndim == 0 else out

    def db_eps(self, eps: float, s: Any) -> Any:
        """Evaluate the derivative of b^eps with respect to s."""
        beta = self.beta(eps)
        k = beta / self.c_half
        arr = _check_unit(s)
        out = -beta * (1.0 + k) / (1.0 + k * arr) ** 2
        return float(out) if out.ndim == 0 else out

    def b_zero(self, s: Any) -> Any:
        """Evaluate the pointwise limit b^0; returns math.inf at s = 0."""
        arr = _check_unit(s)
        out = np.divide(
            self.c_half * (1.0 - arr), arr, out=np.full_like(arr, math.inf), where=arr > 0.0
        )
        return float(out) if out.ndim == 0 else out

    def check_assumptions(self, eps_samples: tuple[float, ...] = ASSUMPTION_EPS) -> AssumptionReport:
        """Sample the structural assumptions of the family.

        Checks endpoint values, strict decrease in s, monotonicity in eps,
        monotone convergence to b^0, finiteness of b^0(1/2) and the growth
        of beta relative to eps^(-kappa).
        """
        s = np.linspace(0.0, 1.0, COEFFICIENT_SAMPLES)
        eps_sorted = sorted(eps_samples, reverse=True)
        tables = [np.asarray(self.b_eps(e, s)) for e in eps_sorted]
        interior = s > 0.0
        limit = np.asarray(self.b_zero(s[interior]))

        checks: dict[str, bool] = {
            "endpoints": all(
                abs(t[-1]) == 0.0 and math.isclose(t[0], self.beta(e), rel_tol=1e-12)
                for t, e in zip(tables, eps_sorted, strict=True)
            ),
            "strictly_decreasing": all(bool(np.all(np.diff(t) < 0.0)) for t in tables),
            "monotone_in_eps": all(
                bool(np.all(fine >= coarse)) for coarse, fine in zip(tables, tables[1:], strict=False)
            ),
            "below_limit": all(bool(np.all(t[interior] <= limit * (1 + 1e-12))) for t in tables),
            "limit_finite_at_half": math.isfinite(self.b_zero(0.5)),
        }

        sampled = N2_KAPPA_SAMPLE if self.dimension == 2 else 2.0 / self.dimension
        ratios = [self.beta(e) * e**sampled for e in eps_sorted]
        betas = [self.beta(e) for e in eps_sorted]
        checks["beta_increasing"] = all(b2 > b1 for b1, b2 in zip(betas, betas[1:], strict=False))
        checks["beta_little_o"] = all(r2 < r1 for r1, r2 in zip(ratios, ratios[1:], strict=False))

        report = AssumptionReport(
            subject="coefficient",
            checks=checks,
            details={
                "kappa_used": self.kappa_used,
                "kappa_sampled": sampled,
                "beta_bar": self.beta_bar,
                "c_half": self.c_half,
            },
        )
        logger.debug("Coefficient assumptions checked", passed=report.passed)
        return report
