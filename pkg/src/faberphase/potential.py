"""Phase-field potentials psi on [0, 1] and their derived quantities.

A potential vanishes at both pure phases and is positive in between. Its
minima must be non-degenerate: at each endpoint either the slope is nonzero
or the curvature is positive. Built-in kinds:

- double-well:     psi(s) = s^2 (1 - s)^2 / 4
- double-obstacle: psi(s) = s (1 - s) / 2   (box constraint replaces +inf outside)
- mixed:           psi(s) = s (1 - s)^2 / 2 (obstacle-like at 0, well-like at 1)
"""

from __future__ import annotations

from collections.abc import Callable
from functools import cached_property
from typing import Any, Literal

import numpy as np
import structlog
from scipy.integrate import cumulative_simpson

from .constants import (
    CURVATURE_TOL,
    ENDPOINT_ZERO_TOL,
    FD_STEP,
    FLAT_SLOPE_TOL,
    POTENTIAL_SAMPLES,
    SIMPSON_PANELS,
)
from .exceptions import AssumptionError, ValidationError
from .models import AssumptionReport

logger = structlog.get_logger(__name__)

PotentialName = Literal["double-well", "double-obstacle", "mixed"]
POTENTIAL_NAMES: tuple[str, ...] = ("double-well", "double-obstacle", "mixed")

Evaluator = Callable[[np.ndarray], np.ndarray]


def _unit_interval(s: Any) -> np.ndarray:
    arr = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValidationError("Argument outside [0, 1]", details=f"min={arr.min()}, max={arr.max()}")
    return arr


def _out(arr: np.ndarray) -> Any:
    return float(arr) if arr.ndim == 0 else arr


class Potential:
    """Potential psi with first derivative, Psi, c0 and alpha_delta.

    Assumptions are checked numerically at construction.

    Args:
        kind: Name of the potential ("custom" for user evaluators)
        psi: Vectorized evaluator of psi on [0, 1]
        dpsi: Vectorized evaluator of psi'; central differences when omitted

    Raises:
        AssumptionError: If psi does not vanish exactly at 0 and 1, is not
            positive inside, or has a degenerate flat endpoint

    Example:
        >>> pot = Potential.from_name("double-obstacle")
        >>> round(pot.c0(), 6)
        0.392699
    """

    def __init__(self, kind: str, psi: Evaluator, dpsi: Evaluator | None = None) -> None:
        self.kind = kind
        self._psi = psi
        self._dpsi = dpsi
        self._validate()
        logger.debug("Potential validated", kind=kind)

    @classmethod
    def from_name(cls, name: str) -> Potential:
        """Build one of the built-in potentials.

        Raises:
            ValidationError: If the name is unknown
        """
        if name == "double-well":
            return cls(
                name,
                lambda s: 0.25 * s * s * (1.0 - s) ** 2,
                lambda s: 0.5 * s * (1.0 - s) * (1.0 - 2.0 * s),
            )
        if name == "double-obstacle":
            return cls(name, lambda s: 0.5 * s * (1.0 - s), lambda s: 0.5 - s)
        if name == "mixed":
            return cls(
                name,
                lambda s: 0.5 * s * (1.0 - s) ** 2,
                lambda s: 0.5 * (1.0 - s) * (1.0 - 3.0 * s),
            )
        raise ValidationError(f"Unknown potential: {name}", details=f"choose from {POTENTIAL_NAMES}")

    def _raw_dpsi(self, s: np.ndarray) -> np.ndarray:
        if self._dpsi is not None:
            return np.asarray(self._dpsi(s), dtype=float)
        h = FD_STEP
        lo = np.clip(s - h, 0.0, 1.0)
        hi = np.clip(s + h, 0.0, 1.0)
        return (np.asarray(self._psi(hi)) - np.asarray(self._psi(lo))) / (hi - lo)

    def _endpoint_behaviour(self, end: float) -> tuple[float, float]:
        """Inward slope and one-sided curvature of psi at an endpoint."""
        h = FD_STEP
        inward = 1.0 if end == 0.0 else -1.0
        p0, p1, p2 = (float(v) for v in self._psi(np.array([end, end + inward * h, end + inward * 2.0 * h])))
        if self._dpsi is not None:
            slope = float(np.asarray(self._dpsi(np.array([end])), dtype=float)[0])
        else:
            slope = inward * (p1 - p0) / h
        return slope, (p2 - 2.0 * p1 + p0) / (h * h)

    def _validate(self) -> None:
        ends = np.asarray(self._psi(np.array([0.0, 1.0])), dtype=float)
        if np.any(np.abs(ends) > ENDPOINT_ZERO_TOL):
            raise AssumptionError("Potential must vanish at 0 and 1", details=f"psi={ends.tolist()}")

        samples = np.linspace(0.0, 1.0, POTENTIAL_SAMPLES)[1:-1]
        values = np.asarray(self._psi(samples), dtype=float)
        if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
            raise AssumptionError("Potential must be positive on (0, 1)", details=self.kind)

        for end in (0.0, 1.0):
            slope, curvature = self._endpoint_behaviour(end)
            if abs(slope) <= FLAT_SLOPE_TOL and curvature <= CURVATURE_TOL:
                raise AssumptionError(
                    "Degenerate flat minimum",
                    details=f"psi'({end:g}) = 0 and psi''({end:g}) ~ {curvature:.3g}",
                )

    def psi(self, s: Any) -> Any:
        """Evaluate psi on [0, 1]."""
        arr = _unit_interval(s)
        return _out(np.asarray(self._psi(arr), dtype=float))

    def dpsi(self, s: Any) -> Any:
        """Evaluate psi' on [0, 1]."""
        arr = _unit_interval(s)
        return _out(self._raw_dpsi(arr))

    @cached_property
    def _big_psi_table(self) -> tuple[np.ndarray, np.ndarray]:
        nodes = np.linspace(0.0, 1.0, SIMPSON_PANELS + 1)
        integrand = np.sqrt(2.0 * np.maximum(np.asarray(self._psi(nodes), dtype=float), 0.0))
        table = cumulative_simpson(integrand, x=nodes, initial=0.0)
        return nodes, np.maximum.accumulate(table)

    def big_psi(self, s: Any) -> Any:
        """Evaluate Psi(s), the integral of sqrt(2 psi) from 0 to s."""
        arr = _unit_interval(s)
        nodes, table = self._big_psi_table
        return _out(np.interp(arr, nodes, table))

    def c0(self) -> float:
        """Surface tension constant Psi(1)."""
        return float(self._big_psi_table[1][-1])

    def alpha_delta(self, delta: float) -> float:
        """Minimum of psi over [delta, 1 - delta].

        Raises:
            ValidationError: If delta is outside (0, 1/2)
        """
        if not 0.0 < delta < 0.5:
            raise ValidationError("delta must lie in (0, 1/2)", details=f"delta={delta}")
        grid = np.linspace(delta, 1.0 - delta, POTENTIAL_SAMPLES)
        return float(np.min(self._psi(grid)))

    def check_assumptions(self) -> AssumptionReport:
        """Sampled report of the structural assumptions, with endpoint data."""
        ends = np.asarray(self._psi(np.array([0.0, 1.0])), dtype=float)
        samples = np.linspace(0.0, 1.0, POTENTIAL_SAMPLES)[1:-1]
        values = np.asarray(self._psi(samples), dtype=float)
        checks = {
            "vanishes_at_endpoints": bool(np.all(np.abs(ends) <= ENDPOINT_ZERO_TOL)),
            "positive_inside": bool(np.all(np.isfinite(values)) and np.all(values > 0.0)),
        }
        details: dict[str, Any] = {"kind": self.kind, "c0": self.c0()}
        for end, label in ((0.0, "zero"), (1.0, "one")):
            slope, curvature = self._endpoint_behaviour(end)
            checks[f"nondegenerate_at_{label}"] = abs(slope) > FLAT_SLOPE_TOL or curvature > CURVATURE_TOL
            details[f"slope_at_{label}"] = slope
            details[f"curvature_at_{label}"] = curvature
        return AssumptionReport(subject="potential", checks=checks, details=details)

    def __repr__(self) -> str:
        return f"Potential(kind={self.kind!r})"
