"""Result and report models shared by the solvers and the CLI.

This module defines the flat, JSON-serializable structures FaberPhase emits:
- AssumptionReport: outcome of sampled structural checks
- InequalityReport: one checked (in)equality with both sides and its slack
- EnergyBreakdown / LimitEnergyBreakdown: diffuse and sharp objective values
- TraceRow / OptimizerTrace: per-iteration optimizer history
- Certificate: symmetry and interface diagnostics of a minimizer
- GammaRow: one epsilon of a sharp-interface limit check
- ShapeRanking: one row of a Faber-Krahn shape comparison
"""

from __future__ import annotations

import math
from typing import Any, Literal

from pydantic import BaseModel, Field, computed_field, model_validator


class AssumptionReport(BaseModel):
    """Outcome of sampled structural checks.

    Attributes:
        subject: What was checked ("potential", "coefficient")
        checks: Named boolean outcomes
        details: Parameters the checks were run with
    """

    subject: str
    checks: dict[str, bool]
    details: dict[str, Any] = Field(default_factory=dict)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        """True when every check passed."""
        return all(self.checks.values())


class InequalityReport(BaseModel):
    """One checked relation ``lhs <= rhs`` (or ``lhs == rhs``) with slack.

    Attributes:
        name: Name of the property
        relation: "le" for inequalities, "eq" for identities
        lhs: Left-hand side
        rhs: Right-hand side
        slack: Allowed violation
        gap: rhs - lhs

    Example:
        >>> InequalityReport(name="hardy_littlewood", relation="le", lhs=0.0, rhs=1.0).passed
        True
    """

    name: str
    relation: Literal["le", "eq"] = "le"
    lhs: float
    rhs: float
    slack: float = 0.0
    details: dict[str, Any] = Field(default_factory=dict)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def gap(self) -> float:
        """Signed gap rhs - lhs."""
        return self.rhs - self.lhs

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        """Whether the relation holds within the slack."""
        if self.relation == "eq":
            return abs(self.gap) <= self.slack
        return self.gap >= -self.slack


class EnergyBreakdown(BaseModel):
    """Ginzburg-Landau energy split and, when evaluated, the objective.

    Attributes:
        gradient: (eps/2) * integral of |grad phi|^2
        potential: (1/eps) * integral of psi(phi)
        total: gradient + potential
        lambda1: Principal eigenvalue, if computed
        j_value: lambda1 + gamma * total, if computed
        total_variation: Discrete integral of |grad Psi(phi)|, if computed
    """

    gradient: float = Field(..., ge=0)
    potential: float = Field(..., ge=0)
    total: float = Field(..., ge=0)
    lambda1: float | None = None
    j_value: float | None = None
    total_variation: float | None = None

    @model_validator(mode="after")
    def validate_total(self) -> EnergyBreakdown:
        """Total must equal the sum of its parts."""
        if not math.isclose(self.total, self.gradient + self.potential, rel_tol=1e-12, abs_tol=1e-15):
            raise ValueError("Energy total must equal gradient + potential")
        return self


class LimitEnergyBreakdown(BaseModel):
    """Sharp-interface objective lambda^0 + gamma * c0 * (P + contact).

    Attributes:
        lambda1: Principal Dirichlet eigenvalue of the shape (inf when trivial)
        perimeter: Relative perimeter inside the domain
        contact: Measure of the shape's closure on the domain boundary
        c0: Surface tension constant of the potential
        total: c0 * (perimeter + contact)
        j_value: lambda1 + gamma * total
    """

    lambda1: float
    perimeter: float = Field(..., ge=0)
    contact: float = Field(..., ge=0)
    c0: float = Field(..., gt=0)
    total: float = Field(..., ge=0)
    j_value: float


class TraceRow(BaseModel):
    """One accepted optimizer iteration."""

    iter: int
    J: float
    lambda1: float
    E: float
    step: float
    pgnorm: float
    asym: float


class OptimizerTrace(BaseModel):
    """Per-iteration optimizer history."""

    rows: list[TraceRow] = Field(default_factory=list)

    def append(self, row: TraceRow) -> None:
        """Add a row."""
        self.rows.append(row)

    @property
    def j_values(self) -> list[float]:
        """Objective values in iteration order."""
        return [row.J for row in self.rows]

    def is_monotone(self, tol: float = 0.0) -> bool:
        """True when J never increases by more than ``tol``."""
        values = self.j_values
        return all(b <= a + tol for a, b in zip(values, values[1:], strict=False))


class Certificate(BaseModel):
    """Diagnostics of a computed minimizer.

    Attributes:
        asymmetry: ||phi - phi*||_L1 / |Omega|
        eigen_asymmetry: ||w - w*||_L1
        interface_measure: Measure of {delta <= phi <= 1 - delta}
        alpha_delta: Minimum of psi over [delta, 1 - delta]
        implied_constant: interface_measure * alpha_delta * gamma / eps
        bound: C * eps / (alpha_delta * gamma) once C is calibrated
    """

    eps: float
    gamma: float
    delta: float
    mass: float
    asymmetry: float
    eigen_asymmetry: float
    interface_measure: float
    alpha_delta: float
    implied_constant: float
    calibrated_constant: float | None = None
    bound: float | None = None
    admissible: bool = True
    converged: bool = True
    iterations: int = 0
    seed: int | None = None

    @computed_field  # type: ignore[prop-decorator]
    @property
    def within_bound(self) -> bool | None:
        """Interface measure against the calibrated bound, if any."""
        if self.bound is None:
            return None
        return self.interface_measure <= self.bound * (1.0 + 1e-12)


class GammaRow(BaseModel):
    """Diffuse and sharp values of one epsilon along a recovery sequence."""

    eps: float
    F_eps: float
    F_zero: float
    lambda_eps: float
    lambda_zero: float
    eigen_gap: float
    energy_gap: float
    penalty: float
    l1_error: float
    mass: float


class GammaReport(BaseModel):
    """Recovery-sequence check over a decreasing list of epsilons."""

    shape: str
    gamma: float
    rows: list[GammaRow]
    l1_rate: float | None = None
    checks: dict[str, bool] = Field(default_factory=dict)

    @property
    def violations(self) -> int:
        """Number of failed checks."""
        return sum(not passed for passed in self.checks.values())


class ShapeRanking(BaseModel):
    """One shape of a Faber-Krahn comparison."""

    rank: int
    shape: str
    volume: float
    lambda_zero: float
    perimeter: float
    contact: float
    J_zero: float
    fk_deficit: float
    iso_ratio: float
