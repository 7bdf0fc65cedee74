"""Experiment runner behind the CLI subcommands.

Every run writes its artifacts into the configured output directory and
returns a flat summary that is also saved as ``<command>.json``. When an
asserted property fails, the summary is written first and then a
PropertyViolationError is raised.
"""

import asyncio
import math
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np

from .coefficient import CoefficientFamily, kappa_limit
from .config import ExperimentConfig
from .constants import (
    ASYMMETRY_TOL,
    CHECK_HEADER,
    EIGEN_ORACLE_RTOL,
    FK_DEFICIT_SLACK,
    FK_HEADER,
    GAMMA_BETA_BAR,
    GAMMA_C_HALF,
    GAMMA_HEADER,
    INTERFACE_RATIO_RANGE,
    MIN_T_MAX,
    ORACLE_CELLS,
    ORACLE_TRIALS,
    PROFILE_HEADER,
    PROFILE_ORACLE_TOL,
    PROFILE_RESIDUAL_GAP,
    PROFILE_RESIDUAL_TOL,
    PS_BASE_RTOL,
    PS_GROWTH_MIN,
    SWEEP_HEADER,
    TRACE_HEADER,
)
from .eigen import assemble, principal_eigenpair, sharp_eigenvalue
from .exceptions import ConfigurationError, PropertyViolationError
from .grid import CartesianGrid, RadialGrid, ScalarField, build_cartesian_grid, constant_field
from .logging_config import LoggerMixin
from .models import Certificate, EnergyBreakdown, InequalityReport
from .objective import (
    analytic_eigenvalue,
    ball_eigenvalue,
    check_diffuse_faber_krahn,
    check_modica_mortola,
    compare_shapes,
    evaluate_objective,
    faber_krahn_constant,
    faber_krahn_deficit,
    total_variation_big_psi,
)
from .optimize import (
    INIT_KINDS,
    OptimizationResult,
    OptimizerConfig,
    apply_calibration,
    calibrate_interface_constant,
    certify_minimizer,
    initial_field,
    minimize,
    random_admissible_field,
)
from .potential import Potential
from .profile import gamma_check, recovery_sequence, solve_profile
from .rearrange import check_polya_szego, run_permutation_suite, run_rearrangement_suite
from .shapes import Ball, equal_area_shapes, parse_shape
from .utils import (
    field_header,
    field_rows,
    make_rng,
    read_field_csv,
    save_csv_file,
    save_csv_file_async,
    save_field_csv,
    save_json_file,
)


def _count_failures(reports: list[InequalityReport]) -> int:
    return sum(not r.passed for r in reports)


def _check_rows(reports: list[InequalityReport]) -> list[tuple[Any, ...]]:
    return [(r.details.get("trial", ""), r.name, r.lhs, r.rhs, r.gap, r.slack, r.passed) for r in reports]


def _joined(values: list[float] | list[int]) -> str:
    return ",".join(f"{v:g}" for v in values)


class ExperimentRunner(LoggerMixin):
    """Runs FaberPhase experiments for one configuration.

    Args:
        config: Validated experiment configuration

    Example:
        >>> runner = ExperimentRunner(ExperimentConfig(resolution=64))
        >>> summary = runner.run_eig("ones")
        >>> round(summary["lambda1"], 1)
        5.8
    """

    def __init__(self, config: ExperimentConfig) -> None:
        self.config = config

    @cached_property
    def grid(self) -> RadialGrid | CartesianGrid:
        """Grid of the experiment."""
        return self.config.build_grid()

    @cached_property
    def potential(self) -> Potential:
        """Potential of the experiment."""
        return self.config.build_potential()

    @cached_property
    def coefficient(self) -> CoefficientFamily:
        """Coefficient family of the experiment."""
        return self.config.build_coefficient()

    def _path(self, name: str) -> Path:
        return self.config.output_dir / name

    def _base(self, command: str) -> dict[str, Any]:
        c = self.config
        return {
            "command": command,
            "dimension": c.dimension,
            "radius": c.radius,
            "grid": c.grid,
            "resolution": c.effective_resolution,
            "potential": c.potential,
            "seed": c.seed,
            "rng": type(make_rng(c.seed).bit_generator).__name__,
        }

    def _finish(self, command: str, summary: dict[str, Any], violations: int) -> dict[str, Any]:
        summary["violations"] = violations
        save_json_file(self._path(f"{command}.json"), summary)
        self.logger.info("Experiment finished", command=command, violations=violations)
        if violations:
            raise PropertyViolationError(
                f"{violations} asserted propert{'y' if violations == 1 else 'ies'} failed",
                details=command,
                report=summary,
            )
        return summary

    def resolve_phase(self, phase: str) -> ScalarField:
        """Field named by ``phase``.

        Accepts ``ones``, an optimizer start (``radial-bump``, ``offset-bump``,
        ``seeded-noise``), ``recovery:<shape>`` or the path of a field CSV.

        Raises:
            ConfigurationError: If ``phase`` names nothing known
        """
        text = phase.strip()
        key = text.lower()
        if key == "ones":
            return constant_field(self.grid, 1.0)
        if key in INIT_KINDS:
            return initial_field(self.grid, self.config.mass, key, make_rng(self.config.seed))
        if key.startswith("recovery:"):
            shape = parse_shape(text.split(":", 1)[1], self.grid.domain)
            eps = self.config.eps
            sol = solve_profile(self.potential, t_max=max(MIN_T_MAX, 1.0 / math.sqrt(eps)))
            return recovery_sequence(shape, eps, self.grid, sol)
        path = Path(text)
        if not path.is_file():
            raise ConfigurationError(
                f"Unknown phase {phase!r}",
                details=f"use ones, {', '.join(INIT_KINDS)}, recovery:<shape> or a field CSV",
            )
        return read_field_csv(path, self.grid)

    def optimizer_config(self, eps: float, gamma: float, seed: int) -> OptimizerConfig:
        """Optimizer parameters for one (eps, gamma, seed) triple."""
        c = self.config
        return OptimizerConfig(
            eps=eps,
            gamma=gamma,
            mass=c.mass,
            max_iter=c.max_iter,
            tol=c.pg_tol,
            eigen_tol=c.tol,
            init=c.effective_init,
            seed=seed,
        )

    def run_eig(self, phase: str) -> dict[str, Any]:
        """Principal eigenpair of -Laplace + b^eps(phi)."""
        c = self.config
        field = self.resolve_phase(phase)
        pair = principal_eigenpair(
            assemble(self.grid, field, self.coefficient, c.eps), tol=c.tol, max_iter=c.eigen_max_iter
        )
        save_field_csv(self._path("eig_w.csv"), pair.w)
        violations = 0
        summary = self._base("eig") | {
            "phase": phase,
            "eps": c.eps,
            "lambda1": pair.lambda1,
            "residual": pair.residual,
            "tol": c.tol,
            "iterations": pair.iterations,
        }
        if phase.strip().lower() == "ones":
            oracle = ball_eigenvalue(c.radius, c.dimension)
            summary["oracle"] = oracle
            summary["relative_error"] = abs(pair.lambda1 - oracle) / oracle
            summary["oracle_rtol"] = EIGEN_ORACLE_RTOL
            violations = int(summary["relative_error"] > EIGEN_ORACLE_RTOL)
        return self._finish("eig", summary, violations)

    def run_sharp_eig(self, shape_text: str) -> dict[str, Any]:
        """Dirichlet eigenvalue of a parametric shape."""
        c = self.config
        shape = parse_shape(shape_text, self.grid.domain)
        pair = sharp_eigenvalue(self.grid, shape, tol=c.tol, max_iter=c.eigen_max_iter)
        summary = self._base("sharp-eig") | {
            "shape": shape.label(),
            "lambda1": pair.lambda1,
            "trivial": pair.trivial,
            "residual": pair.residual,
            "tol": c.tol,
            "volume": shape.volume,
            "perimeter": shape.relative_perimeter,
            "contact": shape.boundary_contact,
            "fk_deficit": faber_krahn_deficit(shape.volume, pair.lambda1, c.dimension),
        }
        oracle = analytic_eigenvalue(shape)
        if oracle is not None:
            summary["oracle"] = oracle
            summary["relative_error"] = abs(pair.lambda1 - oracle) / oracle
        if not pair.trivial:
            save_field_csv(self._path("sharp_eig_w.csv"), pair.w)
        return self._finish("sharp-eig", summary, 0)

    def run_energy(self, phase: str) -> dict[str, Any]:
        """Energy breakdown, objective and the Modica-Mortola bound of a field."""
        c = self.config
        field = self.resolve_phase(phase)
        breakdown, _ = evaluate_objective(field, c.eps, c.gamma, self.potential, self.coefficient, tol=c.tol)
        bound = check_modica_mortola(field, c.eps, self.potential)
        summary = self._base("energy") | {
            "phase": phase,
            "eps": c.eps,
            "gamma": c.gamma,
            "gradient_energy": breakdown.gradient,
            "potential_energy": breakdown.potential,
            "E": breakdown.total,
            "lambda1": breakdown.lambda1,
            "J": breakdown.j_value,
            "total_variation": total_variation_big_psi(field, self.potential),
            "modica_mortola_gap": bound.gap,
            "modica_mortola_slack": bound.slack,
            "modica_mortola_passed": bound.passed,
            "tol": c.tol,
        }
        return self._finish("energy", summary, int(not bound.passed))

    def _optimize_one(self, eps: float, gamma: float, seed: int) -> tuple[OptimizationResult, Certificate]:
        c = self.config
        result = minimize(self.optimizer_config(eps, gamma, seed), self.grid, self.potential, self.coefficient)
        certificate = certify_minimizer(
            result.phase,
            eps,
            gamma,
            c.delta,
            self.potential,
            result.eigenpair,
            converged=result.converged,
            iterations=result.iterations,
            seed=seed,
        )
        return result, certificate

    def run_minimize(self) -> dict[str, Any]:
        """Minimize J^eps_gamma and certify the result."""
        c = self.config
        result, certificate = self._optimize_one(c.eps, c.gamma, c.seed)
        certificate = apply_calibration(certificate, certificate.implied_constant)
        save_field_csv(self._path("minimize_field.csv"), result.phase)
        save_csv_file(
            self._path("minimize_trace.csv"),
            TRACE_HEADER,
            [tuple(getattr(row, k) for k in TRACE_HEADER) for row in result.trace.rows],
        )
        save_json_file(self._path("minimize_certificate.json"), certificate.model_dump())
        monotone = result.trace.is_monotone()
        if not result.converged:
            self.logger.warning("Minimizer not converged", iterations=result.iterations)
        summary = self._base("minimize") | {
            "eps": c.eps,
            "gamma": c.gamma,
            "mass": c.mass,
            "init": c.effective_init,
            "J": result.energy.j_value,
            "lambda1": result.eigenpair.lambda1,
            "E": result.energy.total,
            "iterations": result.iterations,
            "converged": result.converged,
            "pgnorm": result.trace.rows[-1].pgnorm,
            "pg_tol": c.pg_tol,
            "monotone": monotone,
            "asymmetry": certificate.asymmetry,
            "eigen_asymmetry": certificate.eigen_asymmetry,
            "asymmetry_tol": ASYMMETRY_TOL,
            "delta": c.delta,
            "interface_measure": certificate.interface_measure,
            "implied_constant": certificate.implied_constant,
        }
        violations = int(not monotone) + int(certificate.asymmetry > ASYMMETRY_TOL)
        return self._finish("minimize", summary, violations)

    async def _sweep_task(
        self, limit: asyncio.Semaphore, eps: float, gamma: float, seed: int
    ) -> tuple[Certificate, EnergyBreakdown, bool]:
        async with limit:
            result, certificate = await asyncio.to_thread(self._optimize_one, eps, gamma, seed)
        stem = f"sweep_eps{eps:g}_gamma{gamma:g}_seed{seed}"
        await save_csv_file_async(
            self._path(f"{stem}_trace.csv"),
            TRACE_HEADER,
            [tuple(getattr(row, k) for k in TRACE_HEADER) for row in result.trace.rows],
        )
        await save_csv_file_async(
            self._path(f"{stem}_field.csv"), field_header(self.grid), field_rows(result.phase)
        )
        return certificate, result.energy, result.trace.is_monotone()

    async def _sweep(
        self, eps_list: list[float], gamma_list: list[float], seeds: list[int]
    ) -> list[tuple[Certificate, EnergyBreakdown, bool]]:
        limit = asyncio.Semaphore(self.config.worker_count)
        tasks = []
        async with asyncio.TaskGroup() as group:
            for gamma in gamma_list:
                for seed in seeds:
                    for eps in eps_list:
                        tasks.append(group.create_task(self._sweep_task(limit, eps, gamma, seed)))
        return [task.result() for task in tasks]

    def run_sweep(self, eps_list: list[float], gamma_list: list[float], seeds: list[int]) -> dict[str, Any]:
        """Independent minimizations over every (eps, gamma, seed) with a shared interface constant."""
        if not eps_list or not gamma_list or not seeds:
            raise ConfigurationError("Sweep needs at least one eps, gamma and seed")
        # warm the grid caches before worker threads share them
        _ = self.grid.weights, self.grid.boundary_layer, self.potential, self.coefficient
        self.logger.info(
            "Sweep started", runs=len(eps_list) * len(gamma_list) * len(seeds), workers=self.config.worker_count
        )
        outcomes = asyncio.run(self._sweep(eps_list, gamma_list, seeds))
        constant = calibrate_interface_constant([cert for cert, _, _ in outcomes])
        certificates = [apply_calibration(cert, constant) for cert, _, _ in outcomes]

        rows = []
        for cert, (_, energy, _) in zip(certificates, outcomes, strict=True):
            rows.append(
                (
                    cert.eps,
                    cert.gamma,
                    cert.seed,
                    energy.j_value,
                    energy.lambda1,
                    energy.total,
                    cert.asymmetry,
                    cert.eigen_asymmetry,
                    cert.interface_measure,
                    cert.bound,
                    cert.within_bound,
                    cert.converged,
                    cert.iterations,
                )
            )
        save_csv_file(self._path("sweep_summary.csv"), SWEEP_HEADER, rows)

        # ratios of consecutive interface measures, rescaled to a halving of eps
        ratios = []
        per_group = len(eps_list)
        for start in range(0, len(certificates), per_group):
            group = certificates[start : start + per_group]
            for a, b in zip(group, group[1:], strict=False):
                if a.interface_measure > 0.0:
                    ratios.append(b.interface_measure / a.interface_measure * a.eps / (2.0 * b.eps))

        lo, hi = INTERFACE_RATIO_RANGE
        off_ratios = sum(not lo <= ratio <= hi for ratio in ratios)
        outside = sum(not cert.within_bound for cert in certificates)
        nonmonotone = sum(not monotone for _, _, monotone in outcomes)
        summary = self._base("sweep") | {
            "eps_list": _joined(eps_list),
            "gamma_list": _joined(gamma_list),
            "seeds": _joined(seeds),
            "runs": len(certificates),
            "workers": self.config.worker_count,
            "delta": self.config.delta,
            "calibrated_constant": constant,
            "max_asymmetry": max(cert.asymmetry for cert in certificates),
            "max_eigen_asymmetry": max(cert.eigen_asymmetry for cert in certificates),
            "ratio_min": min(ratios) if ratios else None,
            "ratio_max": max(ratios) if ratios else None,
            "ratio_range": _joined(list(INTERFACE_RATIO_RANGE)),
            "ratios_in_range": off_ratios == 0,
            "all_converged": all(cert.converged for cert in certificates),
            "all_within_bound": outside == 0,
            "monotone_traces": nonmonotone == 0,
        }
        return self._finish("sweep", summary, outside + nonmonotone + off_ratios)

    def run_rearrange_check(
        self, trials: int, field_trials: int, ps_resolutions: list[int]
    ) -> dict[str, Any]:
        """Exact rearrangement suite, permutation oracles, diffuse Faber-Krahn and the free-boundary energy."""
        c = self.config
        grid = self.grid
        if not isinstance(grid, CartesianGrid):
            raise ConfigurationError("rearrange-check needs a cartesian grid", details="use --grid cartesian")
        rng = make_rng(c.seed)
        reports = run_rearrangement_suite(grid, rng, trials, self.potential.big_psi)
        reports += run_permutation_suite(rng, min(trials, ORACLE_TRIALS), ORACLE_CELLS)
        for trial in range(field_trials):
            phi = random_admissible_field(grid, c.mass, rng)
            for report in check_diffuse_faber_krahn(
                phi, c.eps, c.gamma, self.potential, self.coefficient, tol=c.tol
            ):
                report.details["trial"] = trial
                reports.append(report)

        free_reports = []
        for cells in ps_resolutions:
            ps_grid = build_cartesian_grid(grid.domain, cells)
            report = check_polya_szego(ScalarField(grid=ps_grid, values=ps_grid.distances), boundary="free")
            report.details["trial"] = cells
            free_reports.append(report)
        save_csv_file(self._path("rearrange_check.csv"), CHECK_HEADER, _check_rows(reports + free_reports))

        failures = _count_failures(reports)
        summary = self._base("rearrange-check") | {
            "trials": trials,
            "field_trials": field_trials,
            "checks": len(reports),
            "failures": failures,
            "failed_names": ",".join(sorted({r.name for r in reports if not r.passed})),
            "eps": c.eps,
        }
        if free_reports:
            base_energy = grid.domain.volume()
            deviations = [abs(r.rhs - base_energy) / base_energy for r in free_reports]
            growth = [b.lhs / a.lhs - 1.0 for a, b in zip(free_reports, free_reports[1:], strict=False)]
            off_base = sum(d > PS_BASE_RTOL for d in deviations)
            slow_growth = sum(g < PS_GROWTH_MIN for g in growth)
            summary |= {
                "ps_resolutions": _joined(ps_resolutions),
                "ps_base_max_deviation": max(deviations),
                "ps_base_rtol": PS_BASE_RTOL,
                "ps_rearranged_energy_final": free_reports[-1].lhs,
                "ps_growth_min": min(growth) if growth else None,
                "ps_growth_target": PS_GROWTH_MIN,
                "ps_failures": off_base + slow_growth,
            }
            failures += off_base + slow_growth
        return self._finish("rearrange-check", summary, failures)

    def run_profile(self, t_max: float) -> dict[str, Any]:
        """Optimal profile with hitting times, tails and closed-form comparisons."""
        sol = solve_profile(self.potential, t_max=t_max)
        save_csv_file(self._path("profile.csv"), PROFILE_HEADER, zip(sol.t, sol.eta, strict=True))
        monotone = bool(np.all(np.diff(sol.eta) >= 0.0))
        centre = float(sol.eta_at(0.0))
        residual = sol.ode_residual(min_gap=PROFILE_RESIDUAL_GAP)
        summary = self._base("profile") | {
            "kind": sol.kind,
            "t_max": sol.t_max,
            "step": sol.step,
            "t0": sol.t0,
            "t1": sol.t1,
            "c0": self.potential.c0(),
            "eta_at_zero": centre,
            "monotone": monotone,
            "ode_residual": residual,
            "ode_residual_tol": PROFILE_RESIDUAL_TOL,
        }
        for name, tail in (("tail0", sol.tail0), ("tail1", sol.tail1)):
            if tail is not None:
                summary[f"{name}_rate"] = tail.rate
                summary[f"{name}_constant"] = tail.constant
                summary[f"{name}_residual"] = tail.residual
        oracle_error = None
        if sol.kind == "double-well":
            oracle_error = abs(float(sol.eta_at(1.0)) - 1.0 / (1.0 + math.exp(-1.0 / math.sqrt(2.0))))
        elif sol.kind == "double-obstacle" and sol.t1 is not None:
            oracle_error = abs(sol.t1 - 0.5 * math.pi)
        if oracle_error is not None:
            summary["oracle_error"] = oracle_error
            summary["oracle_tol"] = PROFILE_ORACLE_TOL
        violations = (
            int(not monotone)
            + int(abs(centre - 0.5) > 1e-12)
            + int(residual > PROFILE_RESIDUAL_TOL)
            + int(oracle_error is not None and oracle_error > PROFILE_ORACLE_TOL)
        )
        return self._finish("profile", summary, violations)

    @cached_property
    def limit_coefficient(self) -> CoefficientFamily:
        """Coefficient family used along recovery sequences.

        An unconfigured scale becomes GAMMA_BETA_BAR and an unconfigured limit
        at 1/2 becomes GAMMA_C_HALF / R^2.
        """
        c = self.config
        given = c.model_fields_set
        return CoefficientFamily.for_domain(
            c.domain(),
            kappa_used=c.kappa_used,
            beta_bar=c.beta_bar if "beta_bar" in given else GAMMA_BETA_BAR,
            c_half=c.c_half if c.c_half is not None else GAMMA_C_HALF / c.radius**2,
        )

    def run_gamma_check(self, shape_text: str | None, eps_list: list[float]) -> dict[str, Any]:
        """Recovery-sequence values against the sharp-interface objective."""
        c = self.config
        text = shape_text if shape_text else f"ball:{0.5 * c.radius:g}"
        shape = parse_shape(text, self.grid.domain)
        family = self.limit_coefficient
        report = gamma_check(shape, eps_list, self.grid, c.gamma, self.potential, family, tol=c.tol)
        save_csv_file(
            self._path("gamma_check.csv"),
            GAMMA_HEADER,
            [tuple(getattr(row, k) for k in GAMMA_HEADER) for row in report.rows],
        )
        last = report.rows[-1]
        summary = self._base("gamma-check") | {
            "shape": report.shape,
            "gamma": c.gamma,
            "eps_list": _joined(eps_list),
            "beta_bar": family.beta_bar,
            "kappa_used": family.kappa_used,
            "c_half": family.c_half,
            "l1_rate": report.l1_rate,
            "eigen_gap_final": last.eigen_gap,
            "energy_gap_final": last.energy_gap,
            "penalty_final": last.penalty,
        }
        summary |= report.checks
        return self._finish("gamma-check", summary, report.violations)

    def run_fk_compare(self, shapes: list[str] | None, area: float | None) -> dict[str, Any]:
        """Rank shapes by the sharp-interface objective; the ball must have the smallest eigenvalue."""
        c = self.config
        grid = self.grid
        if not isinstance(grid, CartesianGrid):
            raise ConfigurationError("fk-compare needs a cartesian grid", details="use --grid cartesian")
        domain = grid.domain
        if shapes:
            parsed = [parse_shape(text, domain) for text in shapes]
        else:
            parsed = equal_area_shapes(domain, area if area is not None else math.pi * (0.5 * c.radius) ** 2)
        ranking = compare_shapes(parsed, grid, c.gamma, self.potential, tol=c.tol)
        save_csv_file(
            self._path("fk_compare.csv"),
            FK_HEADER,
            [tuple(getattr(row, k) for k in FK_HEADER) for row in ranking],
        )
        by_lambda = min(ranking, key=lambda row: row.lambda_zero)
        ball_labels = {s.label() for s in parsed if isinstance(s.descriptor, Ball)}
        volumes = [s.volume for s in parsed]
        equal_volume = max(volumes) - min(volumes) <= 1e-9 * max(volumes)
        ball_first = by_lambda.shape in ball_labels if ball_labels and equal_volume else None
        deficit_floor = -FK_DEFICIT_SLACK * faber_krahn_constant(c.dimension)
        low_deficits = sum(row.fk_deficit < deficit_floor for row in ranking)
        summary = self._base("fk-compare") | {
            "gamma": c.gamma,
            "shapes": len(ranking),
            "winner": ranking[0].shape,
            "smallest_lambda": by_lambda.shape,
            "ball_smallest_lambda": ball_first,
            "min_fk_deficit": min(row.fk_deficit for row in ranking),
            "fk_deficit_floor": deficit_floor,
            "tol": c.tol,
        }
        return self._finish("fk-compare", summary, int(ball_first is False) + low_deficits)

    def run_check_assumptions(self) -> dict[str, Any]:
        """Sampled structural checks of the potential and the coefficient family."""
        potential_report = self.potential.check_assumptions()
        coefficient_report = self.coefficient.check_assumptions()
        summary = self._base("check-assumptions")
        for prefix, report in (("potential", potential_report), ("coefficient", coefficient_report)):
            for name, passed in report.checks.items():
                summary[f"{prefix}_{name}"] = passed
        summary |= {
            "c0": self.potential.c0(),
            "kappa_used": self.coefficient.kappa_used,
            "kappa_limit": kappa_limit(self.coefficient.dimension),
            "beta_bar": self.coefficient.beta_bar,
            "c_half": self.coefficient.c_half,
        }
        failures = sum(not v for v in potential_report.checks.values()) + sum(
            not v for v in coefficient_report.checks.values()
        )
        return self._finish("check-assumptions", summary, failures)
