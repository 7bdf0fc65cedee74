"""Command-line interface for FaberPhase experiments.

Artifacts (all written atomically into --output-dir):

\b
  field CSV          index,r_or_x[,y],value  (radial grids omit y)
  trace CSV          iter,J,lambda1,E,step,pgnorm,asym
  profile.csv        t,eta
  gamma_check.csv    eps,F_eps,F_zero,lambda_eps,lambda_zero,eigen_gap,energy_gap,
                     penalty,l1_error,mass
  fk_compare.csv     rank,shape,volume,lambda_zero,perimeter,contact,J_zero,fk_deficit,iso_ratio
  rearrange_check.csv  trial,name,lhs,rhs,gap,slack,passed
  sweep_summary.csv  eps,gamma,seed,J,lambda1,E,asymmetry,eigen_asymmetry,
                     interface_measure,bound,within_bound,converged,iterations
  <command>.json     flat summary of the run

\b
Exit codes: 0 all checks pass, 1 property violation, 2 configuration error,
3 solver or I/O failure.
"""

import sys
from collections.abc import Callable
from functools import wraps
from pathlib import Path
from typing import Any

import click
import pydantic
from rich.console import Console
from rich.table import Table

from . import __version__
from .config import ExperimentConfig
from .constants import (
    DEFAULT_FIELD_TRIALS,
    DEFAULT_TRIALS,
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_SOLVER,
    EXIT_VIOLATION,
    GAMMA_EPS_LIST,
    MIN_T_MAX,
)
from .exceptions import (
    ArtifactError,
    AssumptionError,
    ConfigurationError,
    InfeasibleMassError,
    OptimizationError,
    PropertyViolationError,
    SolverError,
    ValidationError,
)
from .experiments import ExperimentRunner
from .logging_config import bind_run_context, configure_logging
from .utils import json_text

console = Console()
err_console = Console(stderr=True)

CONFIG_OPTIONS: list[tuple[tuple[str, ...], dict[str, Any]]] = [
    (
        ("--config", "config_file"),
        {"type": click.Path(dir_okay=False, path_type=Path), "help": "key = value config file"},
    ),
    (("--dimension", "--n", "dimension"), {"type": int, "help": "Space dimension (2 or 3)"}),
    (("--radius", "--R", "radius"), {"type": float, "help": "Radius of the ball domain"}),
    (("--grid", "grid"), {"type": str, "help": "Grid kind: radial or cartesian"}),
    (("--resolution", "resolution"), {"type": int, "help": "Radial nodes or Cartesian cells per axis"}),
    (("--potential", "potential"), {"type": str, "help": "double-well, double-obstacle or mixed"}),
    (("--beta-bar", "beta_bar"), {"type": float, "help": "Coefficient schedule scale"}),
    (("--kappa-used", "kappa_used"), {"type": float, "help": "Coefficient schedule exponent"}),
    (("--c-half", "c_half"), {"type": float, "help": "Limit coefficient at 1/2"}),
    (("--eps", "eps"), {"type": float, "help": "Interface width"}),
    (("--gamma", "gamma"), {"type": float, "help": "Ginzburg-Landau weight"}),
    (("--mass", "--m", "mass"), {"type": float, "help": "Prescribed mean of the phase field"}),
    (("--delta", "delta"), {"type": float, "help": "Interface threshold"}),
    (("--tol", "tol"), {"type": float, "help": "Eigensolver relative residual tolerance"}),
    (("--max-iter", "max_iter"), {"type": int, "help": "Optimizer iteration cap"}),
    (("--pg-tol", "pg_tol"), {"type": float, "help": "Optimizer projected-gradient tolerance"}),
    (("--eigen-max-iter", "eigen_max_iter"), {"type": int, "help": "Eigensolver iteration cap"}),
    (("--init", "init"), {"type": str, "help": "radial-bump, offset-bump or seeded-noise"}),
    (("--seed", "seed"), {"type": int, "help": "RNG seed"}),
    (
        ("--output-dir", "output_dir"),
        {"type": click.Path(file_okay=False, path_type=Path), "help": "Artifact directory"},
    ),
    (("--threads", "threads"), {"type": int, "help": "Sweep worker cap"}),
    (("--log-level", "log_level"), {"type": str, "help": "Log level"}),
    (
        ("--format", "-f", "output_format"),
        {"type": click.Choice(["table", "json"]), "default": "table", "help": "Summary output format"},
    ),
]

SWEEP_LISTS = ("eps", "gamma", "seed")


def config_options(exclude: tuple[str, ...] = ()) -> Callable[[Callable[..., Any]], Callable[..., Any]]:
    """Attach the shared experiment options to a subcommand."""

    def decorator(func: Callable[..., Any]) -> Callable[..., Any]:
        for decls, attrs in reversed(CONFIG_OPTIONS):
            if decls[-1] in exclude:
                continue
            func = click.option(*decls, **attrs)(func)
        return func

    return decorator


def print_summary(summary: dict[str, Any], output_format: str) -> None:
    """Print a flat summary as a table or as JSON."""
    if output_format == "json":
        click.echo(json_text(summary), nl=False)
        return
    table = Table(title=f"FaberPhase {summary.get('command', '')}")
    table.add_column("Field", style="cyan")
    table.add_column("Value", style="green")
    for key, value in summary.items():
        table.add_row(key, "" if value is None else str(value))
    console.print(table)


def render_validation_error(error: pydantic.ValidationError) -> None:
    """Print every offending field of a configuration."""
    err_console.print(f"[red]Configuration error: {error.error_count()} invalid field(s)[/red]")
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "config"
        err_console.print(f"[red]  {location}: {item['msg']}[/red]")


def experiment_command(func: Callable[..., dict[str, Any]]) -> Callable[..., None]:
    """Build the config, run the experiment and map failures to exit codes."""

    @wraps(func)
    def wrapper(**options: Any) -> None:
        output_format = options.pop("output_format")
        config_file = options.pop("config_file")
        overrides = {k: options.pop(k) for k in list(options) if k in ExperimentConfig.model_fields}
        try:
            config = ExperimentConfig.load(config_file, **overrides)
            configure_logging(config.log_level, log_file=config.log_file)
            bind_run_context(command=func.__name__.replace("_", "-"), seed=config.seed)
            summary = func(ExperimentRunner(config), **options)
        except PropertyViolationError as e:
            if isinstance(e.report, dict):
                print_summary(e.report, output_format)
            err_console.print(f"[red]Property violation: {e}[/red]")
            sys.exit(EXIT_VIOLATION)
        except pydantic.ValidationError as e:
            render_validation_error(e)
            sys.exit(EXIT_CONFIG)
        except (ConfigurationError, ValidationError, AssumptionError) as e:
            err_console.print(f"[red]Configuration error: {e}[/red]")
            sys.exit(EXIT_CONFIG)
        except ArtifactError as e:
            err_console.print(f"[red]I/O error: {e}[/red]")
            sys.exit(EXIT_SOLVER)
        except (SolverError, OptimizationError, InfeasibleMassError) as e:
            err_console.print(f"[red]Solver failure: {e}[/red]")
            sys.exit(EXIT_SOLVER)
        print_summary(summary, output_format)
        sys.exit(EXIT_OK)

    return wrapper


def parse_float_list(text: str) -> list[float]:
    """Parse ``0.08,0.04,0.02``."""
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}") from e


def parse_int_list(text: str) -> list[int]:
    """Parse ``1,2,3``."""
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}") from e


@click.group(help=__doc__)
@click.version_option(version=__version__, prog_name="FaberPhase")
def cli() -> None:
    """FaberPhase - diffuse-interface Faber-Krahn experiments."""


@cli.command()
@click.option("--phase", default="ones", show_default=True, help="ones, an init name, recovery:<shape> or a field CSV")
@config_options()
@experiment_command
def eig(runner: ExperimentRunner, phase: str) -> dict[str, Any]:
    """Principal eigenpair of -Laplace + b^eps(phi); writes eig_w.csv."""
    return runner.run_eig(phase)


@cli.command("sharp-eig")
@click.option("--shape", required=True, help="e.g. ball:0.5, rectangle:1,0.5, ball:0.2@0.4,0+ball:0.2@-0.4,0")
@config_options()
@experiment_command
def sharp_eig(runner: ExperimentRunner, shape: str) -> dict[str, Any]:
    """Dirichlet eigenvalue of a parametric shape."""
    return runner.run_sharp_eig(shape)


@cli.command()
@click.option("--phase", default="ones", show_default=True, help="ones, an init name, recovery:<shape> or a field CSV")
@config_options()
@experiment_command
def energy(runner: ExperimentRunner, phase: str) -> dict[str, Any]:
    """Ginzburg-Landau energy, objective and Modica-Mortola bound of a field."""
    return runner.run_energy(phase)


@cli.command()
@config_options()
@experiment_command
def minimize(runner: ExperimentRunner) -> dict[str, Any]:
    """Projected-gradient minimization; writes field, trace and certificate."""
    return runner.run_minimize()


@cli.command()
@click.option("--eps", "eps_list", default="0.08,0.04,0.02", show_default=True, help="Comma-separated epsilons")
@click.option("--gamma", "gamma_list", default="0.01", show_default=True, help="Comma-separated gammas")
@click.option("--seeds", "seed_list", default="7", show_default=True, help="Comma-separated seeds")
@config_options(exclude=SWEEP_LISTS)
@experiment_command
def sweep(runner: ExperimentRunner, eps_list: str, gamma_list: str, seed_list: str) -> dict[str, Any]:
    """Independent minimizations over every (eps, gamma, seed) in parallel."""
    return runner.run_sweep(parse_float_list(eps_list), parse_float_list(gamma_list), parse_int_list(seed_list))


@cli.command("rearrange-check")
@click.option("--trials", default=DEFAULT_TRIALS, show_default=True, help="Exact-suite trials")
@click.option("--field-trials", default=DEFAULT_FIELD_TRIALS, show_default=True, help="Diffuse Faber-Krahn trials")
@click.option("--ps-resolutions", default="64,128,256", show_default=True, help="Free-boundary energy resolutions")
@config_options()
@experiment_command
def rearrange_check(
    runner: ExperimentRunner, trials: int, field_trials: int, ps_resolutions: str
) -> dict[str, Any]:
    """Rearrangement properties on seeded random fields."""
    return runner.run_rearrange_check(trials, field_trials, parse_int_list(ps_resolutions))


@cli.command()
@click.option("--t-max", default=MIN_T_MAX, show_default=True, help="Integration range [-t_max, t_max]")
@config_options()
@experiment_command
def profile(runner: ExperimentRunner, t_max: float) -> dict[str, Any]:
    """Optimal one-dimensional transition profile."""
    return runner.run_profile(t_max)


@cli.command("gamma-check")
@click.option("--shape", default=None, help="Recovery target; ball of radius R/2 when omitted")
@click.option(
    "--eps-list",
    default=",".join(f"{e:g}" for e in GAMMA_EPS_LIST),
    show_default=True,
    help="Strictly decreasing epsilons",
)
@config_options(exclude=("eps",))
@experiment_command
def gamma_check(runner: ExperimentRunner, shape: str | None, eps_list: str) -> dict[str, Any]:
    """Recovery-sequence values against the sharp-interface objective."""
    return runner.run_gamma_check(shape, parse_float_list(eps_list))


@cli.command("fk-compare")
@click.option("--shape", "shapes", multiple=True, help="Shape to rank (repeatable); equal-area set when omitted")
@click.option("--area", type=float, default=None, help="Area of the equal-area set; pi (R/2)^2 when omitted")
@config_options()
@experiment_command
def fk_compare(runner: ExperimentRunner, shapes: tuple[str, ...], area: float | None) -> dict[str, Any]:
    """Rank shapes by the sharp-interface objective."""
    return runner.run_fk_compare(list(shapes) or None, area)


@cli.command("check-assumptions")
@config_options()
@experiment_command
def check_assumptions(runner: ExperimentRunner) -> dict[str, Any]:
    """Sampled structural checks of the potential and coefficient family."""
    return runner.run_check_assumptions()


def main() -> None:
    """Main entry point."""
    cli()


if __name__ == "__main__":
    main()
