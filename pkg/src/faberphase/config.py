"""Experiment configuration for FaberPhase.

This module provides centralized configuration management using Pydantic.
Every subcommand of the CLI is driven by one ExperimentConfig.

Key Features:
- Validation of every field, with all failures reported together
- Cross-field checks (grid kind against dimension, schedule exponent)
- Automatic output directory creation
- Environment variable and config file support

Configuration is merged from, lowest priority first:
1. Default values (built into the app)
2. Environment variables (FABER_PHASE_*)
3. A ``key = value`` config file
4. Constructor parameters / CLI flags
"""

import os
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .coefficient import CoefficientFamily, kappa_limit
from .constants import (
    DEFAULT_BETA_BAR,
    DEFAULT_CARTESIAN_RESOLUTION,
    DEFAULT_DELTA,
    DEFAULT_DIMENSION,
    DEFAULT_EIGEN_MAX_ITER,
    DEFAULT_EIGEN_TOL,
    DEFAULT_EPS,
    DEFAULT_GAMMA,
    DEFAULT_GRID,
    DEFAULT_INIT,
    DEFAULT_KAPPA_USED,
    DEFAULT_LOG_LEVEL,
    DEFAULT_MASS,
    DEFAULT_OPT_MAX_ITER,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_PG_TOL,
    DEFAULT_POTENTIAL,
    DEFAULT_RADIAL_RESOLUTION,
    DEFAULT_RADIUS,
    DEFAULT_SEED,
    ENV_PREFIX,
    MAX_EIGEN_TOL,
    MIN_CARTESIAN_CELLS,
    MIN_RADIAL_NODES,
    SUPPORTED_LOG_LEVELS,
)
from .exceptions import ConfigurationError
from .grid import BallDomain, CartesianGrid, RadialGrid, build_grid
from .optimize import INIT_KINDS
from .potential import POTENTIAL_NAMES, Potential

GRID_KINDS = ("radial", "cartesian")


class ExperimentConfig(BaseModel):
    """Parameters of one FaberPhase experiment.

    Attributes:
        dimension: Space dimension n (2 or 3)
        radius: Radius R of the ball domain
        grid: Grid kind, ``radial`` or ``cartesian``
        resolution: Nodes (radial) or cells per axis (Cartesian); grid default when omitted
        potential: Potential name
        beta_bar: Scale constant of the coefficient schedule
        kappa_used: Exponent of the coefficient schedule
        c_half: Limit coefficient at 1/2; 10 / R^2 when omitted
        eps: Interface width parameter
        gamma: Weight of the Ginzburg-Landau energy
        mass: Prescribed mean of the phase field
        delta: Interface threshold for certificates
        tol: Eigensolver relative residual tolerance
        max_iter: Optimizer iteration cap
        pg_tol: Optimizer projected-gradient tolerance
        eigen_max_iter: Eigensolver outer iteration cap
        init: Optimizer initial field; offset-bump (Cartesian) or radial-bump (radial) when omitted
        seed: RNG seed, recorded in every summary
        output_dir: Directory receiving the artifacts
        threads: Worker cap for sweeps; CPU count when omitted
        log_level: Logging level

    Environment Variables:
        FABER_PHASE_<FIELD>: Override any field, e.g. FABER_PHASE_THREADS=4

    Example:
        >>> config = ExperimentConfig(grid="radial", dimension=3, resolution=2000)
        >>> config.effective_resolution
        2000
    """

    model_config = ConfigDict(
        str_strip_whitespace=True,
        validate_assignment=True,
        extra="forbid",
    )

    # Domain
    dimension: int = Field(default=DEFAULT_DIMENSION)
    radius: float = Field(default=DEFAULT_RADIUS, gt=0)
    grid: str = Field(default=DEFAULT_GRID)
    resolution: int | None = Field(default=None)

    # Model
    potential: str = Field(default=DEFAULT_POTENTIAL)
    beta_bar: float = Field(default=DEFAULT_BETA_BAR, gt=0)
    kappa_used: float = Field(default=DEFAULT_KAPPA_USED, gt=0)
    c_half: float | None = Field(default=None, gt=0)
    eps: float = Field(default=DEFAULT_EPS, gt=0)
    gamma: float = Field(default=DEFAULT_GAMMA, ge=0)
    mass: float = Field(default=DEFAULT_MASS, gt=0, lt=1)
    delta: float = Field(default=DEFAULT_DELTA, gt=0, lt=0.5)

    # Solvers
    tol: float = Field(default=DEFAULT_EIGEN_TOL, gt=0, le=MAX_EIGEN_TOL)
    max_iter: int = Field(default=DEFAULT_OPT_MAX_ITER, ge=1)
    pg_tol: float = Field(default=DEFAULT_PG_TOL, gt=0)
    eigen_max_iter: int = Field(default=DEFAULT_EIGEN_MAX_ITER, ge=1)
    init: str | None = Field(default=None)

    # Runs
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)
    output_dir: Path = Field(default=Path(DEFAULT_OUTPUT_DIR))
    threads: int | None = Field(default=None, ge=1)
    log_level: str = Field(default=DEFAULT_LOG_LEVEL)

    @field_validator("dimension")
    @classmethod
    def validate_dimension(cls, v: int) -> int:
        """Only planar and spatial balls are supported."""
        if v not in (2, 3):
            raise ValueError(f"Dimension must be 2 or 3, got {v}")
        return v

    @field_validator("grid", "potential", "init", mode="before")
    @classmethod
    def normalize_name(cls, v: Any) -> Any:
        """Lower-case names and accept underscores for dashes."""
        if isinstance(v, str):
            return v.strip().lower().replace("_", "-")
        return v

    @field_validator("grid")
    @classmethod
    def validate_grid(cls, v: str) -> str:
        """Validate the grid kind."""
        if v not in GRID_KINDS:
            raise ValueError(f"Grid must be one of: {', '.join(GRID_KINDS)}")
        return v

    @field_validator("potential")
    @classmethod
    def validate_potential(cls, v: str) -> str:
        """Validate the potential name."""
        if v not in POTENTIAL_NAMES:
            raise ValueError(f"Potential must be one of: {', '.join(POTENTIAL_NAMES)}")
        return v

    @field_validator("init")
    @classmethod
    def validate_init(cls, v: str | None) -> str | None:
        """Validate the optimizer start."""
        if v is not None and v not in INIT_KINDS:
            raise ValueError(f"Initial field must be one of: {', '.join(INIT_KINDS)}")
        return v

    @field_validator("log_level", mode="before")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate and normalize log level.

        Raises:
            ValueError: If the log level is not supported
        """
        if isinstance(v, str):
            v = v.strip().upper()
        if v not in SUPPORTED_LOG_LEVELS:
            raise ValueError(f"Log level must be one of: {', '.join(SUPPORTED_LOG_LEVELS)}")
        return v

    @model_validator(mode="after")
    def validate_combination(self) -> "ExperimentConfig":
        """Cross-field checks: grid against dimension, resolution floor, schedule exponent."""
        problems = []
        if self.grid == "cartesian" and self.dimension != 2:
            problems.append("cartesian grids require dimension 2")
        floor = MIN_RADIAL_NODES if self.grid == "radial" else MIN_CARTESIAN_CELLS
        if self.resolution is not None and self.resolution < floor:
            problems.append(f"resolution must be at least {floor} for a {self.grid} grid")
        limit = kappa_limit(self.dimension)
        if self.kappa_used >= limit:
            problems.append(f"kappa_used must be below {limit:g} in dimension {self.dimension}")
        if self.init == "offset-bump" and self.grid == "radial":
            problems.append("offset-bump needs a cartesian grid")
        if problems:
            raise ValueError("; ".join(problems))
        return self

    def __init__(self, **kwargs: object) -> None:
        """Merge environment variables below explicit keyword arguments.

        Keyword arguments that are None are treated as not given, so unset
        CLI flags fall through to the environment and the defaults.
        """
        env_config = self._load_from_env()
        explicit = {k: v for k, v in kwargs.items() if v is not None}
        super().__init__(**{**env_config, **explicit})
        self.output_dir.mkdir(parents=True, exist_ok=True)

    @classmethod
    def load(cls, config_file: Path | None = None, **overrides: object) -> "ExperimentConfig":
        """Build a config from environment, optional file and overrides.

        Raises:
            ConfigurationError: If the file cannot be read or parsed
            pydantic.ValidationError: Listing every offending field
        """
        file_config = load_config_file(config_file) if config_file is not None else {}
        explicit = {k: v for k, v in overrides.items() if v is not None}
        return cls(**{**file_config, **explicit})

    @staticmethod
    def _load_from_env() -> dict[str, Any]:
        """Collect FABER_PHASE_<FIELD> variables for known fields."""
        config: dict[str, Any] = {}
        for name in ExperimentConfig.model_fields:
            if value := os.getenv(f"{ENV_PREFIX}{name.upper()}"):
                config[name] = value
        return config

    @property
    def effective_resolution(self) -> int:
        """Resolution, or the grid kind's default."""
        if self.resolution is not None:
            return self.resolution
        return DEFAULT_RADIAL_RESOLUTION if self.grid == "radial" else DEFAULT_CARTESIAN_RESOLUTION

    @property
    def effective_init(self) -> str:
        """Initial field, or the grid kind's default."""
        if self.init is not None:
            return self.init
        return "radial-bump" if self.grid == "radial" else DEFAULT_INIT

    @property
    def worker_count(self) -> int:
        """Sweep parallelism cap."""
        return self.threads if self.threads is not None else max(1, os.cpu_count() or 1)

    @property
    def log_file(self) -> Path:
        """Path to the run log file."""
        return self.output_dir / "faberphase.log"

    def domain(self) -> BallDomain:
        """Ball domain of this experiment."""
        return BallDomain(dimension=self.dimension, radius=self.radius)

    def build_grid(self) -> RadialGrid | CartesianGrid:
        """Grid of this experiment."""
        kind = "radial" if self.grid == "radial" else "cartesian"
        return build_grid(self.domain(), kind, self.effective_resolution)

    def build_potential(self) -> Potential:
        """Potential of this experiment."""
        return Potential.from_name(self.potential)

    def build_coefficient(self) -> CoefficientFamily:
        """Coefficient family of this experiment."""
        return CoefficientFamily.for_domain(
            self.domain(), kappa_used=self.kappa_used, beta_bar=self.beta_bar, c_half=self.c_half
        )


def load_config_file(path: Path) -> dict[str, str]:
    """Parse a ``key = value`` file; ``#`` starts a comment, dashes in keys become underscores.

    Raises:
        ConfigurationError: If the file cannot be read or a line is malformed
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Cannot read config file {path}", details=str(e))
    config: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        if not sep or not key:
            raise ConfigurationError("Malformed config line", details=f"{path}:{number}: {raw.strip()}")
        if key in config:
            raise ConfigurationError("Duplicate config key", details=f"{path}:{number}: {key}")
        config[key] = value.strip()
    return config
