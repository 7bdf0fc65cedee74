"""Tests for configuration management."""

from pathlib import Path

import pydantic
import pytest

from faberphase.config import ExperimentConfig, load_config_file
from faberphase.constants import (
    DEFAULT_CARTESIAN_RESOLUTION,
    DEFAULT_EPS,
    DEFAULT_LOG_LEVEL,
    DEFAULT_RADIAL_RESOLUTION,
    DEFAULT_SEED,
)
from faberphase.exceptions import ConfigurationError
from faberphase.grid import CartesianGrid, RadialGrid


@pytest.fixture(autouse=True)
def in_tmp(tmp_path, monkeypatch):
    """Run every test from a scratch directory so the default output dir lands there."""
    monkeypatch.chdir(tmp_path)


class TestExperimentConfig:
    """Test ExperimentConfig."""

    def test_defaults(self, tmp_path):
        """Default configuration values."""
        config = ExperimentConfig()
        assert config.dimension == 2
        assert config.grid == "cartesian"
        assert config.eps == DEFAULT_EPS
        assert config.seed == DEFAULT_SEED
        assert config.log_level == DEFAULT_LOG_LEVEL
        assert config.effective_resolution == DEFAULT_CARTESIAN_RESOLUTION
        assert config.effective_init == "offset-bump"
        assert (tmp_path / "faberphase-out").is_dir()

    def test_radial_defaults(self):
        """Radial grids default to more nodes and a centered start."""
        config = ExperimentConfig(grid="radial")
        assert config.effective_resolution == DEFAULT_RADIAL_RESOLUTION
        assert config.effective_init == "radial-bump"

    def test_name_normalization(self):
        """Names are lower-cased and underscores become dashes."""
        config = ExperimentConfig(grid="RADIAL", potential="Double_Well", init="Seeded_Noise", log_level="debug")
        assert config.grid == "radial"
        assert config.potential == "double-well"
        assert config.init == "seeded-noise"
        assert config.log_level == "DEBUG"

    def test_env_override(self, monkeypatch):
        """FABER_PHASE_* variables override the defaults."""
        monkeypatch.setenv("FABER_PHASE_EPS", "0.02")
        monkeypatch.setenv("FABER_PHASE_THREADS", "3")
        config = ExperimentConfig()
        assert config.eps == 0.02
        assert config.worker_count == 3

    def test_explicit_beats_env(self, monkeypatch):
        """Keyword arguments win over the environment; None falls through."""
        monkeypatch.setenv("FABER_PHASE_GAMMA", "0.5")
        assert ExperimentConfig(gamma=0.1).gamma == 0.1
        assert ExperimentConfig(gamma=None).gamma == 0.5

    def test_output_dir_created(self, tmp_path):
        """The output directory is created on construction."""
        target = tmp_path / "runs" / "a"
        ExperimentConfig(output_dir=target)
        assert target.is_dir()

    def test_builders(self):
        """Grids, potentials and coefficients follow the config."""
        config = ExperimentConfig(grid="radial", dimension=3, resolution=50, potential="double-well", c_half=4.0)
        grid = config.build_grid()
        assert isinstance(grid, RadialGrid)
        assert grid.node_count == 50
        assert config.build_potential().kind == "double-well"
        assert config.build_coefficient().c_half == 4.0
        cartesian = ExperimentConfig(resolution=32).build_grid()
        assert isinstance(cartesian, CartesianGrid)

    def test_log_file(self, tmp_path):
        """The run log lives in the output directory."""
        config = ExperimentConfig(output_dir=tmp_path / "out")
        assert config.log_file == tmp_path / "out" / "faberphase.log"


class TestValidation:
    """Test field and cross-field validation."""

    @pytest.mark.parametrize(
        ("field", "value"),
        [
            ("dimension", 4),
            ("radius", 0.0),
            ("grid", "hexagonal"),
            ("potential", "quartic"),
            ("mass", 1.0),
            ("delta", 0.5),
            ("tol", 1e-3),
            ("init", "checkerboard"),
            ("log_level", "LOUD"),
            ("threads", 0),
        ],
    )
    def test_invalid_field(self, field, value):
        """Every field rejects values outside its range."""
        with pytest.raises(pydantic.ValidationError):
            ExperimentConfig(**{field: value})

    def test_errors_are_aggregated(self):
        """Several bad fields are reported together."""
        with pytest.raises(pydantic.ValidationError) as exc_info:
            ExperimentConfig(dimension=4, eps=-1.0, mass=2.0)
        assert exc_info.value.error_count() == 3

    def test_cartesian_needs_plane(self):
        """Cartesian grids are two-dimensional."""
        with pytest.raises(pydantic.ValidationError, match="dimension 2"):
            ExperimentConfig(dimension=3)

    def test_resolution_floor(self):
        """Resolutions below the grid minimum are rejected."""
        with pytest.raises(pydantic.ValidationError, match="at least"):
            ExperimentConfig(resolution=8)

    def test_kappa_limit(self):
        """The schedule exponent stays below its dimension limit."""
        with pytest.raises(pydantic.ValidationError, match="kappa_used"):
            ExperimentConfig(grid="radial", dimension=3, kappa_used=0.7)

    def test_offset_start_on_radial_grid(self):
        """Off-center starts need a Cartesian grid."""
        with pytest.raises(pydantic.ValidationError, match="offset-bump"):
            ExperimentConfig(grid="radial", init="offset-bump")

    def test_unknown_key(self):
        """Unknown keys are rejected."""
        with pytest.raises(pydantic.ValidationError):
            ExperimentConfig(colour="blue")


class TestConfigFile:
    """Test key = value config files."""

    def test_parse(self, tmp_path):
        """Comments and blank lines are skipped; dashes in keys become underscores."""
        path = tmp_path / "run.conf"
        path.write_text("# sweep\neps = 0.02\n\nmax-iter = 50  # cap\n")
        assert load_config_file(path) == {"eps": "0.02", "max_iter": "50"}

    def test_precedence(self, tmp_path, monkeypatch):
        """Overrides beat the file, which beats the environment."""
        monkeypatch.setenv("FABER_PHASE_EPS", "0.03")
        monkeypatch.setenv("FABER_PHASE_SEED", "11")
        path = tmp_path / "run.conf"
        path.write_text("eps = 0.02\ngamma = 0.2\n")
        config = ExperimentConfig.load(path, gamma=0.3, mass=None)
        assert config.eps == 0.02
        assert config.gamma == 0.3
        assert config.seed == 11

    def test_missing_file(self, tmp_path):
        """Unreadable files raise ConfigurationError."""
        with pytest.raises(ConfigurationError, match="Cannot read"):
            load_config_file(tmp_path / "missing.conf")

    @pytest.mark.parametrize("text", ["eps 0.02\n", "= 0.02\n", "eps = 0.1\neps = 0.2\n"])
    def test_malformed(self, tmp_path, text):
        """Lines without a key, without '=' or repeated keys are rejected."""
        path = tmp_path / "bad.conf"
        path.write_text(text)
        with pytest.raises(ConfigurationError):
            load_config_file(path)

    def test_invalid_value_in_file(self, tmp_path):
        """File values are validated like any other input."""
        path = tmp_path / "run.conf"
        path.write_text("eps = zero\n")
        with pytest.raises(pydantic.ValidationError):
            ExperimentConfig.load(Path(path))
