"""Tests for CLI functionality."""

import json

import pytest
from click.testing import CliRunner

from faberphase.cli import cli, parse_float_list, parse_int_list


class TestCLI:
    """Test CLI commands."""

    @pytest.fixture
    def runner(self):
        """Create CLI runner for testing."""
        return CliRunner()

    def test_cli_help(self, runner):
        """Help lists every subcommand."""
        result = runner.invoke(cli, ["--help"])
        assert result.exit_code == 0
        for command in ("eig", "sharp-eig", "minimize", "sweep", "rearrange-check", "gamma-check", "fk-compare"):
            assert command in result.output

    def test_version(self, runner):
        """--version names the program."""
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert "FaberPhase" in result.output

    def test_eig_json(self, runner, tmp_path):
        """eig prints its summary and writes the same summary to disk."""
        out = tmp_path / "out"
        result = runner.invoke(cli, ["eig", "--grid", "radial", "--output-dir", str(out), "-f", "json"])
        assert result.exit_code == 0
        assert '"lambda1"' in result.output
        summary = json.loads((out / "eig.json").read_text())
        assert summary["violations"] == 0
        assert (out / "eig_w.csv").exists()

    def test_eig_table(self, runner, tmp_path):
        """The default format is a table."""
        result = runner.invoke(cli, ["eig", "--grid", "radial", "--output-dir", str(tmp_path)])
        assert result.exit_code == 0
        assert "lambda1" in result.output

    def test_invalid_dimension(self, runner, tmp_path):
        """Invalid configuration exits with code 2."""
        result = runner.invoke(cli, ["eig", "--dimension", "4", "--output-dir", str(tmp_path)])
        assert result.exit_code == 2

    def test_unknown_phase(self, runner, tmp_path):
        """Unknown phases are configuration errors."""
        result = runner.invoke(cli, ["eig", "--phase", "stripes", "--resolution", "32", "--output-dir", str(tmp_path)])
        assert result.exit_code == 2

    def test_missing_config_file(self, runner, tmp_path):
        """An unreadable config file is a configuration error."""
        result = runner.invoke(
            cli, ["eig", "--config", str(tmp_path / "missing.conf"), "--output-dir", str(tmp_path)]
        )
        assert result.exit_code == 2

    def test_config_file(self, runner, tmp_path):
        """Values from the config file reach the run."""
        path = tmp_path / "run.conf"
        path.write_text("grid = radial\nresolution = 100\n")
        result = runner.invoke(cli, ["eig", "--config", str(path), "--output-dir", str(tmp_path), "-f", "json"])
        assert result.exit_code == 0
        summary = json.loads((tmp_path / "eig.json").read_text())
        assert summary["grid"] == "radial"

    def test_check_assumptions(self, runner, tmp_path):
        """Default potentials and coefficients pass."""
        result = runner.invoke(cli, ["check-assumptions", "--output-dir", str(tmp_path)])
        assert result.exit_code == 0
        assert (tmp_path / "check-assumptions.json").exists()

    def test_profile(self, runner, tmp_path):
        """profile writes the transition profile."""
        result = runner.invoke(cli, ["profile", "--grid", "radial", "--output-dir", str(tmp_path), "-f", "json"])
        assert result.exit_code == 0
        assert (tmp_path / "profile.csv").exists()

    def test_gamma_check_violation_exit_code(self, runner, tmp_path):
        """A recovery check stopped at eps = 0.02 misses the eigenvalue tolerance and exits with 1."""
        args = ["gamma-check", "--grid", "radial", "--resolution", "200", "--eps-list", "0.04,0.02"]
        result = runner.invoke(cli, [*args, "--output-dir", str(tmp_path), "-f", "json"])
        assert result.exit_code == 1
        summary = json.loads((tmp_path / "gamma-check.json").read_text())
        assert summary["eigen_gap_within_tol"] is False
        assert summary["rng"] == "PCG64"

    def test_sweep_bad_list(self, runner, tmp_path):
        """Malformed sweep lists are usage errors."""
        result = runner.invoke(cli, ["sweep", "--eps", "abc", "--resolution", "32", "--output-dir", str(tmp_path)])
        assert result.exit_code == 2
        assert "comma-separated" in result.output


class TestListParsing:
    """Test comma-separated option parsing."""

    def test_float_list(self):
        """Blank entries are skipped."""
        assert parse_float_list("0.08, 0.04,,0.02") == [0.08, 0.04, 0.02]

    def test_int_list(self):
        """Integers parse."""
        assert parse_int_list("1,2,3") == [1, 2, 3]
