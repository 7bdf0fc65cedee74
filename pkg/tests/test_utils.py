"""Tests for utility functions."""

import json

import numpy as np
import pytest

from faberphase.exceptions import ArtifactError
from faberphase.grid import ScalarField
from faberphase.utils import (
    bessel_zero,
    csv_text,
    ensure_directory,
    field_header,
    json_text,
    load_json_file,
    make_rng,
    read_field_csv,
    save_csv_file,
    save_csv_file_async,
    save_field_csv,
    save_json_file,
    save_json_file_async,
)


class TestCsvText:
    """Test CSV rendering."""

    def test_formatting(self):
        """Floats round-trip, booleans are lowercase and None is empty."""
        text = csv_text(["a", "b", "c", "d"], [(0.1, True, None, np.int64(3))])
        assert text == "a,b,c,d\n0.1,true,,3\n"

    def test_numpy_floats(self):
        """numpy floats are written with full precision."""
        text = csv_text(["x"], [(np.float64(1.0) / 3.0,)])
        assert float(text.splitlines()[1]) == 1.0 / 3.0

    def test_row_width(self):
        """Rows must match the header."""
        with pytest.raises(ArtifactError, match="header"):
            csv_text(["a", "b"], [(1,)])


class TestJson:
    """Test JSON summaries."""

    def test_indent_and_newline(self):
        """Summaries are indented and end with a newline."""
        assert json_text({"lambda1": 5.5}) == '{\n  "lambda1": 5.5\n}\n'

    def test_not_serializable(self):
        """Unserializable values raise ArtifactError."""

        class Opaque:
            pass

        with pytest.raises(ArtifactError, match="not JSON serializable"):
            json_text({"obj": Opaque()})

    def test_save_and_load(self, tmp_path):
        """Saved summaries load back unchanged."""
        path = tmp_path / "nested" / "eig.json"
        data = {"command": "eig", "lambda1": 5.783185962946784, "passed": True}
        save_json_file(path, data)
        assert load_json_file(path) == data
        assert not path.with_suffix(".json.tmp").exists()

    def test_load_missing(self, tmp_path):
        """Missing files raise ArtifactError."""
        with pytest.raises(ArtifactError, match="Failed to read"):
            load_json_file(tmp_path / "missing.json")

    def test_load_invalid(self, tmp_path):
        """Malformed JSON raises ArtifactError."""
        path = tmp_path / "bad.json"
        path.write_text("not json")
        with pytest.raises(ArtifactError):
            load_json_file(path)

    def test_load_not_object(self, tmp_path):
        """Only JSON objects are summaries."""
        path = tmp_path / "list.json"
        path.write_text(json.dumps([1, 2, 3]))
        with pytest.raises(ArtifactError, match="JSON object"):
            load_json_file(path)


class TestFiles:
    """Test atomic artifact writes."""

    def test_ensure_directory(self, tmp_path):
        """Nested directories are created."""
        target = tmp_path / "a" / "b"
        ensure_directory(target)
        assert target.is_dir()

    def test_save_csv(self, tmp_path):
        """CSV files are written with the header first."""
        path = tmp_path / "profile.csv"
        save_csv_file(path, ["t", "eta"], [(0.0, 0.5), (0.001, 0.5005)])
        assert path.read_text().splitlines() == ["t,eta", "0.0,0.5", "0.001,0.5005"]

    def test_write_failure(self, tmp_path):
        """Writing below a regular file fails cleanly."""
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(ArtifactError, match="Failed to write"):
            save_csv_file(blocker / "out.csv", ["a"], [(1,)])

    @pytest.mark.asyncio
    async def test_async_writes(self, tmp_path):
        """Async writers produce the same files as the sync ones."""
        await save_csv_file_async(tmp_path / "trace.csv", ["iter", "J"], [(0, 1.5)])
        await save_json_file_async(tmp_path / "summary.json", {"violations": 0})
        assert (tmp_path / "trace.csv").read_text() == "iter,J\n0,1.5\n"
        assert load_json_file(tmp_path / "summary.json") == {"violations": 0}


class TestFieldCsv:
    """Test field CSV files."""

    def test_headers(self, cart32, radial2):
        """Radial fields have one coordinate, Cartesian fields two."""
        assert field_header(radial2) == ["index", "r_or_x", "value"]
        assert field_header(cart32) == ["index", "r_or_x", "y", "value"]

    @pytest.mark.parametrize("grid_name", ["cart32", "radial2"])
    def test_read_back(self, tmp_path, request, grid_name):
        """A written field is read back on the same grid."""
        grid = request.getfixturevalue(grid_name)
        values = make_rng(4).random(grid.size)
        path = tmp_path / "field.csv"
        save_field_csv(path, ScalarField(grid=grid, values=values))
        assert np.array_equal(read_field_csv(path, grid).values, values)

    def test_wrong_grid(self, tmp_path, cart32, cart64):
        """Fields written for another grid are rejected."""
        path = tmp_path / "field.csv"
        save_field_csv(path, ScalarField(grid=cart32, values=np.zeros(cart32.size)))
        with pytest.raises(ArtifactError, match="does not match"):
            read_field_csv(path, cart64)

    def test_wrong_header(self, tmp_path, cart32):
        """A radial field cannot be read on a Cartesian grid."""
        path = tmp_path / "field.csv"
        path.write_text("index,r_or_x,value\n0,0.0,1.0\n")
        with pytest.raises(ArtifactError, match="header"):
            read_field_csv(path, cart32)

    def test_non_numeric(self, tmp_path, radial2):
        """Non-numeric cells are rejected."""
        path = tmp_path / "field.csv"
        rows = "".join(f"{i},{float(r)!r},x\n" for i, r in enumerate(radial2.nodes))
        path.write_text("index,r_or_x,value\n" + rows)
        with pytest.raises(ArtifactError, match="non-numeric"):
            read_field_csv(path, radial2)


class TestReferenceValues:
    """Test seeded randomness and Bessel zeros."""

    def test_make_rng(self):
        """Equal seeds give equal streams."""
        assert make_rng(7).random() == make_rng(7).random()

    def test_bessel_zero(self):
        """First zero of J0."""
        assert bessel_zero() == pytest.approx(2.404825557695773)
