"""Utility functions for FaberPhase: artifact I/O, seeded randomness, reference values."""

import csv
import io
import json
import shutil
from collections.abc import Iterable, Sequence
from functools import lru_cache
from pathlib import Path
from typing import Any

import aiofiles
import numpy as np
import structlog
from scipy.special import jn_zeros

from .constants import FIELD_HEADER_CARTESIAN, FIELD_HEADER_RADIAL
from .exceptions import ArtifactError
from .grid import CartesianGrid, RadialGrid, ScalarField

logger = structlog.get_logger(__name__)

MAX_ARTIFACT_SIZE = 100 * 1024 * 1024  # 100 MB


def ensure_directory(path: Path) -> None:
    """Ensure directory exists, create if it doesn't."""
    path.mkdir(parents=True, exist_ok=True)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for ``seed``; identical seeds give identical streams."""
    return np.random.default_rng(seed)


@lru_cache(maxsize=32)
def bessel_zero(order: int = 0, k: int = 1) -> float:
    """k-th positive zero of the Bessel function J_order."""
    return float(jn_zeros(order, k)[k - 1])


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float | np.floating):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    if value is None:
        return ""
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Render rows as CSV text with shortest round-trip float formatting."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ArtifactError("Row does not match the CSV header", details=f"{len(row)} != {len(header)}")
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def json_text(data: dict[str, Any]) -> str:
    """Render a flat summary as JSON text.

    Raises:
        ArtifactError: If the data is not JSON serializable
    """
    try:
        return json.dumps(data, indent=2, ensure_ascii=False) + "\n"
    except (TypeError, ValueError) as e:
        raise ArtifactError("Data is not JSON serializable", details=str(e))


def _write_atomic(file_path: Path, text: str) -> None:
    try:
        ensure_directory(file_path.parent)
        temp_file = file_path.with_suffix(file_path.suffix + ".tmp")
        try:
            with temp_file.open("w", encoding="utf-8", newline="") as f:
                f.write(text)
                f.flush()
            temp_file.replace(file_path)
        finally:
            if temp_file.exists():
                temp_file.unlink()
    except OSError as e:
        raise ArtifactError(f"Failed to write {file_path}", details=str(e))
    logger.info("Artifact written", path=str(file_path), bytes=len(text))


async def _write_atomic_async(file_path: Path, text: str) -> None:
    try:
        ensure_directory(file_path.parent)
        temp_file = file_path.with_suffix(file_path.suffix + ".tmp")
        try:
            async with aiofiles.open(temp_file, "w", encoding="utf-8", newline="") as f:
                await f.write(text)
            shutil.move(str(temp_file), str(file_path))
        except Exception:
            if temp_file.exists():
                temp_file.unlink()
            raise
    except OSError as e:
        raise ArtifactError(f"Failed to write {file_path}", details=str(e))
    logger.info("Artifact written", path=str(file_path), bytes=len(text))


def save_csv_file(file_path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Write a CSV artifact atomically.

    Raises:
        ArtifactError: If the write fails or a row has the wrong width

    Example:
        >>> save_csv_file(Path("out/profile.csv"), ["t", "eta"], [(0.0, 0.5)])
    """
    _write_atomic(file_path, csv_text(header, rows))


async def save_csv_file_async(file_path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Write a CSV artifact atomically without blocking the event loop."""
    await _write_atomic_async(file_path, csv_text(header, rows))


def save_json_file(file_path: Path, data: dict[str, Any]) -> None:
    """Write a JSON summary atomically.

    Raises:
        ArtifactError: If the data is not serializable or the write fails

    Example:
        >>> save_json_file(Path("out/eig.json"), {"lambda1": 5.78})
    """
    _write_atomic(file_path, json_text(data))


async def save_json_file_async(file_path: Path, data: dict[str, Any]) -> None:
    """Write a JSON summary atomically without blocking the event loop."""
    await _write_atomic_async(file_path, json_text(data))


def load_json_file(file_path: Path) -> dict[str, Any]:
    """Load a JSON summary written by :func:`save_json_file`.

    Raises:
        ArtifactError: If the file is missing, too large or not a JSON object
    """
    try:
        size = file_path.stat().st_size
        if size > MAX_ARTIFACT_SIZE:
            raise ArtifactError("File too large", details=f"{size} bytes (max: {MAX_ARTIFACT_SIZE})")
        with file_path.open(encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ArtifactError(f"Failed to read {file_path}", details=str(e))
    if not isinstance(data, dict):
        raise ArtifactError("Expected a JSON object", details=type(data).__name__)
    return data


def field_header(grid: RadialGrid | CartesianGrid) -> list[str]:
    """CSV header of a field on ``grid``."""
    return list(FIELD_HEADER_RADIAL if isinstance(grid, RadialGrid) else FIELD_HEADER_CARTESIAN)


def field_rows(field: ScalarField) -> list[tuple[Any, ...]]:
    """One CSV row per degree of freedom: index, coordinates, value."""
    grid = field.grid
    values = field.values
    if isinstance(grid, RadialGrid):
        return [(i, float(r), float(v)) for i, (r, v) in enumerate(zip(grid.nodes, values, strict=True))]
    points = grid.points
    return [
        (i, float(p[0]), float(p[1]), float(v))
        for i, (p, v) in enumerate(zip(points, values, strict=True))
    ]


def save_field_csv(file_path: Path, field: ScalarField) -> None:
    """Write a field as CSV."""
    save_csv_file(file_path, field_header(field.grid), field_rows(field))


def read_field_csv(file_path: Path, grid: RadialGrid | CartesianGrid) -> ScalarField:
    """Read a field CSV written for ``grid``.

    Rows are matched by index; coordinates must agree with the grid.

    Raises:
        ArtifactError: If the file cannot be read or does not match the grid
    """
    header = field_header(grid)
    try:
        with file_path.open(encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            first = next(reader, None)
            rows = list(reader)
    except OSError as e:
        raise ArtifactError(f"Failed to read {file_path}", details=str(e))
    if first != header:
        raise ArtifactError("Unexpected field CSV header", details=f"expected {','.join(header)}")
    if len(rows) != grid.size:
        raise ArtifactError("Field CSV does not match the grid", details=f"{len(rows)} rows, grid has {grid.size}")
    try:
        table = np.array([[float(x) for x in row] for row in rows])
    except ValueError as e:
        raise ArtifactError("Field CSV contains non-numeric data", details=str(e))
    order = np.argsort(table[:, 0], kind="stable")
    table = table[order]
    if not np.array_equal(table[:, 0], np.arange(grid.size)):
        raise ArtifactError("Field CSV indices must be 0..size-1")
    coords = grid.nodes[:, None] if isinstance(grid, RadialGrid) else grid.points
    if not np.allclose(table[:, 1:-1], coords, rtol=0.0, atol=1e-9 * grid.domain.radius):
        raise ArtifactError("Field CSV coordinates do not match the grid")
    return ScalarField(grid=grid, values=table[:, -1])
