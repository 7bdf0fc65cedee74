"""Pytest configuration and fixtures."""

import sys
from pathlib import Path

import pytest

# Add src directory to Python path so tests can import faberphase package
src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))

from faberphase.coefficient import CoefficientFamily  # noqa: E402
from faberphase.grid import BallDomain, build_cartesian_grid, build_radial_grid  # noqa: E402
from faberphase.potential import Potential  # noqa: E402


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Keep FABER_PHASE_* variables of the host out of the tests."""
    import os

    for key in list(os.environ):
        if key.startswith("FABER_PHASE_"):
            monkeypatch.delenv(key, raising=False)


@pytest.fixture
def disk():
    """Unit disk."""
    return BallDomain(dimension=2, radius=1.0)


@pytest.fixture
def ball3():
    """Unit ball in three dimensions."""
    return BallDomain(dimension=3, radius=1.0)


@pytest.fixture
def cart32(disk):
    """Coarse Cartesian grid on the unit disk."""
    return build_cartesian_grid(disk, 32)


@pytest.fixture
def cart64(disk):
    """Moderate Cartesian grid on the unit disk."""
    return build_cartesian_grid(disk, 64)


@pytest.fixture
def radial2(disk):
    """Radial grid on the unit disk."""
    return build_radial_grid(disk, 400)


@pytest.fixture
def obstacle():
    """Double-obstacle potential."""
    return Potential.from_name("double-obstacle")


@pytest.fixture
def well():
    """Double-well potential."""
    return Potential.from_name("double-well")


@pytest.fixture
def family(disk):
    """Default coefficient family on the unit disk."""
    return CoefficientFamily.for_domain(disk)
