"""Ball domains, their discretizations and the fields living on them.

This module defines the data structures every solver works on:
- BallDomain: the design domain B_R(0) in dimension 2 or 3
- RadialGrid: cell-centered shells for radially symmetric fields
- CartesianGrid: square cells masked to the disk (two dimensions only)
- ScalarField / PhaseField: immutable grid functions, the latter carrying
  the box, mass and boundary constraints of an admissible phase field
"""

from __future__ import annotations

import math
from functools import cached_property
from typing import Annotated, Any, Literal

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .constants import MASS_TOL, MIN_CARTESIAN_CELLS, MIN_RADIAL_NODES
from .exceptions import ValidationError

logger = structlog.get_logger(__name__)


class BallDomain(BaseModel):
    """The design domain Omega = B_R(0).

    Attributes:
        dimension: Space dimension, 2 or 3
        radius: Ball radius R > 0

    Example:
        >>> BallDomain(dimension=2, radius=1.0).volume()
        3.141592653589793
    """

    model_config = ConfigDict(frozen=True)

    dimension: int = Field(default=2, description="Space dimension")
    radius: float = Field(default=1.0, description="Ball radius")

    @field_validator("dimension")
    @classmethod
    def validate_dimension(cls, v: int) -> int:
        """Validate that the dimension is 2 or 3."""
        if v not in (2, 3):
            raise ValueError(f"Dimension must be 2 or 3, got {v}")
        return v

    @field_validator("radius")
    @classmethod
    def validate_radius(cls, v: float) -> float:
        """Validate that the radius is positive and finite."""
        if not math.isfinite(v) or v <= 0:
            raise ValueError(f"Radius must be positive, got {v}")
        return v

    def ball_volume(self, r: Any) -> Any:
        """Volume of the centered ball of radius ``r`` in this dimension."""
        if self.dimension == 2:
            return math.pi * np.square(r)
        return 4.0 / 3.0 * math.pi * np.power(r, 3)

    def sphere_area(self, r: Any) -> Any:
        """Surface measure of the centered sphere of radius ``r``."""
        if self.dimension == 2:
            return 2.0 * math.pi * np.asarray(r, dtype=float)
        return 4.0 * math.pi * np.square(r)

    def volume(self) -> float:
        """Return |Omega|."""
        return float(self.ball_volume(self.radius))

    def boundary_measure(self) -> float:
        """Return the surface measure of the boundary sphere."""
        return float(self.sphere_area(self.radius))


class RadialGrid(BaseModel):
    """Cell-centered radial grid with exact shell-volume weights.

    Node ``i`` sits at r_i = (i + 1/2) h with h = R/N and carries the volume
    of the shell [ih, (i+1)h].
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["radial"] = "radial"
    domain: BallDomain
    node_count: int

    @field_validator("node_count")
    @classmethod
    def validate_node_count(cls, v: int) -> int:
        """Validate the minimum node count."""
        if v < MIN_RADIAL_NODES:
            raise ValueError(f"Grid too coarse: N={v} < {MIN_RADIAL_NODES}")
        return v

    @property
    def h(self) -> float:
        """Radial spacing."""
        return self.domain.radius / self.node_count

    @property
    def size(self) -> int:
        """Number of degrees of freedom."""
        return self.node_count

    @cached_property
    def nodes(self) -> np.ndarray:
        """Node radii."""
        return (np.arange(self.node_count) + 0.5) * self.h

    @cached_property
    def weights(self) -> np.ndarray:
        """Exact shell volumes."""
        i = np.arange(self.node_count, dtype=float)
        h = self.h
        if self.domain.dimension == 2:
            return math.pi * (2.0 * i + 1.0) * h * h
        return 4.0 / 3.0 * math.pi * (3.0 * i * i + 3.0 * i + 1.0) * h**3

    @cached_property
    def distances(self) -> np.ndarray:
        """Distance of every node from the origin."""
        return self.nodes

    @cached_property
    def points(self) -> np.ndarray:
        """Nodes embedded on the first axis, shape (N, n)."""
        pts = np.zeros((self.node_count, self.domain.dimension))
        pts[:, 0] = self.nodes
        return pts

    @cached_property
    def boundary_layer(self) -> np.ndarray:
        """Boolean mask of the outermost node layer."""
        mask = np.zeros(self.node_count, dtype=bool)
        mask[-1] = True
        return mask

    @property
    def total_weight(self) -> float:
        """Discrete measure of the domain."""
        return float(np.sum(self.weights))


class CartesianGrid(BaseModel):
    """Square-cell grid on [-R, R]^2 restricted to cells centered inside the disk.

    Cells are enumerated in row-major order of their lattice index (i, j),
    where i indexes the first coordinate.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["cartesian"] = "cartesian"
    domain: BallDomain
    cells_per_axis: int

    @field_validator("cells_per_axis")
    @classmethod
    def validate_cells(cls, v: int) -> int:
        """Validate the minimum resolution."""
        if v < MIN_CARTESIAN_CELLS:
            raise ValueError(f"Grid too coarse: M={v} < {MIN_CARTESIAN_CELLS}")
        return v

    @model_validator(mode="after")
    def validate_planar(self) -> CartesianGrid:
        """Cartesian grids exist only in two dimensions."""
        if self.domain.dimension != 2:
            raise ValueError("Cartesian grids require dimension 2")
        return self

    @property
    def h(self) -> float:
        """Cell size."""
        return 2.0 * self.domain.radius / self.cells_per_axis

    @cached_property
    def squared_offsets(self) -> np.ndarray:
        """Integer (2i+1-M)^2 + (2j+1-M)^2 for every lattice cell, shape (M, M).

        Equals (2|x|/h)^2 exactly, so distance ties are resolved without
        rounding.
        """
        m = self.cells_per_axis
        k = 2 * np.arange(m, dtype=np.int64) + 1 - m
        return k[:, None] ** 2 + k[None, :] ** 2

    @cached_property
    def mask(self) -> np.ndarray:
        """Cells whose center lies strictly inside the disk, shape (M, M)."""
        return self.squared_offsets < self.cells_per_axis**2

    @cached_property
    def cell_index(self) -> np.ndarray:
        """Lattice indices (i, j) of the masked cells in row-major order."""
        return np.argwhere(self.mask)

    @property
    def size(self) -> int:
        """Number of masked cells."""
        return int(self.cell_index.shape[0])

    @cached_property
    def points(self) -> np.ndarray:
        """Cell centers, shape (K, 2)."""
        return (self.cell_index + 0.5) * self.h - self.domain.radius

    @cached_property
    def weights(self) -> np.ndarray:
        """Equal cell areas h^2."""
        return np.full(self.size, self.h * self.h)

    @cached_property
    def squared_distance_units(self) -> np.ndarray:
        """Exact integer squared distances of the masked cells."""
        i, j = self.cell_index[:, 0], self.cell_index[:, 1]
        return self.squared_offsets[i, j]

    @cached_property
    def distances(self) -> np.ndarray:
        """Distance of every cell center from the origin."""
        return 0.5 * self.h * np.sqrt(self.squared_distance_units.astype(float))

    @cached_property
    def boundary_layer(self) -> np.ndarray:
        """Masked cells with at least one 4-neighbor outside the mask."""
        padded = np.pad(self.mask, 1, constant_values=False)
        inner = (
            padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
        )
        i, j = self.cell_index[:, 0], self.cell_index[:, 1]
        return ~inner[i, j]

    @property
    def total_weight(self) -> float:
        """Discrete measure of the domain."""
        return float(np.sum(self.weights))


Grid = Annotated[RadialGrid | CartesianGrid, Field(discriminator="kind")]


class ScalarField(BaseModel):
    """Immutable real values attached to the nodes or cells of a grid.

    Attributes:
        grid: The grid the values live on
        values: One finite value per degree of freedom (read-only array)
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def coerce_values(cls, v: Any) -> np.ndarray:
        """Copy the values into a read-only float64 vector."""
        arr = np.array(v, dtype=float).reshape(-1)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def validate_shape(self) -> ScalarField:
        """Check value count and finiteness."""
        if self.values.shape[0] != self.grid.size:
            raise ValueError(
                f"Field has {self.values.shape[0]} values but the grid has {self.grid.size}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("Field values must be finite")
        return self

    def with_values(self, values: Any) -> ScalarField:
        """Return a new field on the same grid."""
        return ScalarField(grid=self.grid, values=values)

    @property
    def weights(self) -> np.ndarray:
        """Quadrature weights of the underlying grid."""
        return self.grid.weights


class PhaseField(ScalarField):
    """Admissible phase field: box, mass and boundary constraints enforced.

    Attributes:
        mass: Prescribed weighted mean m in (0, 1)
    """

    mass: float

    @field_validator("mass")
    @classmethod
    def validate_mass(cls, v: float) -> float:
        """Validate that the mass lies in (0, 1)."""
        if not 0.0 < v < 1.0:
            raise ValueError(f"Mass must lie in (0, 1), got {v}")
        return v

    @model_validator(mode="after")
    def validate_admissible(self) -> PhaseField:
        """Check the box, boundary and mass constraints."""
        values = self.values
        if np.any(values < 0.0) or np.any(values > 1.0):
            raise ValueError("Phase field values must lie in [0, 1]")
        if np.any(values[self.grid.boundary_layer] != 0.0):
            raise ValueError("Phase field must vanish on the boundary layer")
        mean = float(np.dot(self.grid.weights, values)) / self.grid.total_weight
        if abs(mean - self.mass) > MASS_TOL:
            raise ValueError(f"Weighted mean {mean:.12g} differs from mass {self.mass}")
        return self


def build_radial_grid(domain: BallDomain, node_count: int) -> RadialGrid:
    """Build a radial grid with ``node_count`` shells.

    Raises:
        ValidationError: If the grid is too coarse
    """
    if node_count < MIN_RADIAL_NODES:
        raise ValidationError("Grid too coarse", details=f"N={node_count} < {MIN_RADIAL_NODES}")
    grid = RadialGrid(domain=domain, node_count=node_count)
    logger.debug("Built radial grid", N=node_count, h=grid.h, dimension=domain.dimension)
    return grid


def build_cartesian_grid(domain: BallDomain, cells_per_axis: int) -> CartesianGrid:
    """Build a masked Cartesian grid with ``cells_per_axis`` cells per side.

    Raises:
        ValidationError: If the grid is too coarse or the domain is not planar
    """
    if cells_per_axis < MIN_CARTESIAN_CELLS:
        raise ValidationError(
            "Grid too coarse", details=f"M={cells_per_axis} < {MIN_CARTESIAN_CELLS}"
        )
    if domain.dimension != 2:
        raise ValidationError("Cartesian grids require dimension 2", details=f"n={domain.dimension}")
    grid = CartesianGrid(domain=domain, cells_per_axis=cells_per_axis)
    logger.debug("Built Cartesian grid", M=cells_per_axis, cells=grid.size)
    return grid


def build_grid(
    domain: BallDomain, kind: Literal["radial", "cartesian"], resolution: int
) -> RadialGrid | CartesianGrid:
    """Build a grid of the given kind."""
    if kind == "radial":
        return build_radial_grid(domain, resolution)
    return build_cartesian_grid(domain, resolution)


def weighted_mean(f: ScalarField) -> float:
    """Return (sum w_i f_i) / |Omega| with |Omega| the discrete grid measure."""
    return float(np.dot(f.grid.weights, f.values)) / f.grid.total_weight


def interface_measure(phi: ScalarField, delta: float) -> float:
    """Measure of the diffuse interface {delta <= phi <= 1 - delta}.

    Raises:
        ValidationError: If delta is outside (0, 1/2)
    """
    if not 0.0 < delta < 0.5:
        raise ValidationError("delta must lie in (0, 1/2)", details=f"delta={delta}")
    inside = (phi.values >= delta) & (phi.values <= 1.0 - delta)
    return float(np.sum(phi.grid.weights[inside]))


def l1_distance(f: ScalarField, g: ScalarField) -> float:
    """Weighted L1 distance between two fields on the same grid."""
    if f.grid != g.grid:
        raise ValidationError("Fields live on different grids")
    return float(np.dot(f.grid.weights, np.abs(f.values - g.values)))


def constant_field(grid: RadialGrid | CartesianGrid, value: float) -> ScalarField:
    """Constant field on ``grid``."""
    return ScalarField(grid=grid, values=np.full(grid.size, float(value)))


def indicator_field(grid: RadialGrid | CartesianGrid, inside: np.ndarray) -> ScalarField:
    """0/1 field from a boolean mask over the grid's degrees of freedom."""
    return ScalarField(grid=grid, values=np.asarray(inside, dtype=float))
