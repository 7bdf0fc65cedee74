"""Parametric sharp shapes inside the ball domain.

Each descriptor knows its volume, perimeter and signed distance (positive
inside). SharpShape binds a descriptor to a domain and derives the relative
perimeter inside the domain and the measure of the part of its closure lying
on the domain boundary.

Descriptors:
- ball(r), optionally off-center
- annulus(r_in, r_out), centered
- ellipse(a, b), centered, semi-axes along the coordinate axes (n = 2)
- rectangle(w, h), centered, full side lengths (n = 2)
- union of disjoint members
"""

from __future__ import annotations

import math
from typing import Annotated, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.special import ellipe

from .exceptions import ValidationError
from .grid import BallDomain

BISECTION_STEPS = 80


def _ball_volume(r: float, n: int) -> float:
    return math.pi * r * r if n == 2 else 4.0 / 3.0 * math.pi * r**3


def _sphere_area(r: float, n: int) -> float:
    return 2.0 * math.pi * r if n == 2 else 4.0 * math.pi * r * r


def _ellipse_distance(x: np.ndarray, y: np.ndarray, e0: float, e1: float) -> np.ndarray:
    """Unsigned distance to the ellipse (x/e0)^2 + (y/e1)^2 = 1 with e0 >= e1.

    Robust bisection on the Lagrange multiplier of the closest point,
    evaluated in the first quadrant.
    """
    x = np.abs(x)
    y = np.abs(y)
    dist = np.empty_like(x)

    on_axis = y == 0.0
    xa = x[on_axis]
    focal = (e0 * e0 - e1 * e1) / e0
    near = xa < focal
    x0 = np.where(near, e0 * e0 * xa / max(e0 * e0 - e1 * e1, np.finfo(float).tiny), e0)
    x1 = np.where(near, e1 * np.sqrt(np.clip(1.0 - (x0 / e0) ** 2, 0.0, None)), 0.0)
    dist[on_axis] = np.hypot(x0 - xa, x1)

    off = ~on_axis
    xo, yo = x[off], y[off]
    z0, z1 = xo / e0, yo / e1
    r0 = (e0 / e1) ** 2
    g = z0 * z0 + z1 * z1 - 1.0
    lo = z1 - 1.0
    hi = np.where(g < 0.0, 0.0, np.hypot(r0 * z0, z1) - 1.0)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        f = (r0 * z0 / (mid + r0)) ** 2 + (z1 / (mid + 1.0)) ** 2 - 1.0
        positive = f > 0.0
        lo = np.where(positive, mid, lo)
        hi = np.where(positive, hi, mid)
    s = 0.5 * (lo + hi)
    px = r0 * xo / (s + r0)
    py = yo / (s + 1.0)
    dist[off] = np.hypot(xo - px, yo - py)
    return dist


class Ball(BaseModel):
    """Ball of radius ``radius`` centered at ``center`` (origin when empty)."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["ball"] = "ball"
    radius: float = Field(..., gt=0)
    center: tuple[float, ...] = ()

    def _center(self, n: int) -> np.ndarray:
        c = np.zeros(n)
        c[: len(self.center)] = self.center
        return c

    @property
    def is_radial(self) -> bool:
        """Centered at the origin."""
        return not any(self.center)

    def volume(self, n: int) -> float:
        """Analytic volume."""
        return _ball_volume(self.radius, n)

    def perimeter(self, n: int) -> float:
        """Full boundary measure."""
        return _sphere_area(self.radius, n)

    def outer_extent(self, n: int) -> float:
        """Largest distance from the origin over the closure."""
        return float(np.linalg.norm(self._center(n))) + self.radius

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        """Positive inside."""
        c = self._center(points.shape[-1])
        return self.radius - np.linalg.norm(points - c, axis=-1)

    def label(self) -> str:
        """Short text label."""
        base = f"ball(r={self.radius:g})"
        return base if self.is_radial else f"{base}@{','.join(f'{c:g}' for c in self.center)}"


class Annulus(BaseModel):
    """Centered annulus r_in < |x| < r_out."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["annulus"] = "annulus"
    inner: float = Field(..., gt=0)
    outer: float = Field(..., gt=0)

    @model_validator(mode="after")
    def validate_radii(self) -> Annulus:
        """Inner radius must be below the outer one."""
        if self.inner >= self.outer:
            raise ValueError("Annulus needs inner < outer")
        return self

    @property
    def is_radial(self) -> bool:
        """Always centered."""
        return True

    def volume(self, n: int) -> float:
        """Analytic volume."""
        return _ball_volume(self.outer, n) - _ball_volume(self.inner, n)

    def perimeter(self, n: int) -> float:
        """Full boundary measure."""
        return _sphere_area(self.outer, n) + _sphere_area(self.inner, n)

    def outer_extent(self, n: int) -> float:
        """Largest distance from the origin over the closure."""
        return self.outer

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        """Positive inside."""
        r = np.linalg.norm(points, axis=-1)
        return np.minimum(r - self.inner, self.outer - r)

    def label(self) -> str:
        """Short text label."""
        return f"annulus({self.inner:g},{self.outer:g})"


class Ellipse(BaseModel):
    """Centered ellipse with semi-axes ``a`` (first axis) and ``b``."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["ellipse"] = "ellipse"
    a: float = Field(..., gt=0)
    b: float = Field(..., gt=0)

    @property
    def is_radial(self) -> bool:
        """Radial only when it is a disk; still reported as non-radial."""
        return False

    def volume(self, n: int) -> float:
        """Analytic area."""
        return math.pi * self.a * self.b

    def perimeter(self, n: int) -> float:
        """Perimeter 4 a E(1 - b^2/a^2) with a the major semi-axis."""
        major, minor = max(self.a, self.b), min(self.a, self.b)
        return float(4.0 * major * ellipe(1.0 - (minor / major) ** 2))

    def outer_extent(self, n: int) -> float:
        """Largest distance from the origin over the closure."""
        return max(self.a, self.b)

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        """Positive inside."""
        x, y = points[..., 0], points[..., 1]
        if self.a >= self.b:
            e0, e1, u, v = self.a, self.b, x, y
        else:
            e0, e1, u, v = self.b, self.a, y, x
        flat_u, flat_v = np.ravel(u), np.ravel(v)
        if math.isclose(e0, e1):
            dist = np.abs(np.hypot(flat_u, flat_v) - e0)
        else:
            dist = _ellipse_distance(flat_u, flat_v, e0, e1)
        inside = (flat_u / e0) ** 2 + (flat_v / e1) ** 2 < 1.0
        return np.where(inside, dist, -dist).reshape(np.shape(x))

    def label(self) -> str:
        """Short text label."""
        return f"ellipse({self.a:g},{self.b:g})"


class Rectangle(BaseModel):
    """Centered axis-aligned rectangle with full side lengths."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["rectangle"] = "rectangle"
    width: float = Field(..., gt=0)
    height: float = Field(..., gt=0)

    @property
    def is_radial(self) -> bool:
        """Never radial."""
        return False

    def volume(self, n: int) -> float:
        """Analytic area."""
        return self.width * self.height

    def perimeter(self, n: int) -> float:
        """Analytic perimeter."""
        return 2.0 * (self.width + self.height)

    def outer_extent(self, n: int) -> float:
        """Half diagonal."""
        return 0.5 * math.hypot(self.width, self.height)

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        """Positive inside (negated box distance)."""
        half = np.array([0.5 * self.width, 0.5 * self.height])
        q = np.abs(points[..., :2]) - half
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
        inside = np.minimum(np.max(q, axis=-1), 0.0)
        return -(outside + inside)

    def label(self) -> str:
        """Short text label."""
        return f"rectangle({self.width:g}x{self.height:g})"


Member = Annotated[Ball | Annulus | Ellipse | Rectangle, Field(discriminator="kind")]


class ShapeUnion(BaseModel):
    """Union of pairwise disjoint members."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["union"] = "union"
    members: list[Member] = Field(..., min_length=1)

    @property
    def is_radial(self) -> bool:
        """All members centered and radial."""
        return all(m.is_radial for m in self.members)

    def volume(self, n: int) -> float:
        """Sum of member volumes."""
        return sum(m.volume(n) for m in self.members)

    def perimeter(self, n: int) -> float:
        """Sum of member perimeters."""
        return sum(m.perimeter(n) for m in self.members)

    def outer_extent(self, n: int) -> float:
        """Largest member extent."""
        return max(m.outer_extent(n) for m in self.members)

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        """Pointwise maximum of the member distances."""
        return np.max(np.stack([m.signed_distance(points) for m in self.members]), axis=0)

    def label(self) -> str:
        """Short text label."""
        return "+".join(m.label() for m in self.members)


ShapeDescriptor = Annotated[Ball | Annulus | Ellipse | Rectangle | ShapeUnion, Field(discriminator="kind")]


def _radial_extent(member: Ball | Annulus | Ellipse | Rectangle, n: int) -> tuple[np.ndarray, float, float]:
    """Center and conservative radial range of a member about its center."""
    if isinstance(member, Ball):
        return member._center(n), 0.0, member.radius
    if isinstance(member, Annulus):
        return np.zeros(n), member.inner, member.outer
    return np.zeros(n), 0.0, member.outer_extent(n)


def _members_disjoint(members: list[Ball | Annulus | Ellipse | Rectangle], n: int) -> bool:
    for i, first in enumerate(members):
        for second in members[i + 1 :]:
            c1, lo1, hi1 = _radial_extent(first, n)
            c2, lo2, hi2 = _radial_extent(second, n)
            gap = float(np.linalg.norm(c1 - c2))
            if gap > 0.0:
                if gap <= hi1 + hi2:
                    return False
            elif not (hi1 < lo2 or hi2 < lo1):
                return False
    return True


class SharpShape(BaseModel):
    """A parametric set inside the closure of the domain.

    Attributes:
        descriptor: Geometry of the set
        domain: The ball domain it lives in

    Example:
        >>> shape = SharpShape(descriptor=Ball(radius=0.5), domain=BallDomain())
        >>> round(shape.relative_perimeter, 6)
        3.141593
    """

    model_config = ConfigDict(frozen=True)

    descriptor: ShapeDescriptor
    domain: BallDomain

    @model_validator(mode="after")
    def validate_inside(self) -> SharpShape:
        """Check dimension support, containment and volume."""
        n = self.domain.dimension
        members = self.descriptor.members if isinstance(self.descriptor, ShapeUnion) else [self.descriptor]
        if n != 2 and any(isinstance(m, Ellipse | Rectangle) for m in members):
            raise ValueError("Ellipses and rectangles are planar shapes")
        if self.descriptor.outer_extent(n) > self.domain.radius * (1.0 + 1e-12):
            raise ValueError("Shape must lie inside the closed domain")
        if not _members_disjoint(list(members), n):
            raise ValueError("Union members must be disjoint")
        volume = self.descriptor.volume(n)
        if not 0.0 < volume < self.domain.volume():
            raise ValueError(f"Shape volume {volume:g} must lie in (0, |Omega|)")
        return self

    @property
    def _members(self) -> list[Ball | Annulus | Ellipse | Rectangle]:
        if isinstance(self.descriptor, ShapeUnion):
            return list(self.descriptor.members)
        return [self.descriptor]

    @property
    def volume(self) -> float:
        """Analytic volume."""
        return self.descriptor.volume(self.domain.dimension)

    @property
    def perimeter(self) -> float:
        """Full perimeter, including any part on the domain boundary."""
        return self.descriptor.perimeter(self.domain.dimension)

    @property
    def boundary_contact(self) -> float:
        """Measure of the closure of the shape on the domain boundary."""
        radius = self.domain.radius
        touching = any(
            isinstance(m, Annulus) and math.isclose(m.outer, radius, rel_tol=1e-12) for m in self._members
        )
        return self.domain.boundary_measure() if touching else 0.0

    @property
    def relative_perimeter(self) -> float:
        """Perimeter inside the open domain."""
        return self.perimeter - self.boundary_contact

    @property
    def is_radial(self) -> bool:
        """Whether the shape can be represented on a radial grid."""
        return self.descriptor.is_radial

    def outer_extent(self) -> float:
        """Largest distance from the origin over the closure."""
        return self.descriptor.outer_extent(self.domain.dimension)

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        """Signed distance to the shape boundary, positive inside."""
        return self.descriptor.signed_distance(np.asarray(points, dtype=float))

    def isoperimetric_ratio(self) -> float:
        """Perimeter over the perimeter of the ball of equal volume."""
        n = self.domain.dimension
        v = self.volume
        r = math.sqrt(v / math.pi) if n == 2 else (3.0 * v / (4.0 * math.pi)) ** (1.0 / 3.0)
        return self.perimeter / _sphere_area(r, n)

    def label(self) -> str:
        """Short text label."""
        return self.descriptor.label()


def _parse_member(text: str) -> Ball | Annulus | Ellipse | Rectangle:
    name, _, rest = text.partition(":")
    params, _, center = rest.partition("@")
    try:
        values = [float(v) for v in params.split(",") if v.strip()]
        offsets = tuple(float(v) for v in center.split(",") if v.strip())
    except ValueError as e:
        raise ValidationError(f"Invalid shape parameters: {text}", details=str(e))
    name = name.strip().lower()
    try:
        if name in ("ball", "disk") and len(values) == 1:
            return Ball(radius=values[0], center=offsets)
        if name == "annulus" and len(values) == 2:
            return Annulus(inner=values[0], outer=values[1])
        if name == "ellipse" and len(values) == 2:
            return Ellipse(a=values[0], b=values[1])
        if name in ("rectangle", "rect") and len(values) == 2:
            return Rectangle(width=values[0], height=values[1])
        if name == "square" and len(values) == 1:
            return Rectangle(width=values[0], height=values[0])
    except ValueError as e:
        raise ValidationError(f"Invalid shape: {text}", details=str(e))
    raise ValidationError(
        f"Unknown shape: {text}",
        details="use ball:r[@x,y], annulus:ri,ro, ellipse:a,b, rectangle:w,h, square:s",
    )


def parse_shape(text: str, domain: BallDomain) -> SharpShape:
    """Parse ``ball:0.5``, ``annulus:0.3,0.8``, ``ellipse:a,b``, ``rectangle:w,h``,
    ``square:s`` or a ``+``-joined union such as ``ball:0.2@0.5,0+ball:0.2@-0.5,0``.

    Raises:
        ValidationError: On malformed text or an invalid shape
    """
    parts = [p for p in text.split("+") if p.strip()]
    if not parts:
        raise ValidationError("Empty shape description")
    members = [_parse_member(p) for p in parts]
    descriptor: Ball | Annulus | Ellipse | Rectangle | ShapeUnion
    descriptor = members[0] if len(members) == 1 else ShapeUnion(members=members)
    try:
        return SharpShape(descriptor=descriptor, domain=domain)
    except ValueError as e:
        raise ValidationError(f"Invalid shape: {text}", details=str(e))


def equal_area_shapes(domain: BallDomain, area: float) -> list[SharpShape]:
    """Disk, square, 2:1 ellipse and centered annulus of the same area."""
    if domain.dimension != 2:
        raise ValidationError("Equal-area comparison is planar")
    r = math.sqrt(area / math.pi)
    side = math.sqrt(area)
    a = math.sqrt(2.0 * area / math.pi)
    outer = 0.5 * (r + domain.radius) if r < domain.radius else domain.radius
    inner = math.sqrt(outer * outer - area / math.pi)
    descriptors: list[Ball | Annulus | Ellipse | Rectangle] = [
        Ball(radius=r),
        Rectangle(width=side, height=side),
        Ellipse(a=a, b=0.5 * a),
        Annulus(inner=inner, outer=outer),
    ]
    try:
        return [SharpShape(descriptor=d, domain=domain) for d in descriptors]
    except ValueError as e:
        raise ValidationError("Area too large for the domain", details=str(e))
