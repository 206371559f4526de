"""Upper half-plane model of the hyperbolic plane.

Points are pairs (x, y) with y > 0, geodesics are vertical half-lines or
half-circles orthogonal to the real axis, and isometries are real Moebius
matrices with an optional boundary reflection.  Everything here is an
immutable value and every function is pure, so objects are safe to share
across threads; the only randomness lives in explicit seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

#: Residual below which a point counts as lying on a geodesic.
MEMBERSHIP_TOL = 1e-10

#: Determinant drift tolerated before renormalising an isometry matrix.
DET_TOL = 1e-12


class CoincidentPointsError(ValueError):
    """Two points expected to be distinct coincide (within 1e-12)."""


class PointNotOnGeodesicError(ValueError):
    """A point required to lie on a geodesic misses it beyond tolerance."""


@dataclass(frozen=True, slots=True)
class HPoint:
    """A point of the open upper half-plane."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")
        if self.y <= 0.0:
            raise ValueError(f"point must have y > 0, got y = {self.y}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @staticmethod
    def from_complex(z: complex) -> "HPoint":
        return HPoint(z.real, z.imag)


@dataclass(frozen=True, slots=True)
class BoundaryPoint:
    """An ideal point: a finite real coordinate or the point at infinity."""

    x: float | None  # None encodes the point at infinity

    @staticmethod
    def infinity() -> "BoundaryPoint":
        return BoundaryPoint(None)

    @property
    def is_infinity(self) -> bool:
        return self.x is None


@dataclass(frozen=True, slots=True)
class Vertical:
    """Vertical geodesic: the half-line above a real foot."""

    foot: float


@dataclass(frozen=True, slots=True)
class Arc:
    """Half-circle geodesic centred on the real axis."""

    center: float
    radius: float

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError(f"arc radius must be positive, got {self.radius}")


Geodesic = Union[Vertical, Arc]


def dist(p: HPoint, q: HPoint) -> float:
    """Hyperbolic distance arcosh(1 + |p-q|^2 / (2 p.y q.y))."""
    dx = p.x - q.x
    dy = p.y - q.y
    arg = 1.0 + (dx * dx + dy * dy) / (2.0 * p.y * q.y)
    # Guard against rounding dipping just below the domain edge.
    return math.acosh(arg) if arg > 1.0 else 0.0


def geodesic_through(p: HPoint, q: HPoint) -> Geodesic:
    """The unique geodesic containing two distinct points."""
    if dist(p, q) < 1e-12:
        raise CoincidentPointsError(f"points {p} and {q} coincide")
    scale = max(1.0, abs(p.x), abs(q.x), p.y, q.y)
    if abs(p.x - q.x) <= 1e-13 * scale:
        return Vertical((p.x + q.x) / 2.0)
    center = ((q.x * q.x + q.y * q.y) - (p.x * p.x + p.y * p.y)) / (2.0 * (q.x - p.x))
    radius = math.hypot(p.x - center, p.y)
    return Arc(center, radius)


def side_value(g: Geodesic, p: HPoint) -> float:
    """Signed residual of p against g, scaled to approximate Euclidean offset.

    Positive on the x > foot side for verticals, positive outside the circle
    for arcs; zero exactly on the geodesic.
    """
    if isinstance(g, Vertical):
        return p.x - g.foot
    dx = p.x - g.center
    return (dx * dx + p.y * p.y - g.radius * g.radius) / (2.0 * g.radius)


def side_of(g: Geodesic, p: HPoint) -> int:
    """Which open half-plane of g contains p: -1, 0 (on g), or +1."""
    v = side_value(g, p)
    return 0 if v == 0.0 else (1 if v > 0.0 else -1)


def boundary_side_value(g: Geodesic, b: BoundaryPoint) -> float:
    """side_value extended by continuity to ideal points."""
    if b.is_infinity:
        if isinstance(g, Vertical):
            raise PointNotOnGeodesicError("infinity lies on every vertical geodesic")
        return math.inf  # outside every circle
    if isinstance(g, Vertical):
        return b.x - g.foot
    dx = b.x - g.center
    return (dx * dx - g.radius * g.radius) / (2.0 * g.radius)


def on_geodesic(g: Geodesic, p: HPoint, tol: float = MEMBERSHIP_TOL) -> bool:
    return abs(side_value(g, p)) <= tol * max(1.0, p.y, abs(p.x))


def boundary_endpoints(g: Geodesic) -> tuple[BoundaryPoint, BoundaryPoint]:
    """Ideal endpoints of g, left-to-right (infinity last for verticals)."""
    if isinstance(g, Vertical):
        return BoundaryPoint(g.foot), BoundaryPoint.infinity()
    return BoundaryPoint(g.center - g.radius), BoundaryPoint(g.center + g.radius)


def dist_to_geodesic(p: HPoint, g: Geodesic) -> float:
    """Hyperbolic distance from p to the geodesic g."""
    if isinstance(g, Vertical):
        return math.asinh(abs(p.x - g.foot) / p.y)
    # Send the arc's endpoints (c-r, c+r) to (0, inf); the arc becomes the
    # imaginary axis and the formula for verticals applies.
    a = g.center - g.radius
    b = g.center + g.radius
    num = complex(p.x - a, p.y)
    den = complex(p.x - b, p.y)
    w = -num / den
    return math.asinh(abs(w.real) / w.imag)


def tangent_toward(g: Geodesic, p: HPoint, target: HPoint | BoundaryPoint) -> tuple[float, float]:
    """Unit tangent of g at p pointing toward target (a point or ideal end).

    The target must lie on g (interior points within MEMBERSHIP_TOL).
    """
    if isinstance(g, Vertical):
        if isinstance(target, BoundaryPoint):
            up = target.is_infinity
        else:
            if target.y == p.y:
                raise PointNotOnGeodesicError("degenerate direction on vertical geodesic")
            up = target.y > p.y
        return (0.0, 1.0) if up else (0.0, -1.0)
    # Moving counterclockwise along the circle decreases the boundary
    # coordinate; decide orientation by comparing polar angles about center.
    phi_p = math.atan2(p.y, p.x - g.center)
    if isinstance(target, BoundaryPoint):
        if target.is_infinity:
            raise PointNotOnGeodesicError("infinity is not an endpoint of an arc")
        ccw = target.x < g.center  # left endpoint has angle pi
    else:
        phi_t = math.atan2(target.y, target.x - g.center)
        if abs(phi_t - phi_p) < 1e-15:
            raise PointNotOnGeodesicError("degenerate direction on arc")
        ccw = phi_t > phi_p
    ux = (p.x - g.center) / g.radius
    uy = p.y / g.radius
    return (-uy, ux) if ccw else (uy, -ux)


def angle_between(t1: tuple[float, float], t2: tuple[float, float]) -> float:
    """Angle in [0, pi] between two unit directions."""
    dot = t1[0] * t2[0] + t1[1] * t2[1]
    return math.acos(min(1.0, max(-1.0, dot)))


def _canonical_tangent(g: Geodesic, p: HPoint, flag: int) -> tuple[float, float]:
    if isinstance(g, Vertical):
        return (0.0, 1.0) if flag >= 0 else (0.0, -1.0)
    ux = (p.x - g.center) / g.radius
    uy = p.y / g.radius
    # flag >= 0 selects the clockwise tangent (toward the right endpoint).
    return (uy, -ux) if flag >= 0 else (-uy, ux)


def angle_at(p: HPoint, g1: Geodesic, g2: Geodesic, d1: int = 1, d2: int = 1) -> float:
    """Conformal angle in [0, pi] between g1 and g2 at their common point p.

    d1, d2 pick the directed tangents: +1 is upward for verticals and toward
    the right ideal endpoint for arcs, -1 the opposite.
    """
    for g in (g1, g2):
        if not on_geodesic(g, p):
            raise PointNotOnGeodesicError(f"{p} does not lie on {g}")
    return angle_between(_canonical_tangent(g1, p, d1), _canonical_tangent(g2, p, d2))


@dataclass(frozen=True, slots=True)
class Isometry:
    """Moebius matrix (a b; c d) with det 1, optionally pre-composed with x -> -x."""

    a: float
    b: float
    c: float
    d: float
    flip: bool = False

    def __post_init__(self) -> None:
        det = self.a * self.d - self.b * self.c
        if not math.isfinite(det) or det <= 0.0:
            raise ValueError(f"matrix determinant {det} must be positive and finite")
        if abs(det - 1.0) > DET_TOL:
            s = math.sqrt(det)
            object.__setattr__(self, "a", self.a / s)
            object.__setattr__(self, "b", self.b / s)
            object.__setattr__(self, "c", self.c / s)
            object.__setattr__(self, "d", self.d / s)

    @staticmethod
    def identity() -> "Isometry":
        return Isometry(1.0, 0.0, 0.0, 1.0)

    @staticmethod
    def reflection() -> "Isometry":
        """Reflection across the vertical geodesic above 0."""
        return Isometry(1.0, 0.0, 0.0, 1.0, flip=True)

    def apply(self, p: HPoint) -> HPoint:
        z = complex(-p.x, p.y) if self.flip else p.z
        w = (self.a * z + self.b) / (self.c * z + self.d)
        return HPoint(w.real, w.imag)

    def apply_boundary(self, bp: BoundaryPoint) -> BoundaryPoint:
        if bp.is_infinity:
            if self.c == 0.0:
                return BoundaryPoint.infinity()
            return BoundaryPoint(self.a / self.c)
        x = -bp.x if self.flip else bp.x
        den = self.c * x + self.d
        if den == 0.0:
            return BoundaryPoint.infinity()
        return BoundaryPoint((self.a * x + self.b) / den)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        """Composition: (self @ other).apply(p) == self.apply(other.apply(p))."""
        oa, ob, oc, od = other.a, other.b, other.c, other.d
        if self.flip:
            # Reflection conjugates the second matrix: sigma B = B' sigma
            # with B' flipping the signs of the off-diagonal entries.
            oa, ob, oc, od = oa, -ob, -oc, od
        return Isometry(
            self.a * oa + self.b * oc,
            self.a * ob + self.b * od,
            self.c * oa + self.d * oc,
            self.c * ob + self.d * od,
            flip=self.flip ^ other.flip,
        )

    def inverse(self) -> "Isometry":
        if not self.flip:
            return Isometry(self.d, -self.b, -self.c, self.a)
        return Isometry(self.d, self.b, self.c, self.a, flip=True)

    def apply_geodesic(self, g: Geodesic) -> Geodesic:
        """Image geodesic, reconstructed from the mapped ideal endpoints."""
        b1, b2 = (self.apply_boundary(e) for e in boundary_endpoints(g))
        if b1.is_infinity:
            return Vertical(b2.x)
        if b2.is_infinity:
            return Vertical(b1.x)
        lo, hi = sorted((b1.x, b2.x))
        if hi - lo <= 0.0:
            raise ValueError("geodesic image degenerated; isometry too extreme")
        return Arc((lo + hi) / 2.0, (hi - lo) / 2.0)


def rotation_about(p: HPoint, theta: float) -> Isometry:
    """Elliptic isometry fixing p, rotating tangent directions by +theta.

    Closed form of T R(theta) T^-1 with T the transport from (0, 1) to p,
    expanded to avoid cancellation in the conjugation products.
    """
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    x, y = p.x, p.y
    return Isometry(
        c - x * s / y,
        s * (x * x + y * y) / y,
        -s / y,
        c + x * s / y,
    )


def _transport_from_i(p: HPoint) -> Isometry:
    """Upper-triangular isometry sending (0, 1) to p without rotation."""
    s = math.sqrt(p.y)
    return Isometry(s, p.x / s, 0.0, 1.0 / s)


def translate_along(g: Geodesic, t: float) -> Isometry:
    """Hyperbolic translation of length t along g.

    Positive t moves toward the ideal endpoint with the larger boundary
    coordinate (upward for verticals).
    """
    e = math.exp(t / 2.0)
    dil = Isometry(e, 0.0, 0.0, 1.0 / e)
    if isinstance(g, Vertical):
        shift = Isometry(1.0, g.foot, 0.0, 1.0)
        return shift @ dil @ shift.inverse()
    # Send (0, inf) to the endpoints (c - r, c + r).
    s = math.sqrt(2.0 * g.radius)
    to_arc = Isometry((g.center + g.radius) / s, (g.center - g.radius) / s, 1.0 / s, 1.0 / s)
    return to_arc @ dil @ to_arc.inverse()


def geodesic_step(p: HPoint, theta: float, t: float) -> HPoint:
    """Follow the unit-speed geodesic from p with initial direction theta for length t.

    theta is the Euclidean angle of the initial tangent (pi/2 points up); the
    model is conformal so this is also the hyperbolic direction.
    """
    if t == 0.0:
        return p
    move = _transport_from_i(p) @ _rotation_at_i(theta - math.pi / 2.0)
    return move.apply(HPoint(0.0, math.exp(t)))


def _rotation_at_i(phi: float) -> Isometry:
    half = phi / 2.0
    return Isometry(math.cos(half), math.sin(half), -math.sin(half), math.cos(half))


def direction_from(p: HPoint, q: HPoint) -> float:
    """Initial tangent angle at p of the geodesic running from p to q."""
    g = geodesic_through(p, q)
    tx, ty = tangent_toward(g, p, q)
    return math.atan2(ty, tx)


def move_point_to(p: HPoint, q: HPoint) -> Isometry:
    """A translation taking p to q (identity when they coincide)."""
    d = dist(p, q)
    if d < 1e-15:
        return Isometry.identity()
    g = geodesic_through(p, q)
    b1, b2 = boundary_endpoints(g)
    # translate_along moves toward the larger boundary coordinate; orient.
    toward_hi = tangent_toward(g, p, b2 if not b2.is_infinity else b2)
    toward_q = tangent_toward(g, p, q)
    same = toward_hi[0] * toward_q[0] + toward_hi[1] * toward_q[1] > 0.0
    return translate_along(g, d if same else -d)


def random_isometry(rng: np.random.Generator | int, bound: float = 2.0) -> Isometry:
    """Seeded random isometry: rotation, translation of length <= bound, rotation."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    if bound <= 0.0:
        raise ValueError("bound must be positive")
    i = HPoint(0.0, 1.0)
    theta1 = float(rng.uniform(0.0, 2.0 * math.pi))
    theta2 = float(rng.uniform(0.0, 2.0 * math.pi))
    t = float(rng.uniform(0.0, bound))
    return rotation_about(i, theta1) @ translate_along(Vertical(0.0), t) @ rotation_about(i, theta2)
