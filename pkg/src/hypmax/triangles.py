"""Geodesic triangles with possibly ideal vertices.

A triangle is stored as three vertices (interior points or ideal boundary
points), its three side geodesics, the cached angle triple, and the interior
side signs used by containment tests.  Construction from an angle triple uses
the hyperbolic law of cosines for angles; a zero angle yields an ideal vertex
placed as the common boundary endpoint of its two sides.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .halfplane import (
    Arc,
    BoundaryPoint,
    Geodesic,
    HPoint,
    Isometry,
    Vertical,
    angle_between,
    boundary_endpoints,
    boundary_side_value,
    dist,
    dist_to_geodesic,
    direction_from,
    geodesic_step,
    geodesic_through,
    move_point_to,
    on_geodesic,
    rotation_about,
    side_value,
    tangent_toward,
    translate_along,
)

#: Closed containment slack, in side_value units (roughly Euclidean offset).
CONTAINS_TOL = 1e-9

#: Angles in (0, 1e-6) are rejected; pass an exact 0 for an ideal vertex.
NEAR_IDEAL_FLOOR = 1e-6


class AngleSumNotAdmissibleError(ValueError):
    """Angle sum must be strictly below pi for a constructible triangle."""


class NearIdealUnstableError(ValueError):
    """Positive angle too close to zero for stable construction."""


class NonCompactTriangleError(ValueError):
    """Operation requires all three vertices interior."""


class DegenerateTriangleError(ValueError):
    """Vertices do not span a nondegenerate triangle."""


class EmptyFamilyError(RuntimeError):
    """Rejection sampling failed to place a congruent copy inside the ball."""


@dataclass(frozen=True, slots=True)
class AngleTriple:
    """Interior angles (radians); zero marks an ideal vertex."""

    a1: float
    a2: float
    a3: float

    def __post_init__(self) -> None:
        for a in (self.a1, self.a2, self.a3):
            if a < 0.0 or not math.isfinite(a):
                raise ValueError(f"angles must be finite and >= 0, got {a}")
        if self.total() > math.pi + 1e-12:
            raise ValueError(f"angle sum {self.total()} exceeds pi")

    def total(self) -> float:
        """Angle sum s = a1 + a2 + a3."""
        return self.a1 + self.a2 + self.a3

    def product(self) -> float:
        """Thickness functional p = a1 * a2 * a3."""
        return self.a1 * self.a2 * self.a3

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a1, self.a2, self.a3)


@dataclass(frozen=True, slots=True)
class InteriorVertex:
    point: HPoint

    @property
    def is_ideal(self) -> bool:
        return False


@dataclass(frozen=True, slots=True)
class IdealVertex:
    point: BoundaryPoint

    @property
    def is_ideal(self) -> bool:
        return True


Vertex = Union[InteriorVertex, IdealVertex]


@dataclass(frozen=True, slots=True)
class Ball:
    """Hyperbolic metric ball."""

    center: HPoint
    radius: float

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")

    def euclidean_disk(self) -> tuple[float, float, float]:
        """The same set as a Euclidean disk: (cx, cy, rho)."""
        cy = self.center.y * math.cosh(self.radius)
        rho = self.center.y * math.sinh(self.radius)
        return (self.center.x, cy, rho)

    def contains(self, p: HPoint) -> bool:
        return dist(self.center, p) <= self.radius


@dataclass(frozen=True, slots=True)
class Triangle:
    """Geodesic triangle; sides[k] joins vertices k and (k+1) mod 3."""

    vertices: tuple[Vertex, Vertex, Vertex]
    sides: tuple[Geodesic, Geodesic, Geodesic]
    angles: AngleTriple
    interior_signs: tuple[int, int, int]

    @property
    def is_compact(self) -> bool:
        return not any(v.is_ideal for v in self.vertices)

    def interior_points(self) -> list[HPoint]:
        return [v.point for v in self.vertices if not v.is_ideal]


def _vertex_endpoint(v: Vertex):
    """The vertex as something a side tangent can point toward."""
    return v.point


def _interior_sign(side: Geodesic, opposite: Vertex) -> int:
    if opposite.is_ideal:
        val = boundary_side_value(side, opposite.point)
    else:
        val = side_value(side, opposite.point)
    if val == 0.0:
        raise DegenerateTriangleError("vertex lies on the opposite side")
    return 1 if val > 0.0 else -1


def _measure_angles(vertices, sides) -> AngleTriple:
    out = []
    for k in range(3):
        v = vertices[k]
        if v.is_ideal:
            out.append(0.0)
            continue
        p = v.point
        # Sides adjacent to vertex k: sides[k] (to vertex k+1) and
        # sides[k-1] (to vertex k-1).
        t_next = tangent_toward(sides[k], p, _vertex_endpoint(vertices[(k + 1) % 3]))
        t_prev = tangent_toward(sides[(k + 2) % 3], p, _vertex_endpoint(vertices[(k + 2) % 3]))
        out.append(angle_between(t_next, t_prev))
    return AngleTriple(*out)


def assemble_triangle(v1: Vertex, v2: Vertex, v3: Vertex,
                      s12: Geodesic, s23: Geodesic, s31: Geodesic) -> Triangle:
    """Build a Triangle from explicit vertices and sides, validating incidence."""
    vertices = (v1, v2, v3)
    sides = (s12, s23, s31)
    for k in range(3):
        for v in (vertices[k], vertices[(k + 1) % 3]):
            if v.is_ideal:
                ends = boundary_endpoints(sides[k])
                if v.point not in ends:
                    ok = any(
                        (not e.is_infinity and not v.point.is_infinity
                         and abs(e.x - v.point.x) <= 1e-9 * max(1.0, abs(e.x)))
                        for e in ends
                    )
                    if not ok:
                        raise DegenerateTriangleError(
                            f"ideal vertex {v.point} is not an endpoint of side {sides[k]}")
            elif not on_geodesic(sides[k], v.point, tol=1e-9):
                raise DegenerateTriangleError(f"vertex {v.point} misses side {sides[k]}")
    signs = tuple(
        _interior_sign(sides[k], vertices[(k + 2) % 3]) for k in range(3)
    )
    angles = _measure_angles(vertices, sides)
    return Triangle(vertices, sides, angles, signs)  # type: ignore[arg-type]


def triangle_from_vertices(p1: HPoint, p2: HPoint, p3: HPoint) -> Triangle:
    """Triangle on three interior points in general position."""
    s12 = geodesic_through(p1, p2)
    if on_geodesic(s12, p3, tol=1e-12):
        raise DegenerateTriangleError("vertices lie on one geodesic")
    s23 = geodesic_through(p2, p3)
    s31 = geodesic_through(p3, p1)
    return assemble_triangle(
        InteriorVertex(p1), InteriorVertex(p2), InteriorVertex(p3), s12, s23, s31
    )


def _side_cosh(a_opp: float, a_adj1: float, a_adj2: float) -> float:
    """cosh of the side opposite a_opp by the law of cosines for angles."""
    return (math.cos(a_opp) + math.cos(a_adj1) * math.cos(a_adj2)) / (
        math.sin(a_adj1) * math.sin(a_adj2)
    )


def _arc_from_point_tangent(p: HPoint, tx: float, ty: float) -> Geodesic:
    """Geodesic through p with unit tangent (tx, ty); vertical when tx = 0."""
    if abs(tx) < 1e-15:
        return Vertical(p.x)
    c = p.x + p.y * ty / tx
    return Arc(c, math.hypot(p.x - c, p.y))


def _arc_arc_meet(g1: Arc, g2: Arc) -> HPoint:
    x = (g1.radius ** 2 - g2.radius ** 2 + g2.center ** 2 - g1.center ** 2) / (
        2.0 * (g2.center - g1.center)
    )
    y2 = g1.radius ** 2 - (x - g1.center) ** 2
    if y2 <= 0.0:
        raise DegenerateTriangleError("side geodesics fail to intersect")
    return HPoint(x, math.sqrt(y2))


def triangle_from_angles(alpha: AngleTriple | tuple[float, float, float]) -> Triangle:
    """Canonical triangle realizing the given angle triple.

    Vertex 1 sits at (0, 1) when interior (at boundary 0 when ideal), side
    1-2 runs along the vertical geodesic above 0 with vertex 2 above vertex 1,
    and vertex 3 lies in the half-plane x > 0.
    """
    if not isinstance(alpha, AngleTriple):
        alpha = AngleTriple(*alpha)
    a1, a2, a3 = alpha.as_tuple()
    if alpha.total() >= math.pi - 1e-12:
        raise AngleSumNotAdmissibleError(f"angle sum {alpha.total()} not below pi")
    for a in (a1, a2, a3):
        if 0.0 < a < NEAR_IDEAL_FLOOR:
            raise NearIdealUnstableError(
                f"angle {a} below stability floor {NEAR_IDEAL_FLOOR}; use an exact 0")

    s12: Geodesic = Vertical(0.0)

    if a1 > 0.0 and a2 > 0.0:
        v1: Vertex = InteriorVertex(HPoint(0.0, 1.0))
        g31 = Arc(_cot(a1), 1.0 / math.sin(a1))
        if a3 > 0.0:
            h = math.exp(_acosh(_side_cosh(a3, a1, a2)))
        else:
            h = _cot(a1 / 2.0) * _cot(a2 / 2.0)
        v2: Vertex = InteriorVertex(HPoint(0.0, h))
        g23 = Arc(-h * _cot(a2), h / math.sin(a2))
        if a3 > 0.0:
            v3: Vertex = InteriorVertex(_arc_arc_meet(g31, g23))
        else:
            v3 = IdealVertex(BoundaryPoint(_cot(a1 / 2.0)))
        return assemble_triangle(v1, v2, v3, s12, g23, g31)

    if a1 > 0.0 and a2 == 0.0:
        v1 = InteriorVertex(HPoint(0.0, 1.0))
        v2 = IdealVertex(BoundaryPoint.infinity())
        g31 = Arc(_cot(a1), 1.0 / math.sin(a1))
        if a3 > 0.0:
            d13 = _acosh(_side_cosh(a2, a3, a1))  # side v3-v1, opposite v2
            p3 = translate_along(g31, d13).apply(v1.point)
            v3 = InteriorVertex(p3)
            g23: Geodesic = Vertical(p3.x)
        else:
            end = _cot(a1 / 2.0)
            v3 = IdealVertex(BoundaryPoint(end))
            g23 = Vertical(end)
        return assemble_triangle(v1, v2, v3, s12, g23, g31)

    if a1 == 0.0 and a2 > 0.0:
        v1 = IdealVertex(BoundaryPoint(0.0))
        v2 = InteriorVertex(HPoint(0.0, 1.0))
        g23 = Arc(-_cot(a2), 1.0 / math.sin(a2))
        if a3 > 0.0:
            d23 = _acosh(_side_cosh(a1, a2, a3))  # side v2-v3, opposite v1
            p3 = translate_along(g23, d23).apply(v2.point)
            v3 = InteriorVertex(p3)
            c = (p3.x * p3.x + p3.y * p3.y) / (2.0 * p3.x)
            g31 = Arc(c, c)
        else:
            end = math.tan(a2 / 2.0)
            v3 = IdealVertex(BoundaryPoint(end))
            g31 = Arc(end / 2.0, end / 2.0)
        return assemble_triangle(v1, v2, v3, s12, g23, g31)

    # a1 == a2 == 0: vertices at boundary 0 and infinity; the scale is fixed
    # by putting side 3-1 on the arc from 0 to 1.
    v1 = IdealVertex(BoundaryPoint(0.0))
    v2 = IdealVertex(BoundaryPoint.infinity())
    g31 = Arc(0.5, 0.5)
    if a3 > 0.0:
        x3 = (1.0 + math.cos(a3)) / 2.0
        v3 = InteriorVertex(HPoint(x3, math.sin(a3) / 2.0))
        g23 = Vertical(x3)
    else:
        v3 = IdealVertex(BoundaryPoint(1.0))
        g23 = Vertical(1.0)
    return assemble_triangle(v1, v2, v3, s12, g23, g31)


def _cot(x: float) -> float:
    return math.cos(x) / math.sin(x)


def _acosh(x: float) -> float:
    return math.acosh(x) if x > 1.0 else 0.0


def angles_of(tri: Triangle) -> AngleTriple:
    """Measured interior angles (recomputed from the sides, not the cache)."""
    return _measure_angles(tri.vertices, tri.sides)


def area(tri: Triangle) -> float:
    """Hyperbolic area as the angle defect pi - (a1 + a2 + a3)."""
    return math.pi - angles_of(tri).total()


def contains(tri: Triangle, p: HPoint, tol: float = CONTAINS_TOL) -> bool:
    """Closed containment: p on the interior side of all three side geodesics."""
    for k in range(3):
        if side_value(tri.sides[k], p) * tri.interior_signs[k] < -tol:
            return False
    return True


def contains_mask(tri: Triangle, xs: np.ndarray, ys: np.ndarray,
                  tol: float = CONTAINS_TOL) -> np.ndarray:
    """Vectorized containment test over coordinate arrays."""
    ok = np.ones(np.broadcast(xs, ys).shape, dtype=bool)
    for k in range(3):
        g = tri.sides[k]
        if isinstance(g, Vertical):
            val = xs - g.foot
        else:
            dx = xs - g.center
            val = (dx * dx + ys * ys - g.radius * g.radius) / (2.0 * g.radius)
        ok &= val * tri.interior_signs[k] >= -tol
    return ok


def transform_triangle(g: Isometry, tri: Triangle) -> Triangle:
    """Image of the triangle under an isometry."""
    verts = tuple(
        IdealVertex(g.apply_boundary(v.point)) if v.is_ideal
        else InteriorVertex(g.apply(v.point))
        for v in tri.vertices
    )
    sides = tuple(g.apply_geodesic(s) for s in tri.sides)
    return assemble_triangle(*verts, *sides)  # type: ignore[arg-type]


def diameter(tri: Triangle) -> float:
    """Diameter of a compact triangle (the longest side)."""
    pts = tri.interior_points()
    if len(pts) < 3:
        return math.inf
    return max(dist(pts[i], pts[j]) for i in range(3) for j in range(i + 1, 3))


def side_points(tri: Triangle, n_per_side: int = 16) -> list[HPoint]:
    """Points sampled along the sides between interior vertices."""
    out: list[HPoint] = []
    for k in range(3):
        va, vb = tri.vertices[k], tri.vertices[(k + 1) % 3]
        if va.is_ideal or vb.is_ideal:
            continue
        d = dist(va.point, vb.point)
        g = tri.sides[k]
        tx, ty = tangent_toward(g, va.point, vb.point)
        b_lo, b_hi = boundary_endpoints(g)
        sign = 1.0
        if isinstance(g, Vertical):
            sign = 1.0 if ty > 0 else -1.0
        else:
            toward_hi = tangent_toward(g, va.point, b_hi)
            sign = 1.0 if (tx * toward_hi[0] + ty * toward_hi[1]) > 0 else -1.0
        for j in range(1, n_per_side + 1):
            t = d * j / (n_per_side + 1)
            out.append(translate_along(g, sign * t).apply(va.point))
    return out


def incenter(tri: Triangle) -> tuple[HPoint, float]:
    """Incenter and inradius, via bisection along an interior-vertex bisector.

    Needs at least one interior vertex (subsumes all compact triangles and
    the singly or doubly ideal ones used by the catching construction).
    """
    k = next((k for k in range(3) if not tri.vertices[k].is_ideal), None)
    if k is None:
        raise NonCompactTriangleError("incenter needs an interior vertex")
    p = tri.vertices[k].point
    t_next = tangent_toward(tri.sides[k], p, _vertex_endpoint(tri.vertices[(k + 1) % 3]))
    t_prev = tangent_toward(tri.sides[(k + 2) % 3], p, _vertex_endpoint(tri.vertices[(k + 2) % 3]))
    bx, by = t_next[0] + t_prev[0], t_next[1] + t_prev[1]
    norm = math.hypot(bx, by)
    if norm < 1e-14:
        raise DegenerateTriangleError("angle bisector undefined at flat vertex")
    theta = math.atan2(by / norm, bx / norm)

    opp = tri.sides[(k + 1) % 3]  # side not adjacent to vertex k
    adj = tri.sides[k]

    def gap(t: float) -> float:
        q = geodesic_step(p, theta, t)
        return dist_to_geodesic(q, opp) - dist_to_geodesic(q, adj)

    lo, hi = 0.0, 1.0
    glo = gap(1e-12)
    if glo <= 0.0:
        raise DegenerateTriangleError("bisector leaves the triangle immediately")
    while gap(hi) > 0.0:
        hi *= 2.0
        if hi > 64.0:
            raise DegenerateTriangleError("bisector never reaches the opposite side")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    center = geodesic_step(p, theta, 0.5 * (lo + hi))
    radius = min(dist_to_geodesic(center, s) for s in tri.sides)
    return center, radius


def containing_ball(tri: Triangle) -> Ball:
    """Ball about the incenter with radius reaching the farthest vertex.

    The triangle is the geodesic convex hull of its vertices and balls are
    geodesically convex, so vertex containment implies triangle containment.
    """
    if not tri.is_compact:
        raise NonCompactTriangleError("containing ball requires a compact triangle")
    center, _ = incenter(tri)
    radius = max(dist(center, v.point) for v in tri.vertices)  # type: ignore[union-attr]
    return Ball(center, radius)


def sample_point_in_ball(ball: Ball, rng: np.random.Generator) -> HPoint:
    """Uniform (area) random point of a hyperbolic ball."""
    u = float(rng.uniform())
    t = math.acosh(1.0 + u * (math.cosh(ball.radius) - 1.0))
    theta = float(rng.uniform(0.0, 2.0 * math.pi))
    return geodesic_step(ball.center, theta, t)


def local_family_sample(tri: Triangle, x0: HPoint, r: float, n: int,
                        seed: int | np.random.Generator) -> list[Triangle]:
    """n random congruent copies of tri inside the ball B(x0, r).

    Copies are images under seeded random isometries (random anchor point and
    rotation), rejection-sampled until all vertices land in the ball; vertex
    containment suffices by convexity.
    """
    d = diameter(tri)
    if not d < r / 10.0:
        raise ValueError(f"diameter {d} must be below r/10 = {r / 10.0}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    anchor, _ = incenter(tri)
    ball = Ball(x0, r)
    inner = Ball(x0, max(r - d, r * 1e-3))
    out: list[Triangle] = []
    rejects = 0
    while len(out) < n:
        if rejects >= 10 * n:
            raise EmptyFamilyError(f"{rejects} consecutive rejections placing copies in {ball}")
        target = sample_point_in_ball(inner, rng)
        # Rotate about the anchor first: its coordinates stay moderate, so
        # the elliptic matrix is well conditioned even for far-away targets.
        g = move_point_to(anchor, target) @ rotation_about(anchor, float(rng.uniform(0.0, 2.0 * math.pi)))
        cand = transform_triangle(g, tri)
        if all(ball.contains(v.point) for v in cand.vertices):  # type: ignore[union-attr]
            out.append(cand)
            rejects = 0
        else:
            rejects += 1
    return out


def normalize_for_quadrature(tri: Triangle) -> Triangle:
    """Isometric copy placed for well-conditioned grid quadrature.

    The longest side is sent to the unit half-circle with its midpoint at
    (0, 1) and the triangle above the circle, which keeps the y-extent of a
    diameter-D triangle near e^(D/2) instead of e^D.
    """
    if not tri.is_compact:
        return tri
    pts = [v.point for v in tri.vertices]  # type: ignore[union-attr]
    k = max(range(3), key=lambda k: dist(pts[k], pts[(k + 1) % 3]))
    pa, pb = pts[k], pts[(k + 1) % 3]
    g = tri.sides[k]
    half = dist(pa, pb) / 2.0
    tx, ty = tangent_toward(g, pa, pb)
    if isinstance(g, Vertical):
        sign = 1.0 if ty > 0 else -1.0
        to_axis = Isometry(1.0, -g.foot, 0.0, 1.0)
    else:
        hi = boundary_endpoints(g)[1]
        th = tangent_toward(g, pa, hi)
        sign = 1.0 if (tx * th[0] + ty * th[1]) > 0 else -1.0
        a = g.center - g.radius
        b = g.center + g.radius
        s = math.sqrt(2.0 * g.radius)
        to_axis = Isometry(1.0 / s, -a / s, -1.0 / s, b / s)
    mid = translate_along(g, sign * half).apply(pa)
    m1 = to_axis.apply(mid)
    sh = math.sqrt(m1.y)
    rescale = Isometry(1.0 / sh, 0.0, 0.0, sh)
    s2 = math.sqrt(2.0)
    cayley = Isometry(1.0 / s2, -1.0 / s2, 1.0 / s2, 1.0 / s2)
    norm = cayley @ rescale @ to_axis
    out = transform_triangle(norm, tri)
    opp = out.vertices[(k + 2) % 3].point  # type: ignore[union-attr]
    if opp.x * opp.x + opp.y * opp.y < 1.0:
        out = transform_triangle(rotation_about(HPoint(0.0, 1.0), math.pi), out)
    return out


def triangle_to_json(tri: Triangle) -> dict:
    """JSON record {vertices, sides, angles} with ideal vertices tagged."""
    verts = []
    for v in tri.vertices:
        if v.is_ideal:
            bp = v.point
            verts.append({"ideal": True, "x": None if bp.is_infinity else bp.x})
        else:
            verts.append({"ideal": False, "x": v.point.x, "y": v.point.y})
    sides = []
    for s in tri.sides:
        if isinstance(s, Vertical):
            sides.append({"kind": "vertical", "foot": s.foot})
        else:
            sides.append({"kind": "arc", "center": s.center, "radius": s.radius})
    return {"vertices": verts, "sides": sides, "angles": list(tri.angles.as_tuple())}


def triangle_from_json(rec: dict) -> Triangle:
    verts: list[Vertex] = []
    for v in rec["vertices"]:
        if v["ideal"]:
            verts.append(IdealVertex(BoundaryPoint(v["x"])))
        else:
            verts.append(InteriorVertex(HPoint(v["x"], v["y"])))
    sides: list[Geodesic] = []
    for s in rec["sides"]:
        if s["kind"] == "vertical":
            sides.append(Vertical(s["foot"]))
        else:
            sides.append(Arc(s["center"], s["radius"]))
    return assemble_triangle(*verts, *sides)  # type: ignore[arg-type]


def triangles_to_json_str(tris: Iterable[Triangle]) -> str:
    return json.dumps([triangle_to_json(t) for t in tris], sort_keys=True)
