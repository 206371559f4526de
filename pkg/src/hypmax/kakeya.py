"""Euclidean-plane Kakeya machinery: polygon unions, the bisect-and-slide
tree of thin triangles, the rectangle blow, and Kakeya-type sets for local
families of thin triangles.

The tree construction splits a triangle's base edge into 2^n equal pieces
(thin triangles sharing the apex) and recursively slides sibling groups
toward each other along the base direction.  The slide at each merge is a
fraction of the current group span: with overlap factor f, sibling base
intervals of span s end up overlapping by f * s, so the merged span is
(2 - f) * s.  A constant factor keeps the union area bounded away from zero;
driving the union down (as the rectangle blow needs) uses a per-level
schedule with overlaps increasing toward the root.

Exact union and intersection areas are delegated to shapely (GEOS); the
independent cross-check path is a hand-rolled raster counter with an explicit
boundary-cell bound.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from shapely.geometry import Polygon as _ShapelyPolygon
from shapely.ops import unary_union

AREA_FLOOR = 1e-14


class DegeneratePolygonError(ValueError):
    """Polygon area below the degeneracy floor."""


class DepthExceededError(RuntimeError):
    """Target ratio not reached within the depth cap."""

    def __init__(self, message: str, best_report: "BlowReport" | None = None):
        super().__init__(message)
        self.best_report = best_report


class TargetUnreachableError(DepthExceededError):
    """Kakeya-type target not reached within the depth cap."""


@dataclass(frozen=True)
class EPolygon:
    """Simple polygon with counterclockwise vertices and positive area."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.vertices) < 3:
            raise DegeneratePolygonError("polygon needs at least 3 vertices")
        a = _shoelace(self.vertices)
        if abs(a) < AREA_FLOOR:
            raise DegeneratePolygonError(f"polygon area {abs(a)} below {AREA_FLOOR}")
        if a < 0.0:
            object.__setattr__(self, "vertices", tuple(reversed(self.vertices)))

    @property
    def area(self) -> float:
        return _shoelace(self.vertices)

    def translated(self, dx: float, dy: float) -> "EPolygon":
        return EPolygon(tuple((x + dx, y + dy) for x, y in self.vertices))

    def scaled(self, factor: float) -> "EPolygon":
        return EPolygon(tuple((x * factor, y * factor) for x, y in self.vertices))

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return (min(xs), max(xs), min(ys), max(ys))

    def is_simple(self) -> bool:
        return _ShapelyPolygon(self.vertices).is_valid

    def shapely(self) -> _ShapelyPolygon:
        return _ShapelyPolygon(self.vertices)


def _shoelace(verts: Sequence[tuple[float, float]]) -> float:
    acc = 0.0
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        acc += x0 * y1 - x1 * y0
    return acc / 2.0


def etriangle(a: tuple[float, float], b: tuple[float, float], c: tuple[float, float]) -> EPolygon:
    return EPolygon((a, b, c))


@dataclass(frozen=True)
class PolySet:
    """A finite family of polygons with union-area evaluators."""

    polygons: tuple[EPolygon, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "polygons", tuple(self.polygons))

    def __len__(self) -> int:
        return len(self.polygons)

    def __iter__(self):
        return iter(self.polygons)

    def total_area(self) -> float:
        return math.fsum(p.area for p in self.polygons)

    def bbox(self) -> tuple[float, float, float, float]:
        boxes = [p.bbox() for p in self.polygons]
        return (
            min(b[0] for b in boxes),
            max(b[1] for b in boxes),
            min(b[2] for b in boxes),
            max(b[3] for b in boxes),
        )

    def translated(self, dx: float, dy: float) -> "PolySet":
        return PolySet(tuple(p.translated(dx, dy) for p in self.polygons))

    def scaled(self, factor: float) -> "PolySet":
        return PolySet(tuple(p.scaled(factor) for p in self.polygons))

    def to_json(self) -> list:
        return [[list(v) for v in p.vertices] for p in self.polygons]

    @staticmethod
    def from_json(rec: list) -> "PolySet":
        return PolySet(tuple(EPolygon(tuple((x, y) for x, y in p)) for p in rec))


def union_area(polys: PolySet | Iterable[EPolygon], mode: str = "exact",
               resolution: int = 2048) -> float | tuple[float, float]:
    """Area of the union: exact boolean union, or raster(resolution) with bound.

    Raster mode returns (estimate, half_width); the bound counts cells whose
    corners disagree about membership.
    """
    items = list(polys)
    if not items:
        return 0.0 if mode == "exact" else (0.0, 0.0)
    for p in items:
        if p.area < AREA_FLOOR:
            raise DegeneratePolygonError("degenerate polygon in union")
    if mode == "exact":
        return float(unary_union([p.shapely() for p in items]).area)
    if mode != "raster":
        raise ValueError(f"unknown mode {mode!r}")
    return _raster_union_area(items, resolution)


def _raster_union_area(items: Sequence[EPolygon], resolution: int) -> tuple[float, float]:
    x0 = min(p.bbox()[0] for p in items)
    x1 = max(p.bbox()[1] for p in items)
    y0 = min(p.bbox()[2] for p in items)
    y1 = max(p.bbox()[3] for p in items)
    pad = 1e-9 + 1e-6 * max(x1 - x0, y1 - y0)
    x0 -= pad; x1 += pad; y0 -= pad; y1 += pad
    dx = (x1 - x0) / resolution
    dy = (y1 - y0) / resolution
    corner_mask = np.zeros((resolution + 1, resolution + 1), dtype=bool)
    center_mask = np.zeros((resolution, resolution), dtype=bool)
    gx = x0 + np.arange(resolution + 1) * dx
    gy = y0 + np.arange(resolution + 1) * dy
    cx = x0 + (np.arange(resolution) + 0.5) * dx
    cy = y0 + (np.arange(resolution) + 0.5) * dy
    for p in items:
        bx0, bx1, by0, by1 = p.bbox()
        i0 = max(0, int((bx0 - x0) / dx) - 1)
        i1 = min(resolution, int((bx1 - x0) / dx) + 2)
        j0 = max(0, int((by0 - y0) / dy) - 1)
        j1 = min(resolution, int((by1 - y0) / dy) + 2)
        if i0 >= i1 or j0 >= j1:
            continue
        corner_mask[j0:j1 + 1, i0:i1 + 1] |= _points_in_polygon(
            p, gx[i0:i1 + 1][None, :], gy[j0:j1 + 1][:, None])
        center_mask[j0:j1, i0:i1] |= _points_in_polygon(
            p, cx[i0:i1][None, :], cy[j0:j1][:, None])
    cell = dx * dy
    value = float(center_mask.sum()) * cell
    corner_any = (corner_mask[:-1, :-1] | corner_mask[:-1, 1:]
                  | corner_mask[1:, :-1] | corner_mask[1:, 1:])
    corner_all = (corner_mask[:-1, :-1] & corner_mask[:-1, 1:]
                  & corner_mask[1:, :-1] & corner_mask[1:, 1:])
    half = float((corner_any & ~corner_all).sum()) * cell
    return value, half


def _points_in_polygon(poly: EPolygon, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Even-odd rule point-in-polygon, vectorized."""
    inside = np.zeros(np.broadcast(xs, ys).shape, dtype=bool)
    verts = poly.vertices
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        crosses = (ys < y0) != (ys < y1)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (ys - y0) / (y1 - y0)
            xcross = x0 + t * (x1 - x0)
        inside ^= crosses & (xs < xcross)
    return inside


def intersection_area(a: EPolygon, b: EPolygon) -> float:
    return float(a.shapely().intersection(b.shapely()).area)


def area_inside_set(poly: EPolygon, polyset: PolySet) -> float:
    """Exact area of poly covered by the union of the set, bbox-prefiltered."""
    px0, px1, py0, py1 = poly.bbox()
    shp = poly.shapely()
    near = []
    for q in polyset:
        qx0, qx1, qy0, qy1 = q.bbox()
        if qx1 < px0 or qx0 > px1 or qy1 < py0 or qy0 > py1:
            continue
        near.append(q.shapely())
    if not near:
        return 0.0
    return float(shp.intersection(unary_union(near)).area)


def bisection_pieces(base: EPolygon, depth: int) -> list[EPolygon]:
    """The 2^depth thin triangles from splitting the base edge (vertex 0 to 1)."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if len(base.vertices) != 3:
        raise ValueError("base must be a triangle")
    a, b, apex = base.vertices
    n = 2 ** depth
    pieces = []
    for i in range(n):
        t0 = i / n
        t1 = (i + 1) / n
        p0 = (a[0] + (b[0] - a[0]) * t0, a[1] + (b[1] - a[1]) * t0)
        p1 = (a[0] + (b[0] - a[0]) * t1, a[1] + (b[1] - a[1]) * t1)
        pieces.append(etriangle(p0, p1, apex))
    return pieces


def _overlap_schedule(depth: int, overlap: float | Sequence[float]) -> list[float]:
    if isinstance(overlap, (int, float)):
        sched = [float(overlap)] * depth
    else:
        sched = [float(f) for f in overlap]
        if len(sched) != depth:
            raise ValueError(f"need {depth} overlap factors, got {len(sched)}")
    for f in sched:
        if not 0.0 < f < 2.0:
            raise ValueError(f"overlap factor {f} outside (0, 2)")
    return sched


def harmonic_overlaps(depth: int) -> list[float]:
    """Per-level schedule whose tree union is exactly 2/(depth + 2) times the base.

    The factor f at a merge scales the group envelope by (2 - f)/2; choosing
    that scale as (m + 1)/(m + 2) at the m-th level from the root makes the
    envelope sizes telescope, the classical varying-ratio scheme.
    """
    sched = []
    for m in range(depth):
        level_from_root = depth - m  # leaves merge first
        alpha = (level_from_root + 1) / (level_from_root + 2)
        sched.append(2.0 * (1.0 - alpha))
    return sched


def blow_overlaps(depth: int, leaf: Sequence[float] = (0.45, 0.4)) -> list[float]:
    """Blow-tuned schedule: harmonic tail with stronger leaf-level nesting.

    Extra overlap at the two leaf levels pairs up neighbouring slivers, which
    shrinks the rectangle union while barely touching the translated fans;
    found by coordinate ascent on the measured blow ratio and frozen here.
    """
    sched = harmonic_overlaps(depth)
    for m, f in enumerate(leaf):
        if m < depth - 1:
            sched[m] = f
    return sched


def perron_tree(base: EPolygon, depth: int, overlap: float | Sequence[float] = 0.5) -> PolySet:
    """Translated bisection pieces of the base triangle.

    Sibling groups at each level slide toward each other along the base
    direction until their base spans overlap by the level's factor times the
    child span.  Every output triangle is a translate of its bisection piece.
    """
    pieces = bisection_pieces(base, depth)
    sched = _overlap_schedule(depth, overlap)
    a, b, _ = base.vertices
    ux, uy = b[0] - a[0], b[1] - a[1]
    norm = math.hypot(ux, uy)
    ux /= norm; uy /= norm

    n = 2 ** depth
    w = norm / n
    offsets = [0.0] * n  # along the base direction

    def build(i0: int, i1: int, level: int) -> tuple[float, float]:
        """Slide the subtree on leaf range [i0, i1); return its base interval."""
        if i1 - i0 == 1:
            return (i0 * w, (i0 + 1) * w)
        mid = (i0 + i1) // 2
        l_lo, l_hi = build(i0, mid, level - 1)
        r_lo, r_hi = build(mid, i1, level - 1)
        f = sched[level - 1]
        span = l_hi - l_lo
        delta = r_lo - (l_hi - f * span)
        for j in range(mid, i1):
            offsets[j] -= delta
        return (l_lo, r_hi - delta)

    build(0, n, depth)
    out = [p.translated(offsets[i] * ux, offsets[i] * uy) for i, p in enumerate(pieces)]
    return PolySet(tuple(out))


@dataclass(frozen=True)
class BlowReport:
    """Outcome of a blow construction."""

    pieces: int
    small_area: float
    big_area: float
    ratio: float
    target: float
    passed: bool
    depth: int = 0
    extra: dict | None = None

    def to_json(self) -> dict:
        rec = {
            "pieces": self.pieces,
            "small_area": self.small_area,
            "big_area": self.big_area,
            "ratio": self.ratio,
            "target": self.target,
            "pass": self.passed,
            "depth": self.depth,
        }
        if self.extra:
            rec.update(self.extra)
        return rec


def _tri_frame(tri: EPolygon) -> tuple[tuple[float, float], tuple[float, float],
                                       tuple[float, float], tuple[float, float]]:
    """Base midpoint, apex, unit base direction, unit median direction."""
    p0, p1, apex = tri.vertices
    mid = ((p0[0] + p1[0]) / 2.0, (p0[1] + p1[1]) / 2.0)
    bx, by = p1[0] - p0[0], p1[1] - p0[1]
    bn = math.hypot(bx, by)
    mx, my = apex[0] - mid[0], apex[1] - mid[1]
    mn = math.hypot(mx, my)
    return mid, apex, (bx / bn, by / bn), (mx / mn, my / mn)


def inscribed_rectangle(tri: EPolygon, length_frac: float,
                        width_scale: float = 1.0) -> EPolygon:
    """Axis-on-median rectangle inscribed in a triangle.

    The rectangle's long sides are parallel to the median from the base edge
    (vertices 0-1) to the apex; it spans the first length_frac of the median
    and takes width_scale times the widest admissible width there (narrower
    rectangles overlap less after translation).
    """
    if not 0.0 < length_frac < 1.0:
        raise ValueError("length_frac must be in (0, 1)")
    if not 0.0 < width_scale <= 1.0:
        raise ValueError("width_scale must be in (0, 1]")
    mid, apex, _, (dx, dy) = _tri_frame(tri)

    # Work in the frame where the median direction is +y.
    def to_frame(p: tuple[float, float]) -> tuple[float, float]:
        x, y = p[0] - mid[0], p[1] - mid[1]
        return (dy * x - dx * y, dx * x + dy * y)

    def from_frame(p: tuple[float, float]) -> tuple[float, float]:
        x, y = p
        return (dy * x + dx * y + mid[0], -dx * x + dy * y + mid[1])

    fa, fb, fapex = (to_frame(v) for v in tri.vertices)
    height = fapex[1]
    y_top = length_frac * height
    y_bot = max(fa[1], fb[1]) + 1e-12 * height
    if y_top <= y_bot:
        raise DegeneratePolygonError("no inscribed rectangle at this length fraction")
    # The cross-section [L(y), R(y)] is linear in y, so a rectangle over
    # [y_bot, y_top] fits iff its x-interval fits at both extremes.
    lo_b, hi_b = _section(fa, fb, fapex, y_bot)
    lo_t, hi_t = _section(fa, fb, fapex, y_top)
    xl = max(lo_b, lo_t)
    xr = min(hi_b, hi_t)
    if xr - xl <= 0.0:
        raise DegeneratePolygonError("triangle too skewed for an inscribed rectangle")
    if width_scale < 1.0:
        cx_mid = 0.5 * (xl + xr)
        half_w = 0.5 * (xr - xl) * width_scale
        xl, xr = cx_mid - half_w, cx_mid + half_w
    rect = [
        from_frame((xl, y_bot)),
        from_frame((xr, y_bot)),
        from_frame((xr, y_top)),
        from_frame((xl, y_top)),
    ]
    return EPolygon(tuple(rect))


def _edges(fa, fb, fapex):
    return ((fa, fb), (fb, fapex), (fapex, fa))


def _section(fa, fb, fapex, y: float) -> tuple[float, float]:
    """Cross-section interval of the frame triangle at height y."""
    xs = []
    for (p, q) in _edges(fa, fb, fapex):
        if (p[1] - y) * (q[1] - y) <= 0.0 and p[1] != q[1]:
            t = (y - p[1]) / (q[1] - p[1])
            xs.append(p[0] + t * (q[0] - p[0]))
    if len(xs) < 2:
        raise DegeneratePolygonError("cross-section misses the triangle")
    return (min(xs), max(xs))


def long_axis(rect: EPolygon) -> tuple[float, float, float]:
    """Unit direction of the rectangle's longest side and its length."""
    v = rect.vertices
    e1 = (v[1][0] - v[0][0], v[1][1] - v[0][1])
    e2 = (v[2][0] - v[1][0], v[2][1] - v[1][1])
    l1 = math.hypot(*e1)
    l2 = math.hypot(*e2)
    if l1 >= l2:
        return (e1[0] / l1, e1[1] / l1, l1)
    return (e2[0] / l2, e2[1] / l2, l2)


def translate_along_long_side(rect: EPolygon, direction: tuple[float, float] | None = None) -> EPolygon:
    """The rectangle translated along its longest side by its own length."""
    ux, uy, length = long_axis(rect)
    if direction is not None:
        if ux * direction[0] + uy * direction[1] < 0.0:
            ux, uy = -ux, -uy
    return rect.translated(ux * length, uy * length)


DEFAULT_BLOW_BASE = etriangle((0.0, 0.0), (4.0, 0.0), (2.0, 1.0))


def rect_blow(target: float, base: EPolygon = DEFAULT_BLOW_BASE,
              max_depth: int = 16, length_frac: float = 0.6,
              overlap: Callable[[int], float | Sequence[float]] | None = None,
              min_depth: int = 1,
              ) -> tuple[PolySet, PolySet, BlowReport]:
    """Family of rectangles whose long-side translates blow up in union area.

    Rectangles are inscribed in tree triangles at increasing depth and
    translated along their long axis by their own length, alternating the
    sign with the direction order so each translated fan carries half the
    angular density; stops when |union of translates| / |union of rectangles|
    reaches the target.
    """
    if target < 1.0:
        raise ValueError("target must be >= 1")
    if overlap is None:
        overlap = blow_overlaps
    best: BlowReport | None = None
    for depth in range(min_depth, max_depth + 1):
        rect_set, tran_set = _blow_family(base, depth, length_frac, overlap(depth))
        small = union_area(rect_set)
        big = union_area(tran_set)
        ratio = big / small
        report = BlowReport(len(rect_set), small, big, ratio, target,
                            ratio >= target, depth)
        if best is None or ratio > best.ratio:
            best = report
        if ratio >= target:
            return rect_set, tran_set, report
    assert best is not None
    raise DepthExceededError(
        f"best ratio {best.ratio:.3f} below target {target} at depth <= {max_depth}",
        best)


def _blow_family(base: EPolygon, depth: int, length_frac: float,
                 overlap: float | Sequence[float]) -> tuple[PolySet, PolySet]:
    tree = perron_tree(base, depth, overlap)
    rects = []
    translated = []
    for i, tri in enumerate(tree):
        rect = inscribed_rectangle(tri, length_frac)
        _, _, _, (dx, dy) = _tri_frame(tri)
        sign = -1.0 if i % 2 == 0 else 1.0
        rects.append(rect)
        translated.append(translate_along_long_side(rect, (sign * dx, sign * dy)))
    return PolySet(tuple(rects)), PolySet(tuple(translated))


def thin_triangle(angles: tuple[float, float, float], diam: float) -> EPolygon:
    """Euclidean triangle with the given angles scaled to the given diameter."""
    a1, a2, a3 = angles
    if abs(a1 + a2 + a3 - math.pi) > 1e-9:
        raise ValueError("angles of a Euclidean triangle must sum to pi")
    # Vertices: A at the origin (angle a1), B on the x-axis (angle a2),
    # C above; |AC| from the law of sines with |AB| = 1.
    length = 1.0
    ac = length * math.sin(a2) / math.sin(a3)
    b = (length, 0.0)
    cx = ac * math.cos(a1)
    cy = ac * math.sin(a1)
    tri = etriangle((0.0, 0.0), b, (cx, cy))
    d = _poly_diameter(tri)
    return tri.scaled(diam / d)


def _poly_diameter(p: EPolygon) -> float:
    vs = p.vertices
    return max(math.hypot(vs[i][0] - vs[j][0], vs[i][1] - vs[j][1])
               for i in range(len(vs)) for j in range(i + 1, len(vs)))


def euclid_angles(p: EPolygon) -> tuple[float, float, float]:
    """Interior angles of a Euclidean triangle, in vertex order."""
    v = p.vertices
    out = []
    for k in range(3):
        ax, ay = v[(k + 1) % 3][0] - v[k][0], v[(k + 1) % 3][1] - v[k][1]
        bx, by = v[(k + 2) % 3][0] - v[k][0], v[(k + 2) % 3][1] - v[k][1]
        na, nb = math.hypot(ax, ay), math.hypot(bx, by)
        c = (ax * bx + ay * by) / (na * nb)
        out.append(math.acos(min(1.0, max(-1.0, c))))
    return tuple(out)  # type: ignore[return-value]


def _congruence_residual(a: EPolygon, b: EPolygon) -> float:
    """Max difference of sorted side lengths (translation/rotation invariant)."""
    def sides(p: EPolygon) -> list[float]:
        v = p.vertices
        return sorted(math.hypot(v[(i + 1) % 3][0] - v[i][0], v[(i + 1) % 3][1] - v[i][1])
                      for i in range(3))
    return max(abs(x - y) for x, y in zip(sides(a), sides(b)))


@dataclass(frozen=True)
class KakeyaWitness:
    """A congruent copy of the family triangle with its overlap bookkeeping."""

    triangle: EPolygon
    overlap_area: float
    overlap_fraction: float
    congruence_residual: float
    in_ball: bool


def _place_congruent(model: EPolygon, direction: tuple[float, float],
                     anchor: tuple[float, float], back_frac: float) -> EPolygon:
    """Copy of model with its median axis along direction, base midpoint at
    anchor shifted back along the axis by back_frac of the median length."""
    mid, apex, _, (mdx, mdy) = _tri_frame(model)
    med_len = math.hypot(apex[0] - mid[0], apex[1] - mid[1])
    cos_r = mdx * direction[0] + mdy * direction[1]
    sin_r = mdx * direction[1] - mdy * direction[0]
    out = []
    ax = anchor[0] - back_frac * med_len * direction[0]
    ay = anchor[1] - back_frac * med_len * direction[1]
    for x, y in model.vertices:
        rx, ry = x - mid[0], y - mid[1]
        qx = cos_r * rx - sin_r * ry
        qy = sin_r * rx + cos_r * ry
        out.append((ax + qx, ay + qy))
    return EPolygon(tuple(out))


def kakeya_set_for_family(t_thin: EPolygon, r: float, target: float,
                          max_depth: int = 16, min_overlap: float = 0.25,
                          ) -> tuple[PolySet, PolySet, BlowReport, list[KakeyaWitness]]:
    """Kakeya-type set for the local family of triangles congruent to t_thin.

    Builds a bisect-and-slide tree scaled into the ball B(0, r) and places one
    congruent copy of t_thin per tree triangle, aligned with that triangle's
    median and straddling its base.  The sliding piles the tree's bases into a
    densely covered trunk, so each copy keeps at least min_overlap of its area
    inside the tree union F while the copies themselves fan out below.
    Succeeds when |union of copies| >= target * |F| with every witness check
    green; scans depths and a few tree scales until then.
    """
    d_t = _poly_diameter(t_thin)
    if not d_t < r / 10.0:
        raise ValueError(f"diam(t_thin) = {d_t} must be below r/10 = {r / 10.0}")
    mid0, apex0, _, _ = _tri_frame(bisection_pieces(DEFAULT_BLOW_BASE, 1)[0])
    best: BlowReport | None = None
    for depth in range(5, max_depth + 1):
        tree0 = perron_tree(DEFAULT_BLOW_BASE, depth, blow_overlaps(depth))
        for med_frac in (0.45, 0.7, 1.1):
            # Piece medians about med_frac times the copy diameter.
            mid, apex, _, _ = _tri_frame(tree0.polygons[0])
            med0 = math.hypot(apex[0] - mid[0], apex[1] - mid[1])
            scale = med_frac * d_t / med0
            x0, x1, y0, y1 = tree0.bbox()
            extent = max(abs(v) for v in (x0, x1, y0, y1)) * scale + 2.0 * d_t
            if extent > 0.98 * r:
                scale *= 0.98 * r / extent
            tree = tree0.scaled(scale)
            witnesses: list[KakeyaWitness] = []
            copies: list[EPolygon] = []
            ok = True
            for tri in tree:
                mid, apex, _, median = _tri_frame(tri)
                copy = _place_congruent(t_thin, median, mid, 0.5)
                ov = area_inside_set(copy, tree)
                frac = ov / copy.area
                res = _congruence_residual(copy, t_thin)
                in_ball = all(math.hypot(x, y) <= r for x, y in copy.vertices)
                witnesses.append(KakeyaWitness(copy, ov, frac, res, in_ball))
                copies.append(copy)
                if frac < min_overlap or res > 1e-12 or not in_ball:
                    ok = False
            if not ok:
                continue
            f_area = union_area(tree)
            reach = PolySet(tuple(copies))
            reach_area = union_area(reach)
            ratio = reach_area / f_area
            report = BlowReport(len(tree), f_area, reach_area, ratio, target,
                                ratio >= target, depth,
                                extra={"scale": scale, "witness_ok": ok})
            if best is None or ratio > best.ratio:
                best = report
            if ratio >= target:
                return tree, reach, report, witnesses
    if best is None:
        raise TargetUnreachableError(
            f"no witness-valid configuration at depth <= {max_depth}", None)
    raise TargetUnreachableError(
        f"best ratio {best.ratio:.3f} below target {target} at depth <= {max_depth}",
        best)


def polyset_to_csv(ps: PolySet, path: str) -> None:
    with open(path, "w") as fh:
        fh.write("polygon,vertex,x,y\n")
        for i, p in enumerate(ps):
            for j, (x, y) in enumerate(p.vertices):
                fh.write(f"{i},{j},{x!r},{y!r}\n")


def blow_report_to_json_str(report: BlowReport) -> str:
    return json.dumps(report.to_json(), sort_keys=True)
