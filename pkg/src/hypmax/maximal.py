"""Lower bounds for the triangle maximal operator, the greedy disjoint-ball
covering, the weak-type sampling experiment, and the catching construction
that pins a far point and a fixed ball inside one partly ideal triangle.

Every reported field value is a certified lower bound: it is the average of
|f| over a stored witness triangle containing the cell center, and the
supremum over the full family dominates any finite scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .halfplane import (
    HPoint,
    Isometry,
    dist,
    dist_to_geodesic,
    direction_from,
    geodesic_step,
    move_point_to,
    rotation_about,
)
from .classifier import AngleSetDescription, Regime, WrongRegimeError, regime_of
from .measure import (
    GridWindow,
    MeasureEstimate,
    ScalarField,
    _ordered_sum,
    bump_field,
    level_set_measure,
    mu_ball,
    window_for,
)
from .triangles import (
    AngleTriple,
    Ball,
    Triangle,
    angles_of,
    contains,
    contains_mask,
    diameter,
    incenter,
    transform_triangle,
    triangle_from_angles,
)

#: Frozen evidence budget for the weak-type ratio t * mu({M > t}) / ||f||_1.
WEAK_TYPE_BUDGET = 50.0


class ZeroFunctionError(ValueError):
    """The experiment needs a function with positive mass."""


class BadAnglesError(ValueError):
    """Catch construction needs alpha2, alpha3 > 0 with alpha2 + alpha3 < pi."""


class CatchFailedError(RuntimeError):
    """A catch postcondition failed; diagnostics in the message."""


@dataclass(frozen=True)
class Witness:
    """One realized term of the supremum: a triangle and its average."""

    triangle: Triangle
    average: float

    def __post_init__(self) -> None:
        if self.average < 0.0:
            raise ValueError("witness average must be nonnegative")


@dataclass(frozen=True)
class MaximalField:
    """Pointwise lower bounds for the maximal function with per-cell witnesses.

    witness_idx[j, i] is the index into candidates of the best triangle for
    that cell, or -1 where no candidate contains the cell center.
    """

    field: ScalarField
    witness_idx: np.ndarray
    candidates: tuple[Triangle, ...]


def maximal_lower(f: ScalarField, candidates: Sequence[Triangle]) -> MaximalField:
    """Best average of |f| over the candidates containing each cell center."""
    window = f.window
    cx, cy = window.centers()
    w = window.center_weights()
    absf = np.abs(f.values)
    values = np.zeros((window.ny, window.nx))
    idx = np.full((window.ny, window.nx), -1, dtype=np.int64)
    for k, tri in enumerate(candidates):
        mask = contains_mask(tri, cx[None, :], cy[:, None])
        if not mask.any():
            continue
        den = _ordered_sum(np.where(mask, w, 0.0))
        num = _ordered_sum(np.where(mask, absf * w, 0.0))
        avg = num / den
        better = mask & (avg > values)
        values[better] = avg
        idx[better] = k
    return MaximalField(ScalarField(window, values), idx, tuple(candidates))


@dataclass(frozen=True)
class CoveringResult:
    """Pairwise disjoint selected balls; every input fits in a 5x selected ball."""

    selected: tuple[Ball, ...]
    inflation: float = 5.0


def vitali(balls: Sequence[Ball]) -> CoveringResult:
    """Greedy disjoint subfamily whose 5x inflations cover every input ball.

    Balls are scanned by decreasing radius; one is selected iff it is disjoint
    from all previously selected.  Any rejected ball meets a selected ball of
    at least its radius, so its 5x inflation contains the rejected ball.
    """
    order = sorted(balls, key=lambda b: -b.radius)
    selected: list[Ball] = []
    for b in order:
        if all(dist(b.center, s.center) > b.radius + s.radius for s in selected):
            selected.append(b)
    return CoveringResult(tuple(selected))


def check_covering(balls: Sequence[Ball], cover: CoveringResult) -> bool:
    """Machine check of both conclusions: disjointness and 5x containment."""
    sel = cover.selected
    for i in range(len(sel)):
        for j in range(i + 1, len(sel)):
            if dist(sel[i].center, sel[j].center) <= sel[i].radius + sel[j].radius:
                return False
    for b in balls:
        if not any(dist(b.center, s.center) + b.radius <= cover.inflation * s.radius
                   for s in sel):
            return False
    return True


@dataclass(frozen=True)
class CatchResult:
    """Triangle catching a point while containing a fixed ball."""

    triangle: Triangle
    r_used: float
    rotation_angle: float
    inradius: float


def catch_triangle(x0: HPoint, r: float, y: HPoint, alpha2: float, alpha3: float,
                   scan: int = 256, bisect_steps: int = 40) -> CatchResult:
    """A triangle with angles (0, alpha2, alpha3) containing y and B(x0, r_used).

    The canonical triangle is recentred so its incenter sits at x0 (so it
    contains B(x0, rho) with rho the inradius); the ideal vertex guarantees
    the circle through y meets the triangle, and a rotation about x0 brings
    y's direction into that angular window.  r_used = min(r, 0.95 * rho).
    """
    if alpha2 <= 0.0 or alpha3 <= 0.0 or alpha2 + alpha3 >= math.pi:
        raise BadAnglesError(f"need alpha2, alpha3 > 0 with sum < pi, got {(alpha2, alpha3)}")
    base = triangle_from_angles(AngleTriple(0.0, alpha2, alpha3))
    c0, rho = incenter(base)
    t0 = transform_triangle(move_point_to(c0, x0), base)
    r_used = min(r, 0.95 * rho)

    big_r = dist(x0, y)
    if big_r <= r_used:
        theta_star = direction_from(x0, y) if big_r > 1e-12 else 0.0
        tri = t0
        rot_angle = 0.0
    else:
        thetas = np.linspace(0.0, 2.0 * math.pi, scan, endpoint=False)
        inside = np.array([
            contains(t0, geodesic_step(x0, float(th), big_r)) for th in thetas
        ])
        if not inside.any():
            raise CatchFailedError(
                f"circle of radius {big_r} misses the triangle; inradius {rho}")
        # Largest circular run of inside samples, then refine its endpoints.
        runs = _circular_runs(inside)
        start, length = max(runs, key=lambda rl: rl[1])
        step = 2.0 * math.pi / scan
        lo_in = thetas[start]
        hi_in = thetas[(start + length - 1) % scan]

        def contained(th: float) -> bool:
            return contains(t0, geodesic_step(x0, th % (2.0 * math.pi), big_r))

        lo_out = lo_in - step
        hi_out = hi_in + step
        for _ in range(bisect_steps):
            m = 0.5 * (lo_out + lo_in)
            if contained(m):
                lo_in = m
            else:
                lo_out = m
            m = 0.5 * (hi_in + hi_out)
            if contained(m):
                hi_in = m
            else:
                hi_out = m
        theta_star = 0.5 * (lo_in + hi_in)
        theta_y = direction_from(x0, y)
        rot_angle = theta_star - theta_y
        tri = transform_triangle(rotation_about(x0, -rot_angle), t0)

    _verify_catch(tri, x0, r_used, y, alpha2, alpha3)
    return CatchResult(tri, r_used, rot_angle, rho)


def _circular_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """(start, length) of maximal runs of True, treating the array as a cycle."""
    n = len(mask)
    if mask.all():
        return [(0, n)]
    runs = []
    i = 0
    while i < n:
        if mask[i] and (not mask[i - 1]):
            j = i
            length = 0
            while mask[j % n]:
                length += 1
                j += 1
            runs.append((i, length))
        i += 1
    return runs


def _verify_catch(tri: Triangle, x0: HPoint, r_used: float, y: HPoint,
                  alpha2: float, alpha3: float) -> None:
    if not contains(tri, y, tol=1e-7):
        raise CatchFailedError(f"catch triangle misses the target point {y}")
    if not contains(tri, x0):
        raise CatchFailedError("catch triangle lost the ball center")
    for j in range(64):
        q = geodesic_step(x0, 2.0 * math.pi * j / 64.0, r_used)
        if not contains(tri, q, tol=1e-9):
            raise CatchFailedError(f"ball sample {q} escaped the catch triangle")
    meas = angles_of(tri).as_tuple()
    want = (0.0, alpha2, alpha3)
    if max(abs(a - b) for a, b in zip(meas, want)) > 1e-8:
        raise CatchFailedError(f"catch angles {meas} drifted from {want}")


def _mass_center(f_spec: Sequence[tuple[Ball, float]]) -> tuple[Ball, float]:
    """The heaviest bump and its mass."""
    best = None
    for ball, height in f_spec:
        mass = abs(height) * mu_ball(ball.radius)
        if best is None or mass > best[1]:
            best = (ball, mass)
    if best is None or best[1] <= 0.0:
        raise ZeroFunctionError("function specification carries no mass")
    return best


def witness_average(f: ScalarField, tri: Triangle) -> float:
    """Average of |f| over the triangle, with the exact Gauss-Bonnet area.

    The numerator only needs f's support grid; the angle-defect area avoids
    gridding huge triangles, and is exact for every triangle.
    """
    window = f.window
    cx, cy = window.centers()
    mask = contains_mask(tri, cx[None, :], cy[:, None])
    w = window.center_weights()
    num = _ordered_sum(np.where(mask, np.abs(f.values) * w, 0.0))
    return num / (math.pi - angles_of(tri).total())


@dataclass(frozen=True)
class FloorResult:
    """Uniform positive lower bound for the maximal function at the probes."""

    floor: float
    witnesses: tuple[Witness, ...]
    r_used: float
    limit_angles: tuple[float, float, float]
    member_k: tuple[int | None, ...]


def _s2_witness(desc: AngleSetDescription) -> tuple[tuple[float, float, float], int | None]:
    """An S2 closure point shaped (0, a2, a3) and its sequence index."""
    hits = desc.closure_strata()
    from .classifier import Stratum

    for tag in hits.get(Stratum.S2, []):
        if tag[0] == "atom":
            triple = tag[1]
            arranged = _zero_first(triple)
            if arranged is not None:
                return arranged, None
        elif tag[0] == "limit":
            si = tag[1]
            triple = tuple(v.value() if hasattr(v, "value") else float(v)
                           for v in desc.sequences[si].base)
            arranged = _zero_first(triple)
            if arranged is not None:
                return arranged, si
    raise WrongRegimeError("no S2 closure point of the form (0, a2, a3) with a2, a3 > 0")


def _zero_first(triple) -> tuple[float, float, float] | None:
    zeros = [i for i, v in enumerate(triple) if v == 0.0]
    if len(zeros) != 1:
        return None
    rest = [triple[i] for i in range(3) if i != zeros[0]]
    if min(rest) <= 0.0:
        return None
    return (0.0, rest[0], rest[1])


def regime3_floor(desc: AngleSetDescription, f_spec: Sequence[tuple[Ball, float]],
                  probe_points: Sequence[HPoint], resolution: int = 1024,
                  k_max: int = 512) -> FloorResult:
    """Positive floor for the maximal function of f at every probe point.

    Catches each probe together with the heaviest bump's ball inside one
    triangle whose angles are the S2 limit (0, a2, a3); when that limit comes
    from a sequence, a member triangle with angles alpha(k) replaces it as the
    witness as soon as the member still contains probe and ball and its
    average clears half of the limit bound mu(B)/(2 pi).
    """
    if regime_of(desc) is not Regime.III:
        raise WrongRegimeError("description does not classify as regime III")
    (ball, _mass) = _mass_center(f_spec)
    limit, seq_index = _s2_witness(desc)
    window = window_for(ball, resolution)
    f = bump_field(window, f_spec)
    if not np.any(f.values):
        raise ZeroFunctionError("specified bumps are invisible on the grid")

    witnesses: list[Witness] = []
    ks: list[int | None] = []
    r_used = ball.radius
    for y in probe_points:
        caught = catch_triangle(ball.center, ball.radius, y, limit[1], limit[2])
        r_used = min(r_used, caught.r_used)
        floor_needed = abs(_mass_of(f_spec, ball)) / (2.0 * math.pi)
        chosen: Witness | None = None
        chosen_k: int | None = None
        if seq_index is not None:
            chosen, chosen_k = _member_witness(
                desc, seq_index, caught, ball, y, f, floor_needed, k_max)
        if chosen is None:
            chosen = Witness(caught.triangle, witness_average(f, caught.triangle))
        witnesses.append(chosen)
        ks.append(chosen_k)
    floor = min(w.average for w in witnesses)
    if floor <= 0.0:
        raise CatchFailedError("witnessed averages did not stay positive")
    return FloorResult(floor, tuple(witnesses), r_used, limit, tuple(ks))


def _mass_of(f_spec: Sequence[tuple[Ball, float]], ball: Ball) -> float:
    for b, h in f_spec:
        if b is ball:
            return h * mu_ball(b.radius)
    return mu_ball(ball.radius)


def _member_witness(desc: AngleSetDescription, seq_index: int, caught: CatchResult,
                    ball: Ball, y: HPoint, f: ScalarField, floor_needed: float,
                    k_max: int) -> tuple[Witness | None, int | None]:
    """Member triangle T_k aligned with the catch triangle, if one qualifies."""
    seq = desc.sequences[seq_index]
    limit_tri = caught.triangle
    c_lim, _ = incenter(limit_tri)
    # Axis of the catch triangle: direction from incenter toward the ideal
    # vertex (the ideal vertex of the limit is vertex 1 by construction).
    ideal = limit_tri.vertices[0].point
    axis = _direction_to_boundary(c_lim, ideal)
    k = 4
    while k <= k_max:
        member = seq.member_floats(k)
        try:
            tri_k = triangle_from_angles(AngleTriple(*member))
        except ValueError:
            k *= 2
            continue
        ck, _ = incenter(tri_k)
        vk = tri_k.vertices[0]
        axis_k = (_direction_to_boundary(ck, vk.point) if vk.is_ideal
                  else direction_from(ck, vk.point))
        g = rotation_about(c_lim, axis - axis_k) @ move_point_to(ck, c_lim)
        placed = transform_triangle(g, tri_k)
        if contains(placed, y, tol=1e-7) and _ball_inside(placed, ball.center, caught.r_used):
            avg = witness_average(f, placed)
            if avg >= floor_needed:
                return Witness(placed, avg), k
        k *= 2
    return None, None


def _direction_to_boundary(p: HPoint, bp) -> float:
    """Initial direction at p of the geodesic toward an ideal point."""
    from .halfplane import BoundaryPoint, Vertical, Arc, tangent_toward, geodesic_through

    if bp.is_infinity:
        g = Vertical(p.x)
    else:
        if abs(p.x - bp.x) < 1e-14:
            g = Vertical(p.x)
            tx, ty = 0.0, -1.0
            return math.atan2(ty, tx)
        c = (p.x * p.x + p.y * p.y - bp.x * bp.x) / (2.0 * (p.x - bp.x))
        g = Arc(c, math.hypot(p.x - c, p.y))
    tx, ty = tangent_toward(g, p, bp)
    return math.atan2(ty, tx)


def _ball_inside(tri: Triangle, center: HPoint, radius: float, samples: int = 64) -> bool:
    if not contains(tri, center):
        return False
    return all(
        contains(tri, geodesic_step(center, 2.0 * math.pi * j / samples, radius), tol=1e-9)
        for j in range(samples)
    )


@dataclass(frozen=True)
class WeakTypeRow:
    t: float
    measure: float
    measure_half_width: float
    ratio: float


@dataclass(frozen=True)
class WeakTypeTable:
    rows: tuple[WeakTypeRow, ...]
    l1_norm: float
    budget: float
    passed: bool
    n_candidates: int

    def to_json(self) -> dict:
        return {
            "rows": [
                {"t": r.t, "measure": r.measure,
                 "half_width": r.measure_half_width, "ratio": r.ratio}
                for r in self.rows
            ],
            "l1_norm": self.l1_norm,
            "budget": self.budget,
            "pass": self.passed,
            "n_candidates": self.n_candidates,
        }


def weak_type_experiment(desc: AngleSetDescription, f_spec: Sequence[tuple[Ball, float]],
                         t_grid: Sequence[float], seed: int, resolution: int = 512,
                         n_candidates: int = 120, budget: float = WEAK_TYPE_BUDGET,
                         ) -> tuple[WeakTypeTable, MaximalField]:
    """Sampled level-set table for t * mu({M > t}) / ||f||_1 in regime II.

    The field is a lower bound built from seeded candidate triangles whose
    angles are drawn from the description and whose positions cluster near
    the support of f, so a pass is sampled evidence for the weak-type bound,
    not a proof.
    """
    if regime_of(desc) is not Regime.II:
        raise WrongRegimeError("description does not classify as regime II")
    if not f_spec:
        raise ZeroFunctionError("empty function specification")
    rng = np.random.default_rng(seed)
    support_box = _support_window(f_spec, resolution)
    f = bump_field(support_box, f_spec)
    norm = f.l1_norm()
    if norm <= 0.0:
        raise ZeroFunctionError("function has zero mass on the grid")

    angle_pool = desc.constructible_samples(k_max=32)
    if not angle_pool:
        raise WrongRegimeError("description has no constructible members to sample")
    cell = max(support_box.dx, support_box.dy)
    candidates: list[Triangle] = []
    centers = [b.center for b, _ in f_spec]
    attempts = 0
    while len(candidates) < n_candidates and attempts < 50 * n_candidates:
        attempts += 1
        alpha = angle_pool[int(rng.integers(len(angle_pool)))]
        try:
            tri = triangle_from_angles(alpha)
        except ValueError:
            continue
        if diameter(tri) < 12.0 * cell:
            continue
        anchor, _ = incenter(tri)
        c = centers[int(rng.integers(len(centers)))]
        target = geodesic_step(c, float(rng.uniform(0, 2 * math.pi)),
                               float(rng.uniform(0, 1.0)) * diameter(tri))
        g = move_point_to(anchor, target) @ rotation_about(anchor, float(rng.uniform(0, 2 * math.pi)))
        candidates.append(transform_triangle(g, tri))
    mf = maximal_lower(f, candidates)
    rows = []
    worst = 0.0
    for t in t_grid:
        est = level_set_measure(mf.field, t)
        ratio = t * est.value / norm
        worst = max(worst, ratio)
        rows.append(WeakTypeRow(t, est.value, est.half_width, ratio))
    table = WeakTypeTable(tuple(rows), norm, budget, worst <= budget, len(candidates))
    return table, mf


def _support_window(f_spec: Sequence[tuple[Ball, float]], resolution: int) -> GridWindow:
    boxes = []
    for ball, _ in f_spec:
        cx, cy, rho = ball.euclidean_disk()
        boxes.append((cx - rho, cx + rho, cy - rho, cy + rho))
    x0 = min(b[0] for b in boxes)
    x1 = max(b[1] for b in boxes)
    y0 = min(b[2] for b in boxes)
    y1 = max(b[3] for b in boxes)
    pad = 0.25 * max(x1 - x0, y1 - y0)
    return GridWindow(x0 - pad, x1 + pad, max(y0 - pad, (y0 + y1) * 1e-4), y1 + pad,
                      resolution, resolution)
