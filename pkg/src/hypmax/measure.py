"""Numerical hyperbolic measure on uniform half-plane grids.

The measure has density 1/y^2 against Lebesgue measure.  Estimates use the
midpoint rule over cells whose center lies in the region, with an explicit
error bound from cells whose corners disagree about membership.  Summation
runs in a fixed order (numpy row reductions combined by math.fsum), so
results do not depend on any parallel partitioning.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .halfplane import HPoint
from .triangles import Ball, Triangle, contains_mask, normalize_for_quadrature

Region = Union[Triangle, Ball, Sequence[Triangle]]

#: Fraction of occupied cells allowed to sit on the region boundary.
BOUNDARY_FRACTION_LIMIT = 0.5


class ResolutionTooCoarseError(RuntimeError):
    """Boundary cells dominate the occupied cells; refine the grid."""


class EmptyIntersectionError(RuntimeError):
    """No grid cell center falls inside the region."""


@dataclass(frozen=True, slots=True)
class MeasureEstimate:
    """A measure value with a one-sided error bound and the grid used."""

    value: float
    half_width: float
    resolution: int

    def __post_init__(self) -> None:
        if self.value < 0.0 or self.half_width < 0.0:
            raise ValueError("measure and error bound must be nonnegative")

    def lower(self) -> float:
        return max(0.0, self.value - self.half_width)

    def upper(self) -> float:
        return self.value + self.half_width


@dataclass(frozen=True, slots=True)
class GridWindow:
    """Axis-aligned window in the half-plane with a uniform cell grid."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self) -> None:
        if self.y_min <= 0.0:
            raise ValueError("window must stay in the upper half-plane (y_min > 0)")
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError("window must have positive extent")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("need at least 2 cells per axis")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / self.ny

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinate arrays of shapes (nx,) and (ny,)."""
        xs = self.x_min + (np.arange(self.nx) + 0.5) * self.dx
        ys = self.y_min + (np.arange(self.ny) + 0.5) * self.dy
        return xs, ys

    def corners(self) -> tuple[np.ndarray, np.ndarray]:
        xs = self.x_min + np.arange(self.nx + 1) * self.dx
        ys = self.y_min + np.arange(self.ny + 1) * self.dy
        return xs, ys

    def center_weights(self) -> np.ndarray:
        """Hyperbolic cell weights dx*dy / y_c^2, shape (ny, nx)."""
        _, ys = self.centers()
        w = (self.dx * self.dy) / (ys * ys)
        return np.repeat(w[:, None], self.nx, axis=1)

    def conservative_weights(self) -> np.ndarray:
        """Cell weights using the cell's smallest y (largest density)."""
        ys = self.y_min + np.arange(self.ny) * self.dy
        w = (self.dx * self.dy) / (ys * ys)
        return np.repeat(w[:, None], self.nx, axis=1)


def mu_ball(r: float) -> float:
    """Closed-form measure of a hyperbolic ball: 2 pi (cosh r - 1)."""
    if r <= 0.0:
        raise ValueError("radius must be positive")
    return 2.0 * math.pi * (math.cosh(r) - 1.0)


def _region_mask_fn(region: Region) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    if isinstance(region, Triangle):
        return lambda xs, ys: contains_mask(region, xs, ys)
    if isinstance(region, Ball):
        cx, cy, rho = region.euclidean_disk()

        def ball_mask(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
            return (xs - cx) ** 2 + (ys - cy) ** 2 <= rho * rho

        return ball_mask
    pieces = list(region)

    def union_mask(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        acc = np.zeros(np.broadcast(xs, ys).shape, dtype=bool)
        for t in pieces:
            acc |= contains_mask(t, xs, ys)
        return acc

    return union_mask


def region_bbox(region: Region, margin: float = 0.05) -> tuple[float, float, float, float]:
    """Euclidean bounding box (x_min, x_max, y_min, y_max) with relative margin."""
    if isinstance(region, Ball):
        cx, cy, rho = region.euclidean_disk()
        box = (cx - rho, cx + rho, cy - rho, cy + rho)
    else:
        tris = [region] if isinstance(region, Triangle) else list(region)
        xs: list[float] = []
        ys: list[float] = []
        for t in tris:
            vx: list[float] = []
            for v in t.vertices:
                if v.is_ideal:
                    if v.point.is_infinity:
                        raise ValueError("region with a vertex at infinity has no bounding box")
                    vx.append(v.point.x)
                    ys.append(0.0)
                else:
                    vx.append(v.point.x)
                    ys.append(v.point.y)
            xs.extend(vx)
            # A side arc bulges up to (center, radius) when its apex lies
            # between the side's endpoints.
            for k, s in enumerate(t.sides):
                if hasattr(s, "radius"):
                    xa, xb = vx[k], vx[(k + 1) % 3]
                    if min(xa, xb) <= s.center <= max(xa, xb):
                        ys.append(s.radius)
        box = (min(xs), max(xs), min(ys), max(ys))
    w = max(box[1] - box[0], box[3] - box[2], 1e-9)
    pad = margin * w
    y_lo = max(box[2] - pad, 1e-12)
    if box[2] <= 0.0:
        y_lo = max(box[3] * 1e-6, 1e-12)
    return (box[0] - pad, box[1] + pad, y_lo, box[3] + pad)


def window_for(region: Region, resolution: int = 2048, margin: float = 0.05) -> GridWindow:
    """Square-resolution window adapted to the region's bounding box."""
    x0, x1, y0, y1 = region_bbox(region, margin)
    return GridWindow(x0, x1, y0, y1, resolution, resolution)


def _ordered_sum(values: np.ndarray) -> float:
    """Deterministic reduction: numpy row sums combined with fsum."""
    if values.ndim == 1:
        return float(math.fsum(values.tolist()))
    return float(math.fsum(np.add.reduce(values, axis=1).tolist()))


def mu_estimate(region: Region, window: GridWindow) -> MeasureEstimate:
    """Midpoint-rule measure of the region with a boundary-cell error bound.

    Cells counted: center inside the region.  Error bound: total conservative
    weight of cells whose four corners disagree on membership.
    """
    mask_fn = _region_mask_fn(region)
    cx, cy = window.centers()
    center_mask = mask_fn(cx[None, :], cy[:, None])

    gx, gy = window.corners()
    corner_mask = mask_fn(gx[None, :], gy[:, None])
    cell_corner_any = (
        corner_mask[:-1, :-1] | corner_mask[:-1, 1:]
        | corner_mask[1:, :-1] | corner_mask[1:, 1:]
    )
    cell_corner_all = (
        corner_mask[:-1, :-1] & corner_mask[:-1, 1:]
        & corner_mask[1:, :-1] & corner_mask[1:, 1:]
    )
    boundary = cell_corner_any & ~cell_corner_all

    occupied = int(center_mask.sum())
    n_boundary = int(boundary.sum())
    if occupied == 0 and n_boundary == 0:
        return MeasureEstimate(0.0, 0.0, window.nx)
    if n_boundary > BOUNDARY_FRACTION_LIMIT * max(occupied, 1) and occupied < 4:
        raise ResolutionTooCoarseError(
            f"{n_boundary} boundary cells against {occupied} occupied cells")

    weights = window.center_weights()
    value = _ordered_sum(np.where(center_mask, weights, 0.0))
    half = _ordered_sum(np.where(boundary, window.conservative_weights(), 0.0))
    return MeasureEstimate(value, half, window.nx)


def triangle_measure(tri: Triangle, resolution: int = 2048) -> MeasureEstimate:
    """Grid measure of a compact triangle in a normalized placement."""
    t = normalize_for_quadrature(tri)
    return mu_estimate(t, window_for(t, resolution))


@dataclass(frozen=True)
class ScalarField:
    """Samples of a function at the cell centers of a window (row = y index)."""

    window: GridWindow
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.window.ny, self.window.nx):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"grid ({self.window.ny}, {self.window.nx})")

    def l1_norm(self) -> float:
        """Integral of |f| against the hyperbolic measure."""
        return _ordered_sum(np.abs(self.values) * self.window.center_weights())

    def scaled(self, factor: float) -> "ScalarField":
        return ScalarField(self.window, self.values * factor)


def field_from_function(window: GridWindow, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> ScalarField:
    cx, cy = window.centers()
    return ScalarField(window, np.asarray(fn(cx[None, :], cy[:, None]), dtype=float))


def indicator_field(window: GridWindow, region: Region) -> ScalarField:
    mask_fn = _region_mask_fn(region)
    cx, cy = window.centers()
    return ScalarField(window, mask_fn(cx[None, :], cy[:, None]).astype(float))


def bump_field(window: GridWindow, bumps: Sequence[tuple[Ball, float]]) -> ScalarField:
    """Sum of heights times ball indicators."""
    cx, cy = window.centers()
    acc = np.zeros((window.ny, window.nx))
    for ball, height in bumps:
        bx, by, rho = ball.euclidean_disk()
        acc += height * (((cx[None, :] - bx) ** 2 + (cy[:, None] - by) ** 2) <= rho * rho)
    return ScalarField(window, acc)


def average(f: ScalarField, tri: Triangle, absolute: bool = False) -> float:
    """Hyperbolic average of f (or |f|) over the triangle, on f's grid."""
    cx, cy = f.window.centers()
    mask = contains_mask(tri, cx[None, :], cy[:, None])
    if not mask.any():
        raise EmptyIntersectionError("no cell center falls inside the triangle")
    w = f.window.center_weights()
    vals = np.abs(f.values) if absolute else f.values
    num = _ordered_sum(np.where(mask, vals * w, 0.0))
    den = _ordered_sum(np.where(mask, w, 0.0))
    return num / den


def level_set_measure(field: ScalarField, t: float) -> MeasureEstimate:
    """Measure of the union of cells with sample > t.

    The half width is the weight of the band where 4-neighbours disagree.
    """
    above = field.values > t
    if not above.any():
        return MeasureEstimate(0.0, 0.0, field.window.nx)
    w = field.window.center_weights()
    value = _ordered_sum(np.where(above, w, 0.0))
    disagree = np.zeros_like(above)
    disagree[:-1, :] |= above[:-1, :] != above[1:, :]
    disagree[1:, :] |= above[1:, :] != above[:-1, :]
    disagree[:, :-1] |= above[:, :-1] != above[:, 1:]
    disagree[:, 1:] |= above[:, 1:] != above[:, :-1]
    half = _ordered_sum(np.where(disagree & above, field.window.conservative_weights(), 0.0))
    return MeasureEstimate(value, half, field.window.nx)


_HEADER = struct.Struct("<4d2q")


def save_field(field: ScalarField, path: str) -> None:
    """Write window + dims as little-endian doubles/int64, then row-major samples."""
    w = field.window
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(w.x_min, w.x_max, w.y_min, w.y_max, w.nx, w.ny))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def load_field(path: str) -> ScalarField:
    with open(path, "rb") as fh:
        x0, x1, y0, y1, nx, ny = _HEADER.unpack(fh.read(_HEADER.size))
        data = np.frombuffer(fh.read(), dtype="<f8").reshape(int(ny), int(nx))
    return ScalarField(GridWindow(x0, x1, y0, y1, int(nx), int(ny)), data.copy())


def field_to_csv(field: ScalarField, path: str) -> None:
    cx, cy = field.window.centers()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "value"])
        for j, y in enumerate(cy):
            for i, x in enumerate(cx):
                writer.writerow([repr(float(x)), repr(float(y)), repr(float(field.values[j, i]))])
