"""Planar primitives: shapes, containment, segment clipping, hulls and kernels.

All shapes are closed sets. Boundary tests use an absolute distance
tolerance of ``EPS`` so that points constructed on a boundary count as
inside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

EPS = 1e-12


class Point(NamedTuple):
    x: float
    y: float


class LiftedPoint(NamedTuple):
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class Halfplane:
    """Closed halfplane ``normal . p <= offset`` with a unit normal."""

    normal: tuple[float, float]
    offset: float
    kind = "halfplane"

    def __post_init__(self):
        nx, ny = self.normal
        if not all(map(math.isfinite, (nx, ny, self.offset))):
            raise ValueError("halfplane parameters must be finite")
        if abs(math.hypot(nx, ny) - 1.0) > 1e-12:
            raise ValueError(f"halfplane normal must be a unit vector, got {self.normal}")
        object.__setattr__(self, "normal", (float(nx), float(ny)))
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def from_angle(cls, theta: float, through) -> Halfplane:
        """Halfplane with normal at angle ``theta`` whose boundary passes through a point."""
        nx, ny = math.cos(theta), math.sin(theta)
        # renormalise so the unit-norm check never trips on rounding
        s = math.hypot(nx, ny)
        nx, ny = nx / s, ny / s
        return cls((nx, ny), nx * through[0] + ny * through[1])

    def contains_xy(self, x, y):
        return self.normal[0] * x + self.normal[1] * y <= self.offset + EPS

    def params(self) -> tuple[float, ...]:
        return (self.normal[0], self.normal[1], self.offset)

    def shrink(self, d: float) -> Halfplane:
        return Halfplane(self.normal, self.offset - d)

    def to_dict(self) -> dict:
        return {"type": self.kind, "normal": list(self.normal), "offset": self.offset}


@dataclass(frozen=True)
class Disk:
    """Closed disk."""

    center: tuple[float, float]
    radius: float
    kind = "disk"

    def __post_init__(self):
        cx, cy = self.center
        if not (math.isfinite(cx) and math.isfinite(cy)):
            raise ValueError("disk center must be finite")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"disk radius must be positive and finite, got {self.radius}")
        object.__setattr__(self, "center", (float(cx), float(cy)))
        object.__setattr__(self, "radius", float(self.radius))

    def contains_xy(self, x, y):
        return np.hypot(x - self.center[0], y - self.center[1]) <= self.radius + EPS

    def params(self) -> tuple[float, ...]:
        return (self.center[0], self.center[1], self.radius)

    def shrink(self, d: float) -> Disk:
        return Disk(self.center, self.radius - d)

    def to_dict(self) -> dict:
        return {"type": self.kind, "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    kind = "rect"

    def __post_init__(self):
        vals = (self.x_lo, self.x_hi, self.y_lo, self.y_hi)
        if not all(map(math.isfinite, vals)):
            raise ValueError("rectangle bounds must be finite")
        if self.x_lo > self.x_hi or self.y_lo > self.y_hi:
            raise ValueError(f"inverted rectangle {vals}")
        for name, v in zip(("x_lo", "x_hi", "y_lo", "y_hi"), vals):
            object.__setattr__(self, name, float(v))

    def contains_xy(self, x, y):
        return (
            (x >= self.x_lo - EPS)
            & (x <= self.x_hi + EPS)
            & (y >= self.y_lo - EPS)
            & (y <= self.y_hi + EPS)
        )

    def params(self) -> tuple[float, ...]:
        return (self.x_lo, self.x_hi, self.y_lo, self.y_hi)

    def shrink(self, d: float) -> Rect:
        return Rect(self.x_lo + d, self.x_hi - d, self.y_lo + d, self.y_hi - d)

    def to_dict(self) -> dict:
        return {
            "type": self.kind,
            "x_lo": self.x_lo,
            "x_hi": self.x_hi,
            "y_lo": self.y_lo,
            "y_hi": self.y_hi,
        }


Shape = Union[Halfplane, Disk, Rect]


def shape_from_dict(d: dict) -> Shape:
    kind = d.get("type")
    if kind == "halfplane":
        return Halfplane(tuple(d["normal"]), d["offset"])
    if kind == "disk":
        return Disk(tuple(d["center"]), d["radius"])
    if kind == "rect":
        return Rect(d["x_lo"], d["x_hi"], d["y_lo"], d["y_hi"])
    raise ValueError(f"unknown shape type {kind!r}")


def shape_contains(shape: Shape, p) -> bool:
    return bool(shape.contains_xy(float(p[0]), float(p[1])))


def contains_points(shape: Shape, xy: np.ndarray) -> np.ndarray:
    """Vectorised membership for an (n, 2) array."""
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    return np.asarray(shape.contains_xy(xy[:, 0], xy[:, 1]), dtype=bool)


def _clip_interval(a: np.ndarray, b: np.ndarray, shape: Shape):
    """Parameter interval [t0, t1] of each segment a->b inside the shape.

    Empty intervals have t0 > t1.
    """
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    d = b - a
    n = len(a)
    t0 = np.zeros(n)
    t1 = np.ones(n)
    if isinstance(shape, Halfplane):
        nx, ny = shape.normal
        f0 = nx * a[:, 0] + ny * a[:, 1] - shape.offset
        f1 = nx * b[:, 0] + ny * b[:, 1] - shape.offset
        df = f1 - f0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            tc = np.clip(np.where(df != 0, -f0 / df, 0.0), 0.0, 1.0)
        in0 = f0 <= EPS
        in1 = f1 <= EPS
        t1 = np.where(in0 & ~in1, tc, t1)
        t0 = np.where(~in0 & in1, tc, t0)
        out = ~in0 & ~in1
        t0 = np.where(out, 1.0, t0)
        t1 = np.where(out, 0.0, t1)
    elif isinstance(shape, Disk):
        cx, cy = shape.center
        ex = a[:, 0] - cx
        ey = a[:, 1] - cy
        A = d[:, 0] ** 2 + d[:, 1] ** 2
        B = d[:, 0] * ex + d[:, 1] * ey
        R = shape.radius + EPS
        C = ex * ex + ey * ey - R * R
        disc = B * B - A * C
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            sq = np.sqrt(np.maximum(disc, 0.0))
            r0 = (-B - sq) / A
            r1 = (-B + sq) / A
        degenerate = A == 0
        inside_pt = C <= 0
        t0 = np.where(degenerate, np.where(inside_pt, 0.0, 1.0), np.maximum(0.0, r0))
        t1 = np.where(degenerate, np.where(inside_pt, 1.0, 0.0), np.minimum(1.0, r1))
        miss = ~degenerate & (disc < 0)
        t0 = np.where(miss, 1.0, t0)
        t1 = np.where(miss, 0.0, t1)
    elif isinstance(shape, Rect):
        lo = (shape.x_lo - EPS, shape.y_lo - EPS)
        hi = (shape.x_hi + EPS, shape.y_hi + EPS)
        for k in range(2):
            dk = d[:, k]
            ak = a[:, k]
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                ta = (lo[k] - ak) / dk
                tb = (hi[k] - ak) / dk
            moving = dk != 0
            enter = np.where(moving, np.minimum(ta, tb), -np.inf)
            leave = np.where(moving, np.maximum(ta, tb), np.inf)
            still_out = ~moving & ((ak < lo[k]) | (ak > hi[k]))
            enter = np.where(still_out, np.inf, enter)
            leave = np.where(still_out, -np.inf, leave)
            t0 = np.maximum(t0, enter)
            t1 = np.minimum(t1, leave)
    else:
        raise TypeError(f"unsupported shape {shape!r}")
    return t0, t1, d


def clip_lengths(a: np.ndarray, b: np.ndarray, shape: Shape) -> np.ndarray:
    """Length of each segment a[i]->b[i] inside the shape."""
    t0, t1, d = _clip_interval(a, b, shape)
    length = np.hypot(d[:, 0], d[:, 1])
    return np.clip(t1 - t0, 0.0, 1.0) * length


def segment_clip_length(a, b, shape: Shape) -> float:
    return float(clip_lengths(a, b, shape)[0])


def segments_hit(a: np.ndarray, b: np.ndarray, shape: Shape) -> np.ndarray:
    """Whether each closed segment meets the shape (tangency counts)."""
    t0, t1, _ = _clip_interval(a, b, shape)
    return t0 <= t1


def trajectory_intersects(waypoints, shape: Shape) -> bool:
    w = np.asarray(waypoints, dtype=float).reshape(-1, 2)
    if len(w) == 1:
        return shape_contains(shape, w[0])
    return bool(np.any(segments_hit(w[:-1], w[1:], shape)))


def veronese_lift(p) -> LiftedPoint:
    x, y = float(p[0]), float(p[1])
    return LiftedPoint(x, y, x * x + y * y)


def lift_points(xy: np.ndarray) -> np.ndarray:
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    return np.column_stack([xy, (xy**2).sum(axis=1)])


def lifted_halfspace(disk: Disk) -> tuple[float, float, float, float]:
    """Coefficients (a, b, c, d) with disk membership as a*x + b*y + c*z <= d on lifted points."""
    cx, cy = disk.center
    return (-2.0 * cx, -2.0 * cy, 1.0, disk.radius**2 - cx * cx - cy * cy)


def lifted_contains(disk: Disk, q: LiftedPoint) -> bool:
    a, b, c, d = lifted_halfspace(disk)
    # first-order equivalent of the EPS distance slack used by Disk.contains_xy
    return a * q.x + b * q.y + c * q.z <= d + 2.0 * disk.radius * EPS + EPS * EPS


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> np.ndarray:
    """Monotone-chain hull, counter-clockwise from the lexicographically smallest point.

    Collinear boundary points are dropped. One or two distinct points are
    returned as they are.
    """
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if len(pts) <= 2:
        return pts
    p = [tuple(v) for v in pts]
    lower: list = []
    for v in p:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], v) <= 0:
            lower.pop()
        lower.append(v)
    upper: list = []
    for v in reversed(p):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], v) <= 0:
            upper.pop()
        upper.append(v)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 2:
        # all points collinear and coincident after rounding
        hull = [p[0], p[-1]]
    return np.array(hull, dtype=float)


def _point_segment_dist(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    dd = float(d @ d)
    if dd == 0.0:
        return np.hypot(p[:, 0] - a[0], p[:, 1] - a[1])
    t = np.clip(((p - a) @ d) / dd, 0.0, 1.0)
    proj = a + t[:, None] * d
    return np.hypot(p[:, 0] - proj[:, 0], p[:, 1] - proj[:, 1])


def hull_kernel(points, tol: float) -> np.ndarray:
    """Subset of hull vertices whose hull is within ``tol`` of the full hull.

    Walks the convex hull and greedily skips vertices that lie within
    ``tol`` of the chord joining the surrounding kept vertices. For every
    direction u the support value then drops by at most ``tol``.
    """
    hull = convex_hull(points)
    h = len(hull)
    if h <= 2:
        if h == 2 and np.hypot(*(hull[1] - hull[0])) <= tol:
            return hull[:1]
        return hull
    keep = [0]
    i = 0
    while True:
        j = i + 1
        while j + 1 <= h:
            between = hull[i + 1 : j + 1]
            if len(between) and np.max(_point_segment_dist(between, hull[i], hull[(j + 1) % h])) > tol:
                break
            j += 1
        if j >= h:
            break
        keep.append(j)
        i = j
    return hull[keep]


def diameter(points) -> float:
    hull = convex_hull(points)
    if len(hull) < 2:
        return 0.0
    diff = hull[:, None, :] - hull[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=2)).max())


def alpha_kernel(points, kappa: float) -> np.ndarray:
    """Subset K with max_K u.p >= max_P u.p - kappa * diam(P) for every unit u."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    return hull_kernel(points, kappa * diameter(points))


def directional_error(points, subset, n_dirs: int = 720) -> float:
    """Worst support-function gap over evenly spaced directions."""
    theta = np.linspace(0.0, 2.0 * np.pi, n_dirs, endpoint=False)
    u = np.column_stack([np.cos(theta), np.sin(theta)])
    full = (np.asarray(points, dtype=float).reshape(-1, 2) @ u.T).max(axis=0)
    sub = (np.asarray(subset, dtype=float).reshape(-1, 2) @ u.T).max(axis=0)
    return float((full - sub).max())
