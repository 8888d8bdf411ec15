"""Per-trajectory point coresets that preserve shape intersections up to a shift alpha."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import ConfigError
from .geom import convex_hull, hull_kernel, lift_points
from .trajectory import LabeledPointSet, Trajectory, TrajectoryDataset

TAGS = (
    "all",
    "random",
    "even",
    "dp",
    "hull",
    "approx_hull",
    "lifted_hull",
    "grid_kernel",
    "gridding",
)
_NEEDS_ALPHA = {"random", "even", "dp", "approx_hull", "grid_kernel", "gridding"}


@dataclass(frozen=True)
class CoresetMethod:
    """Which simplification to apply, with its parameters.

    ``c`` is the constant in the random-sample size formula.
    """

    tag: str
    alpha: Optional[float] = None
    r: Optional[float] = None
    c: float = 1.0

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ConfigError(f"unknown coreset method {self.tag!r}; expected one of {', '.join(TAGS)}")
        if self.tag in _NEEDS_ALPHA:
            if self.alpha is None or not (0 < self.alpha < 1):
                raise ConfigError(f"coreset {self.tag!r} needs 0 < alpha < 1, got {self.alpha}")
        if self.tag == "grid_kernel":
            if self.r is None or self.r <= 0:
                raise ConfigError("grid_kernel needs a positive r")
            if 2 * self.alpha * self.r - self.alpha**2 / 2 <= 0:
                raise ConfigError("grid_kernel needs 2*alpha*r > alpha^2/2")
        if self.c <= 0:
            raise ConfigError("random-sample constant must be positive")


@dataclass(frozen=True)
class GridKernelParams:
    gamma: float
    kernel_err: float


def grid_kernel_params(alpha: float, r: float) -> GridKernelParams:
    disc = 2 * alpha * r - alpha * alpha / 2
    if disc <= 0:
        raise ConfigError("grid_kernel needs 2*alpha*r > alpha^2/2")
    gamma = math.sqrt(disc)
    return GridKernelParams(gamma, alpha / (2 * math.sqrt(2) * gamma))


def even_points(t: Trajectory, alpha: float, offset: float = 0.0) -> np.ndarray:
    """Points at arclength offset, offset + alpha, ... strictly before the end."""
    L = t.arclength
    if L == 0:
        return t.waypoints[:1].copy()
    k = max(1, math.ceil((L - offset) / alpha))
    s = offset + alpha * np.arange(k)
    s = s[s < L] if offset > 0 else s
    return t.at_arclength(s)


def random_points(t: Trajectory, alpha: float, rng: np.random.Generator, c: float = 1.0) -> np.ndarray:
    L = t.arclength
    if L == 0:
        return t.waypoints[:1].copy()
    ratio = L / alpha
    k = max(1, math.ceil(c * ratio * math.log(ratio + 2)))
    return t.at_arclength(np.sort(rng.uniform(0.0, L, size=k)))


def _seg_dist(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    dd = float(d @ d)
    if dd == 0.0:
        return np.hypot(p[:, 0] - a[0], p[:, 1] - a[1])
    u = np.clip(((p - a) @ d) / dd, 0.0, 1.0)
    q = a + u[:, None] * d
    return np.hypot(p[:, 0] - q[:, 0], p[:, 1] - q[:, 1])


def douglas_peucker(w: np.ndarray, alpha: float) -> np.ndarray:
    w = np.asarray(w, dtype=float).reshape(-1, 2)
    m = len(w)
    if m <= 2:
        return w.copy()
    keep = np.zeros(m, dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, m - 1)]
    while stack:
        i, j = stack.pop()
        if j - i < 2:
            continue
        d = _seg_dist(w[i + 1 : j], w[i], w[j])
        k = int(np.argmax(d))
        if d[k] > alpha:
            mid = i + 1 + k
            keep[mid] = True
            stack.append((i, mid))
            stack.append((mid, j))
    return w[keep]


def lifted_hull(w: np.ndarray) -> np.ndarray:
    """Waypoints whose lift onto the paraboloid is a vertex of the 3D hull."""
    w = np.asarray(w, dtype=float).reshape(-1, 2)
    _, first = np.unique(w, axis=0, return_index=True)
    uniq = w[np.sort(first)]
    if len(uniq) <= 4:
        return uniq
    try:
        hull = ConvexHull(lift_points(uniq))
    except QhullError:
        # coplanar lift (collinear waypoints): all points are extreme on the parabola
        return uniq
    return uniq[np.sort(hull.vertices)]


def cell_pieces(w: np.ndarray, ell: float) -> list[tuple[tuple[int, int], np.ndarray, np.ndarray]]:
    """Split a polyline into pieces that each lie in one closed ell-cell.

    Returns (cell, start, end) triples in path order. A single-waypoint
    polyline gives one degenerate piece.
    """
    w = np.asarray(w, dtype=float).reshape(-1, 2)
    if len(w) == 1:
        c = (int(math.floor(w[0, 0] / ell)), int(math.floor(w[0, 1] / ell)))
        return [(c, w[0], w[0])]
    out = []
    for a, b in zip(w[:-1], w[1:]):
        d = b - a
        ts = [0.0, 1.0]
        for k in range(2):
            if d[k] == 0:
                continue
            lo, hi = sorted((a[k], b[k]))
            i0 = math.floor(lo / ell) + 1
            i1 = math.ceil(hi / ell) - 1
            if i1 >= i0:
                lines = np.arange(i0, i1 + 1) * ell
                ts.extend(((lines - a[k]) / d[k]).tolist())
        ts = np.unique(np.clip(ts, 0.0, 1.0))
        if len(ts) == 1 or np.all(d == 0):
            c = (int(math.floor(a[0] / ell)), int(math.floor(a[1] / ell)))
            out.append((c, a, a))
            continue
        for t0, t1 in zip(ts[:-1], ts[1:]):
            if t1 <= t0:
                continue
            mid = a + 0.5 * (t0 + t1) * d
            c = (int(math.floor(mid[0] / ell)), int(math.floor(mid[1] / ell)))
            out.append((c, a + t0 * d, a + t1 * d))
    return out


def cells_visited(w: np.ndarray, ell: float) -> int:
    return len({c for c, _, _ in cell_pieces(w, ell)})


def _dedup(points: list[np.ndarray]) -> np.ndarray:
    arr = np.asarray(points, dtype=float).reshape(-1, 2)
    _, first = np.unique(arr, axis=0, return_index=True)
    return arr[np.sort(first)]


def simplify_grid_kernel(t: Trajectory, alpha: float, r: float) -> np.ndarray:
    """Per gamma-cell kernels of the curve, valid for disks of radius at least r.

    Within each cell the curve's hull is the hull of its clipped pieces'
    endpoints, so the kernel is taken over those exact points.
    """
    params = grid_kernel_params(alpha, r)
    cells: dict[tuple[int, int], list[np.ndarray]] = {}
    for c, p0, p1 in cell_pieces(t.waypoints, params.gamma):
        pts = cells.setdefault(c, [])
        pts.append(p0)
        pts.append(p1)
    out: list[np.ndarray] = []
    # kernel_err * (cell diagonal) = alpha / 2 of directional slack
    tol = params.kernel_err * math.sqrt(2) * params.gamma
    for pts in cells.values():
        out.extend(hull_kernel(np.array(pts), tol))
    return _dedup(out)


def gridding(t: Trajectory, alpha: float) -> np.ndarray:
    """Even(alpha/2) points snapped to centers of an (alpha/sqrt 8)-grid."""
    ell = alpha / math.sqrt(8)
    pts = even_points(t, alpha / 2)
    snapped = (np.floor(pts / ell) + 0.5) * ell
    if len(snapped) > 1:
        change = np.any(np.diff(snapped, axis=0) != 0, axis=1)
        snapped = snapped[np.concatenate([[True], change])]
    return snapped


def simplify(t: Trajectory, method: CoresetMethod, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Coreset points of one trajectory as an (k, 2) array."""
    tag = method.tag
    if t.m == 1:
        return t.waypoints.copy()
    if tag == "all":
        return t.waypoints.copy()
    if tag == "random":
        if rng is None:
            raise ValueError("random coreset needs a generator")
        return random_points(t, method.alpha, rng, method.c)
    if tag == "even":
        return even_points(t, method.alpha)
    if tag == "dp":
        return douglas_peucker(t.waypoints, method.alpha)
    if tag == "hull":
        return convex_hull(t.waypoints)
    if tag == "approx_hull":
        return hull_kernel(t.waypoints, method.alpha)
    if tag == "lifted_hull":
        return lifted_hull(t.waypoints)
    if tag == "grid_kernel":
        return simplify_grid_kernel(t, method.alpha, method.r)
    if tag == "gridding":
        return gridding(t, method.alpha)
    raise ConfigError(f"unknown coreset method {tag!r}")


def coreset_points(
    dataset: TrajectoryDataset,
    idx,
    method: CoresetMethod,
    seed: int = 0,
) -> LabeledPointSet:
    """Coresets of the selected trajectories, each point carrying (r(t), b(t)).

    Random coresets draw from a generator keyed by (seed, trajectory index),
    so a trajectory gets the same points whichever subset it appears in.
    """
    idx = np.asarray(idx, dtype=np.int64)
    pts, owner = [], []
    for i in idx:
        rng = np.random.default_rng((seed, int(i))) if method.tag == "random" else None
        p = simplify(dataset[int(i)], method, rng)
        pts.append(p)
        owner.append(np.full(len(p), i, dtype=np.int64))
    if not pts:
        return LabeledPointSet(np.zeros((0, 2)), [], [], [], 0.0, 0.0)
    owner_arr = np.concatenate(owner)
    r = dataset.recorded
    b = dataset.baseline
    return LabeledPointSet(
        np.concatenate(pts),
        owner_arr,
        r[owner_arr],
        b[owner_arr],
        float(r[idx].sum()),
        float(b[idx].sum()),
    )


def chain_even(dataset: TrajectoryDataset, alpha: float) -> LabeledPointSet:
    """Even placement over the trajectories chained end to end.

    Points sit at global arclength 0, alpha, 2*alpha, ...; the residual
    carries from one trajectory into the next.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    L = dataset.arclengths
    cum = np.concatenate([[0.0], np.cumsum(L)])
    total = cum[-1]
    k = math.ceil(total / alpha) if total > 0 else 0
    g = alpha * np.arange(k)
    g = g[g < total]
    owner = np.searchsorted(cum, g, side="right") - 1
    xy = np.empty((len(g), 2))
    for t in np.unique(owner):
        sel = owner == t
        xy[sel] = dataset[int(t)].at_arclength(g[sel] - cum[t])
    r = dataset.recorded[owner]
    b = dataset.baseline[owner]
    return LabeledPointSet(xy, owner, r, b, float(r.sum()), float(b.sum()))
