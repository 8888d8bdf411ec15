"""Synthetic data, planted anomalies, a brute-force oracle, and power experiments."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .discrepancy import KULLDORFF, LINEAR, CLAMP, DiscrepancyFn, Family, Model, RegionStats, check_model_fn, evaluate_trajectories, trajectory_hits
from .errors import PlantError, SizeGuardError
from .geom import EPS, Disk, Halfplane, Rect, Shape, clip_lengths, contains_points
from .scan_point import ScanResult, no_region
from .trajectory import Trajectory, TrajectoryDataset

GENERATORS = ("random_walk", "segment_bundle")


# ------------------------------------------------------------------ synthetic data


@dataclass(frozen=True)
class SyntheticConfig:
    n_traj: int = 1000
    waypoints_per_traj: tuple[int, int] = (5, 20)
    step_scale: float = 0.02
    generator: str = "random_walk"
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.waypoints_per_traj
        if self.n_traj < 1:
            raise ValueError("n_traj must be at least 1")
        if not (1 <= lo <= hi):
            raise ValueError(f"bad waypoint range {self.waypoints_per_traj}")
        if not (0 < self.step_scale < 0.5):
            raise ValueError("step_scale must be in (0, 0.5)")
        if self.generator not in GENERATORS:
            raise ValueError(f"generator must be one of {GENERATORS}")


def _walk(rng: np.random.Generator, m: int, step: float) -> np.ndarray:
    """Fixed-length steps with a wandering heading, reflected off the square's sides."""
    pts = np.empty((m, 2))
    pts[0] = rng.uniform(0, 1, 2)
    heading = rng.uniform(0, 2 * math.pi)
    turns = rng.normal(0.0, 0.6, m)
    for j in range(1, m):
        heading += turns[j]
        d = np.array([math.cos(heading), math.sin(heading)]) * step
        nxt = pts[j - 1] + d
        for k in range(2):
            if not 0.0 <= nxt[k] <= 1.0:
                # reflecting the step keeps its length since step < 1/2
                d[k] = -d[k]
                heading = math.atan2(d[1], d[0])
        pts[j] = np.clip(pts[j - 1] + d, 0.0, 1.0)
    return pts


def _bundle(rng: np.random.Generator, n: int, lo: int, hi: int, step: float) -> list[np.ndarray]:
    """Trajectories that follow a few shared roads, like map-matched traces."""
    n_roads = max(3, n // 40)
    a = rng.uniform(0.05, 0.95, (n_roads, 2))
    b = rng.uniform(0.05, 0.95, (n_roads, 2))
    pop = rng.zipf(1.6, n_roads).astype(float)
    pop /= pop.sum()
    out = []
    for _ in range(n):
        road = rng.choice(n_roads, p=pop)
        d = b[road] - a[road]
        length = float(np.hypot(*d))
        u = d / length
        perp = np.array([-u[1], u[0]])
        m = int(rng.integers(lo, hi + 1))
        s0 = rng.uniform(0, length)
        sign = rng.choice([-1.0, 1.0])
        s = s0 + sign * step * np.arange(m)
        # bounce back along the road at its ends
        s = np.abs(((s + length) % (2 * length)) - length)
        jitter = rng.normal(0.0, 0.15 * step, m)
        pts = a[road] + s[:, None] * u + jitter[:, None] * perp
        out.append(np.clip(pts, 0.0, 1.0))
    return out


def generate_synthetic(cfg: SyntheticConfig) -> TrajectoryDataset:
    """Seeded unlabeled trajectories inside the unit square."""
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.waypoints_per_traj
    if cfg.generator == "random_walk":
        paths = [_walk(rng, int(rng.integers(lo, hi + 1)), cfg.step_scale) for _ in range(cfg.n_traj)]
    else:
        paths = _bundle(rng, cfg.n_traj, lo, hi, cfg.step_scale)
    return TrajectoryDataset(tuple(Trajectory(i, p) for i, p in enumerate(paths)))


# ------------------------------------------------------------------ planting


@dataclass(frozen=True)
class PlantConfig:
    family: Family = Family.DISK
    model: Model = Model.FULL
    p: float = 0.5
    q: float = 0.8
    f: float = 0.05
    seed: int = 0
    fn: Optional[DiscrepancyFn] = None
    tol: float = 0.1
    max_centers: int = 50

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "model", Model(self.model))
        if not (0 <= self.p <= 1 and 0 <= self.q <= 1):
            raise ValueError("rates p and q must lie in [0, 1]")
        if not (0 < self.f < 1):
            raise ValueError("f must lie in (0, 1)")

    @property
    def discrepancy(self) -> DiscrepancyFn:
        if self.fn is not None:
            return self.fn
        return LINEAR if self.model is Model.FLUX else KULLDORFF


def _flux_members(shape: Shape, dataset: TrajectoryDataset) -> np.ndarray:
    off = dataset.offsets
    first = contains_points(shape, dataset.xy[off[:-1]])
    last = contains_points(shape, dataset.xy[off[1:] - 1])
    return first & ~last


def _inside_fraction(shape: Shape, dataset: TrajectoryDataset) -> np.ndarray:
    a, b, owner = dataset.segments
    inside = np.bincount(owner, weights=clip_lengths(a, b, shape), minlength=len(dataset))
    L = dataset.arclengths
    # a single point counts as fully inside or outside
    point = L == 0
    frac = np.divide(inside, L, out=np.zeros_like(inside), where=~point)
    if point.any():
        frac[point] = contains_points(shape, dataset.xy[dataset.offsets[:-1][point]])
    return frac


def planted_mass(shape: Shape, dataset: TrajectoryDataset, model: Model) -> float:
    """Baseline fraction b(C)/b(T) of a shape under the model's membership rule."""
    bt = dataset.baseline
    if model is Model.FULL:
        w = trajectory_hits(shape, dataset)
    elif model is Model.FLUX:
        w = _flux_members(shape, dataset)
    else:
        # arclength-weighted, matching the partial model's b(C)
        L = dataset.arclengths
        return float((bt * L) @ _inside_fraction(shape, dataset) / (bt @ L))
    return float(bt @ w / bt.sum())


def _shape_at(family: Family, center: np.ndarray, angle: float, size: float) -> Shape:
    if family is Family.DISK:
        return Disk((center[0], center[1]), size)
    if family is Family.RECT:
        return Rect(center[0] - size, center[0] + size, center[1] - size, center[1] + size)
    n = (math.cos(angle), math.sin(angle))
    return Halfplane(n, n[0] * center[0] + n[1] * center[1] + size)


def _size_range(family: Family) -> tuple[float, float]:
    return (-1.5, 1.5) if family is Family.HALFPLANE else (1e-4, 1.5)


def _search_size(mass_at, grid: np.ndarray, f: float, tol: float) -> Optional[float]:
    """First size whose mass is within tol*f of f: scan the grid, bisect any bracket."""
    masses = [mass_at(v) for v in grid]
    for k in range(len(grid) - 1):
        ma, mb = masses[k], masses[k + 1]
        if abs(ma - f) <= tol * f:
            return float(grid[k])
        if (ma - f) * (mb - f) >= 0:
            continue
        a, b = grid[k], grid[k + 1]
        for _ in range(20):
            mid = 0.5 * (a + b)
            mm = mass_at(mid)
            if abs(mm - f) <= tol * f:
                return float(mid)
            if (ma - f) * (mm - f) < 0:
                b = mid
            else:
                a, ma = mid, mm
    if abs(masses[-1] - f) <= tol * f:
        return float(grid[-1])
    return None


def plant(dataset: TrajectoryDataset, cfg: PlantConfig) -> tuple[TrajectoryDataset, Shape, RegionStats]:
    """Pick a shape holding about f of the baseline mass and draw recorded labels around it.

    Centers are random waypoints. For each, a grid of sizes brackets the
    target mass and bisection refines it; the first size within the
    relative tolerance wins. Trajectories inside get r = 1 with probability
    q, others with probability p. In the partial model the probability
    mixes q and p by the trajectory's arclength fraction inside.
    """
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    rng = np.random.default_rng(cfg.seed)
    fam, model = cfg.family, cfg.model
    lo, hi = _size_range(fam)
    grid = np.linspace(lo, hi, 61) if fam is Family.HALFPLANE else np.geomspace(lo, hi, 61)
    shape = None
    for _ in range(cfg.max_centers):
        center = dataset.xy[rng.integers(dataset.n_waypoints)]
        angle = rng.uniform(0, 2 * math.pi)
        size = _search_size(lambda v: planted_mass(_shape_at(fam, center, angle, v), dataset, model), grid, cfg.f, cfg.tol)
        if size is not None:
            shape = _shape_at(fam, center, angle, size)
            break
    if shape is None:
        raise PlantError(f"no {fam.value} within {cfg.tol:.0%} of f={cfg.f} after {cfg.max_centers} centers")
    if model is Model.FULL:
        inside = trajectory_hits(shape, dataset).astype(float)
    elif model is Model.FLUX:
        inside = _flux_members(shape, dataset).astype(float)
    else:
        inside = _inside_fraction(shape, dataset)
    prob = inside * cfg.q + (1 - inside) * cfg.p
    labels = (rng.random(len(dataset)) < prob).astype(int)
    labeled = dataset.relabel(labels)
    stats = evaluate_trajectories(shape, labeled, model, cfg.discrepancy)
    return labeled, shape, stats


def expected_planted_stats(p: float, q: float, f: float, fn: DiscrepancyFn = KULLDORFF) -> RegionStats:
    """Population (r(C), b(C), phi) of a full-model plant."""
    r = q * f / (q * f + p * (1 - f))
    return RegionStats(r, f, fn(r, f))


# ------------------------------------------------------------------ exact oracle


def _phi_vec(fn: DiscrepancyFn, r: np.ndarray, b: np.ndarray) -> np.ndarray:
    if fn.name == "kulldorff":
        rc = np.clip(r, CLAMP, 1 - CLAMP)
        bc = np.clip(b, CLAMP, 1 - CLAMP)
        v = rc * np.log(rc / bc) + (1 - rc) * np.log((1 - rc) / (1 - bc))
    else:
        v = np.abs(r - b)
    if fn.one_sided:
        v = np.where(r > b, v, 0.0)
    return v


class _Evaluator:
    """Running maximum over batches of scored candidates."""

    def __init__(self, dataset: TrajectoryDataset, model: Model, fn: DiscrepancyFn, resolution: str):
        self.ds = dataset
        self.model = model
        self.fn = fn
        self.resolution = resolution
        off = dataset.offsets
        if model is Model.FLUX:
            self.points = np.concatenate([dataset.xy[off[:-1]], dataset.xy[off[1:] - 1]])
        else:
            self.points = dataset.xy
            self.starts = off[:-1]
        self.rt, self.bt = dataset.recorded, dataset.baseline
        self.R, self.B = self.rt.sum(), self.bt.sum()
        self.best = -1.0
        self.best_shape: Optional[Shape] = None
        self.best_rb = (0.0, 0.0)
        self.count = 0

    def traj_hits(self, rows: np.ndarray) -> np.ndarray:
        """Per-trajectory any() over the waypoint columns of each row."""
        if len(self.starts) == rows.shape[1]:
            return rows
        return np.logical_or.reduceat(rows, self.starts, axis=1)

    def offer_values(self, r: np.ndarray, b: np.ndarray, shapes: list):
        self._offer(np.asarray(r, float), np.asarray(b, float), shapes)

    def _offer(self, r, b, shapes):
        self.count += len(r)
        v = _phi_vec(self.fn, r, b)
        k = int(np.argmax(v))
        if v[k] > self.best:
            self.best = float(v[k])
            self.best_shape = shapes[k] if not callable(shapes) else shapes(k)
            self.best_rb = (float(r[k]), float(b[k]))


def _flux_fracs(ev: _Evaluator, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = len(ev.ds)
    m = rows.astype(float)
    start, end = m[:, :n], m[:, n:]
    delta = start - end
    # began inside and left, minus the reverse; baseline sign follows the recorded one
    return delta @ ev.rt / ev.R, delta @ ev.bt / ev.B


def _score_rows(ev: _Evaluator, rows: np.ndarray, shapes):
    if len(rows) == 0:
        return
    if ev.model is Model.FLUX:
        r, b = _flux_fracs(ev, rows)
    else:
        # halfplanes are convex with convex complements, so a segment meets
        # one iff an endpoint does: waypoint rows are exact at either resolution
        hits = ev.traj_hits(rows)
        hf = hits.astype(float)
        r, b = hf @ ev.rt / ev.R, hf @ ev.bt / ev.B
    ev.offer_values(r, b, shapes)


class _HalfplaneShapes:
    def __init__(self, items):
        self.items = items

    def __call__(self, k):
        return self.items[k]


def _segment_hits_disks(centers: np.ndarray, radii: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(k, n_seg) closed segment-disk intersection via point-to-segment distance."""
    d = b - a
    dd = (d * d).sum(1)
    cx = centers[:, 0][:, None]
    cy = centers[:, 1][:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = ((cx - a[:, 0]) * d[:, 0] + (cy - a[:, 1]) * d[:, 1]) / dd
    u = np.where(dd > 0, np.clip(u, 0.0, 1.0), 0.0)
    px = a[:, 0] + u * d[:, 0]
    py = a[:, 1] + u * d[:, 1]
    return np.hypot(px - cx, py - cy) <= radii[:, None] + EPS


def _segment_hits_rects(R: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(k, n_seg) closed segment-rectangle intersection by parametric clipping."""
    t0 = np.zeros((len(R), len(a)))
    t1 = np.ones((len(R), len(a)))
    d = b - a
    for k, (lo, hi) in enumerate(((R[:, 0], R[:, 1]), (R[:, 2], R[:, 3]))):
        lo = lo[:, None] - EPS
        hi = hi[:, None] + EPS
        ak = a[:, k][None, :]
        dk = d[:, k][None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            ta = (lo - ak) / dk
            tb = (hi - ak) / dk
        moving = dk != 0
        enter = np.where(moving, np.minimum(ta, tb), np.where((ak >= lo) & (ak <= hi), -np.inf, np.inf))
        leave = np.where(moving, np.maximum(ta, tb), np.where((ak >= lo) & (ak <= hi), np.inf, -np.inf))
        t0 = np.maximum(t0, enter)
        t1 = np.minimum(t1, leave)
    return t0 <= t1


def _score_shapes(ev: _Evaluator, family: Family, params: np.ndarray):
    """Score concrete shapes (disks as rows (cx, cy, R); rects as (x_lo, x_hi, y_lo, y_hi))."""
    if len(params) == 0:
        return
    make = (lambda k: Disk((params[k, 0], params[k, 1]), params[k, 2])) if family is Family.DISK else (
        lambda k: Rect(*params[k])
    )
    ds = ev.ds
    if ev.model is Model.PARTIAL:
        a, b, owner = ds.segments
        L = ds.arclengths
        r = np.empty(len(params))
        bb = np.empty(len(params))
        for k in range(len(params)):
            inside = np.bincount(owner, weights=clip_lengths(a, b, make(k)), minlength=len(ds))
            r[k] = (ds.recorded * inside).sum() / (ds.recorded @ L) if ds.recorded @ L > 0 else 0.0
            bb[k] = (ds.baseline * inside).sum() / (ds.baseline @ L)
        ev.offer_values(r, bb, make)
        return
    P = ev.points
    if family is Family.DISK:
        rows = np.hypot(P[None, :, 0] - params[:, 0:1], P[None, :, 1] - params[:, 1:2]) <= params[:, 2:3] + EPS
    else:
        rows = (
            (P[None, :, 0] >= params[:, 0:1] - EPS)
            & (P[None, :, 0] <= params[:, 1:2] + EPS)
            & (P[None, :, 1] >= params[:, 2:3] - EPS)
            & (P[None, :, 1] <= params[:, 3:4] + EPS)
        )
    if ev.model is Model.FLUX:
        r, b = _flux_fracs(ev, rows)
    elif ev.resolution == "waypoint":
        hits = ev.traj_hits(rows)
        hf = hits.astype(float)
        r, b = hf @ ev.rt / ev.R, hf @ ev.bt / ev.B
    else:
        a, bseg, owner = ds.segments
        if family is Family.DISK:
            seg = _segment_hits_disks(params[:, :2], params[:, 2], a, bseg)
        else:
            seg = _segment_hits_rects(params, a, bseg)
        ind = np.zeros((len(a), len(ds)))
        ind[np.arange(len(a)), owner] = 1.0
        hits = (seg.astype(float) @ ind) > 0
        hf = hits.astype(float)
        r, b = hf @ ev.rt / ev.R, hf @ ev.bt / ev.B
    ev.offer_values(r, b, make)


def _distinct(P: np.ndarray) -> np.ndarray:
    _, first = np.unique(P, axis=0, return_index=True)
    return P[np.sort(first)]


def _halfplane_block(P: np.ndarray, pi: np.ndarray, Q: np.ndarray, side: float, tol: float):
    """Membership rows for the lines through ``pi`` and each partner in ``Q``.

    Generic lines (every on-line point projects onto ``pi`` or its partner)
    give five rows each: strict inside, plus the on-line prefix/suffix
    variants in the order the per-pair loop produces them. Returns the rows,
    normals, and a mask of partners that need the per-pair loop instead.
    """
    V = Q - pi
    U = V / np.hypot(V[:, 0], V[:, 1])[:, None]
    N = side * np.column_stack([-U[:, 1], U[:, 0]])
    W = P - pi
    S = N @ W.T
    proj = U @ W.T
    strict = S < -tol
    on = np.abs(S) <= tol
    lo = np.where(on, proj, np.inf).min(axis=1)
    hi = np.where(on, proj, -np.inf).max(axis=1)
    generic = (lo < hi) & ~(on & (proj != lo[:, None]) & (proj != hi[:, None])).any(axis=1)
    first = strict | (on & (proj <= lo[:, None]))
    both = strict | on
    last = strict | (on & (proj >= hi[:, None]))
    rows = np.stack([strict, first, both, both, last], axis=1)
    return rows, N, ~generic


def _pair_rows(P: np.ndarray, pi: np.ndarray, nrm: np.ndarray, u: np.ndarray, tol: float) -> list:
    s = (P - pi) @ nrm
    proj = (P - pi) @ u
    strict = s < -tol
    on = np.abs(s) <= tol
    rows = [strict]
    for t in np.unique(proj[on]):
        rows.append(strict | (on & (proj <= t)))
        rows.append(strict | (on & (proj >= t)))
    return rows


def _oracle_halfplanes(ev: _Evaluator):
    P = ev.points
    D = _distinct(P)
    if len(D) < 2:
        _score_rows(ev, np.ones((1, len(P)), bool), _HalfplaneShapes([Halfplane((1.0, 0.0), float(P[0, 0]))]))
        return
    tol = 1e-12
    for i in range(len(D) - 1):
        pi = D[i]
        for side in (1.0, -1.0):
            if ev.model is Model.PARTIAL:
                shapes = []
                for j in range(i + 1, len(D)):
                    v = D[j] - pi
                    u = v / math.hypot(*v)
                    nrm = side * np.array([-u[1], u[0]])
                    shapes.append(Halfplane((float(nrm[0]), float(nrm[1])), float(nrm @ pi)))
                _score_partial_halfplanes(ev, shapes)
                continue
            block, N, odd = _halfplane_block(P, pi, D[i + 1:], side, tol)
            if not odd.any():
                rows = block.reshape(-1, len(P))
                normals = np.repeat(N, 5, axis=0)
            else:
                parts, nparts = [], []
                for k in range(len(N)):
                    if odd[k]:
                        v = D[i + 1 + k] - pi
                        u = v / math.hypot(*v)
                        nrm = side * np.array([-u[1], u[0]])
                        r = _pair_rows(P, pi, nrm, u, tol)
                        parts.append(np.array(r))
                        nparts.append(np.repeat(nrm[None, :], len(r), axis=0))
                    else:
                        parts.append(block[k])
                        nparts.append(np.repeat(N[k:k + 1], 5, axis=0))
                rows = np.concatenate(parts)
                normals = np.concatenate(nparts)
            keep = rows.any(axis=1)
            normals = normals[keep]

            def make(k, normals=normals, pi=pi):
                n = normals[k]
                return Halfplane((float(n[0]), float(n[1])), float(n @ pi))

            _score_rows(ev, rows[keep], make)


def _score_partial_halfplanes(ev: _Evaluator, shapes: list):
    ds = ev.ds
    a, b, owner = ds.segments
    L = ds.arclengths
    r = np.empty(len(shapes))
    bb = np.empty(len(shapes))
    for k, h in enumerate(shapes):
        inside = np.bincount(owner, weights=clip_lengths(a, b, h), minlength=len(ds))
        r[k] = ds.recorded @ inside / (ds.recorded @ L) if ds.recorded @ L > 0 else 0.0
        bb[k] = ds.baseline @ inside / (ds.baseline @ L)
    ev.offer_values(r, bb, shapes)


def _oracle_disks(ev: _Evaluator, r_min: float, r_max: float):
    P = ev.points
    D = _distinct(P)
    lo2 = r_min * r_min * (1 - 1e-12)
    hi2 = r_max * r_max * (1 + 1e-12)
    for i in range(len(D) - 1):
        batch = []
        for j in range(i + 1, len(D)):
            v = D[j] - D[i]
            h2 = 0.25 * float(v @ v)
            if h2 > hi2:
                continue
            m = 0.5 * (D[i] + D[j])
            u = np.array([-v[1], v[0]]) / math.sqrt(4 * h2)
            w = D - m
            den = 2 * (w @ u)
            num = (w * w).sum(1) - h2
            ok = den != 0
            crit = num[ok] / den[ok]
            t_lo = math.sqrt(max(0.0, r_min * r_min - h2))
            t_hi = math.sqrt(max(0.0, r_max * r_max - h2)) if math.isfinite(r_max) else math.inf
            bounds = [0.0, t_lo, -t_lo]
            if math.isfinite(t_hi):
                bounds += [t_hi, -t_hi]
            ts = np.unique(np.concatenate([crit, bounds]))
            ts = np.concatenate([ts, 0.5 * (ts[1:] + ts[:-1]), [ts[0] - 1.0, ts[-1] + 1.0]])
            rad2 = h2 + ts * ts
            ts = ts[(rad2 >= lo2) & (rad2 <= hi2)]
            if len(ts) == 0:
                continue
            c = m[None, :] + ts[:, None] * u[None, :]
            batch.append(np.column_stack([c, np.sqrt(h2 + ts * ts)]))
        if batch:
            _score_shapes(ev, Family.DISK, np.concatenate(batch))


def _oracle_rects(ev: _Evaluator):
    P = ev.points
    X = np.unique(P[:, 0])
    Y = np.unique(P[:, 1])
    ya, yb = np.triu_indices(len(Y))
    for i in range(len(X)):
        for j in range(i, len(X)):
            params = np.column_stack([np.full(len(ya), X[i]), np.full(len(ya), X[j]), Y[ya], Y[yb]])
            _score_shapes(ev, Family.RECT, params)


def exact_scan(
    dataset: TrajectoryDataset,
    family: Family,
    model: Model,
    fn: DiscrepancyFn,
    r_min: Optional[float] = None,
    r_max: Optional[float] = None,
    resolution: str = "segment",
    max_traj: Optional[int] = 200,
    max_waypoints: Optional[int] = 2000,
) -> ScanResult:
    """Brute-force optimum over the combinatorial candidate family.

    Candidates are defined by the data points (endpoints for flux, all
    waypoints otherwise): halfplanes through every pair with every choice
    of which boundary points to include, disks through every pair at every
    radius where a third point crosses the boundary (and between those),
    and rectangles on every coordinate 4-tuple. Full-model membership is
    tested segment by segment, or by waypoints with ``resolution="waypoint"``.
    Disk radii are limited to [r_min, r_max] when given. Pass None for the
    size limits to lift the guard.
    """
    family, model = Family(family), Model(model)
    check_model_fn(model, fn)
    if resolution not in ("segment", "waypoint"):
        raise ValueError("resolution must be 'segment' or 'waypoint'")
    if max_traj is not None and len(dataset) > max_traj:
        raise SizeGuardError(f"oracle limited to {max_traj} trajectories, got {len(dataset)}")
    if max_waypoints is not None and dataset.n_waypoints > max_waypoints:
        raise SizeGuardError(f"oracle limited to {max_waypoints} waypoints, got {dataset.n_waypoints}")
    t0 = time.perf_counter()
    ev = _Evaluator(dataset, model, fn, resolution)
    if family is Family.HALFPLANE:
        _oracle_halfplanes(ev)
    elif family is Family.DISK:
        _oracle_disks(ev, 0.0 if r_min is None else r_min, math.inf if r_max is None else r_max)
    else:
        _oracle_rects(ev)
    params = {"family": family.value, "oracle": True, "candidates": ev.count, "resolution": resolution}
    if ev.best_shape is None:
        return no_region(model, fn, params)
    r, b = ev.best_rb
    res = ScanResult(ev.best_shape, RegionStats(r, b, ev.best), model, fn, params)
    res.elapsed = time.perf_counter() - t0
    return res


# ------------------------------------------------------------------ power experiments


@dataclass
class Trial:
    seed: int
    planted_phi: float
    found_phi: float
    found_shape: Optional[Shape]
    runtime: float


@dataclass
class PowerReport:
    trials: list[Trial]
    threshold: float = 0.9
    eps: float = 0.0
    alpha: Optional[float] = None

    @property
    def recovery_rate(self) -> float:
        if not self.trials:
            return 0.0
        ok = sum(t.found_phi >= self.threshold * t.planted_phi for t in self.trials)
        return ok / len(self.trials)

    def to_csv(self, runtime: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["seed", "eps", "alpha", "planted_phi", "found_phi"] + (["runtime_ms"] if runtime else [])
        w.writerow(cols)
        for t in self.trials:
            row = [t.seed, self.eps, "" if self.alpha is None else self.alpha, f"{t.planted_phi:.12g}", f"{t.found_phi:.12g}"]
            if runtime:
                row.append(f"{t.runtime * 1000:.1f}")
            w.writerow(row)
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "trials": len(self.trials),
            "threshold": self.threshold,
            "recovery_rate": self.recovery_rate,
            "mean_planted_phi": float(np.mean([t.planted_phi for t in self.trials])) if self.trials else 0.0,
            "mean_found_phi": float(np.mean([t.found_phi for t in self.trials])) if self.trials else 0.0,
        }


def power_experiment(dataset_cfg: SyntheticConfig, plant_cfg: PlantConfig, scan_cfg, trials: int, threshold: float = 0.9) -> PowerReport:
    """Generate, plant, scan and score ``trials`` times with consecutive seeds.

    ``found_phi`` is the scanned shape's exact value on all trajectories,
    compared with the planted shape's exact value.
    """
    from .pipeline import run_scan

    if trials < 1:
        raise ValueError("trials must be at least 1")
    rows = []
    for i in range(trials):
        data = generate_synthetic(replace(dataset_cfg, seed=dataset_cfg.seed + i))
        labeled, _, stats = plant(data, replace(plant_cfg, seed=plant_cfg.seed + i))
        cfg = replace(scan_cfg, seed=scan_cfg.seed + i)
        t0 = time.perf_counter()
        out = run_scan(labeled, cfg)
        dt = time.perf_counter() - t0
        found = out.full_stats.phi if out.full_stats is not None else 0.0
        rows.append(Trial(dataset_cfg.seed + i, stats.phi, found, out.result.shape, dt))
    return PowerReport(rows, threshold, scan_cfg.eps, scan_cfg.alpha)
