"""Flux and partial models as weighted point-set scans, plus the point-set maximizers."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K
from .coreset import chain_even
from .discrepancy import DiscrepancyFn, Model, RegionStats, b_sign, check_model_fn
from .geom import Disk, Halfplane, Rect, Shape
from .trajectory import LabeledPointSet, TrajectoryDataset


@dataclass
class ScanResult:
    """Best region found by a scanner.

    ``shape`` is in normalized coordinates and is None when no candidate
    was enumerated. ``stats`` are measured on the scanned sample.
    """

    shape: Optional[Shape]
    stats: RegionStats
    model: Model
    fn: DiscrepancyFn
    params: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def found(self) -> bool:
        return self.shape is not None

    def shape_original(self, dataset: TrajectoryDataset) -> Optional[Shape]:
        if self.shape is None:
            return None
        return dataset.transform.shape_to_original(self.shape)


def no_region(model: Model, fn: DiscrepancyFn, params: dict | None = None) -> ScanResult:
    return ScanResult(None, RegionStats(0.0, 0.0, 0.0), Model(model), fn, params or {})


def better(a: ScanResult, b: ScanResult) -> ScanResult:
    """Larger phi wins; ties go to the lexicographically smaller shape parameters."""
    if b.shape is None:
        return a
    if a.shape is None:
        return b
    if b.stats.phi > a.stats.phi:
        return b
    if b.stats.phi == a.stats.phi and (b.shape.kind, b.shape.params()) < (a.shape.kind, a.shape.params()):
        return b
    return a


def flux_reduce(dataset: TrajectoryDataset, idx=None) -> LabeledPointSet:
    """Signed endpoint set: start (r(t), -b(t)), end (-r(t), b(t)) for each trajectory."""
    idx = np.arange(len(dataset)) if idx is None else np.asarray(idx, dtype=np.int64)
    off = dataset.offsets
    xy = dataset.xy
    start = xy[off[idx]]
    end = xy[off[idx + 1] - 1]
    r = dataset.recorded[idx]
    b = dataset.baseline[idx]
    n = len(idx)
    pts = np.empty((2 * n, 2))
    pts[0::2] = start
    pts[1::2] = end
    return LabeledPointSet(
        pts,
        np.repeat(idx, 2),
        np.column_stack([r, -r]).ravel(),
        np.column_stack([-b, b]).ravel(),
        float(r.sum()),
        float(b.sum()),
    )


def _random_arclength_points(dataset: TrajectoryDataset, count: int, rng: np.random.Generator) -> LabeledPointSet:
    L = dataset.arclengths
    cum = np.concatenate([[0.0], np.cumsum(L)])
    u = np.sort(rng.uniform(0.0, cum[-1], size=count))
    # side="right" skips zero-length trajectories, whose cum entries repeat
    owner = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, len(dataset) - 1)
    xy = np.empty((count, 2))
    for t in np.unique(owner):
        sel = owner == t
        xy[sel] = dataset[int(t)].at_arclength(u[sel] - cum[t])
    r = dataset.recorded[owner]
    b = dataset.baseline[owner]
    return LabeledPointSet(xy, owner, r, b, float(r.sum()), float(b.sum()))


def partial_reduce(
    dataset: TrajectoryDataset,
    n_target: int,
    s_target: int,
    method: str = "even",
    seed: int = 0,
) -> tuple[LabeledPointSet, LabeledPointSet]:
    """Arclength-uniform net and sample points over the chained trajectories.

    Each sample point carries (r(t), b(t)); dividing in-shape sums by the
    totals over all sample points estimates the recorded and baseline
    arclength fractions inside a shape.
    """
    total = float(dataset.arclengths.sum())
    if total <= 0:
        raise ValueError("all trajectories have zero arclength")
    if method == "even":
        net = chain_even(dataset, total / n_target)
        sample = chain_even(dataset, total / s_target)
    elif method == "random":
        rng = np.random.default_rng(seed)
        net = _random_arclength_points(dataset, n_target, rng)
        sample = _random_arclength_points(dataset, s_target, rng)
    else:
        raise ValueError(f"partial sampling method must be 'even' or 'random', got {method!r}")
    return net, sample


def _point_slots(sample: LabeledPointSet):
    return np.arange(len(sample), dtype=np.int64), sample.r, sample.b


def _kernel_args(sample: LabeledPointSet, model: Model, fn: DiscrepancyFn, per_point: bool):
    if per_point:
        traj, t_r, t_b = _point_slots(sample)
    else:
        n_t = int(sample.traj.max()) + 1 if len(sample) else 1
        t_r = np.zeros(n_t)
        t_b = np.zeros(n_t)
        t_r[sample.traj] = sample.r
        t_b[sample.traj] = sample.b
        traj = sample.traj
    return traj, t_r, t_b, sample.r_total, sample.b_total, b_sign(model), fn.code


def halfplane_scan(net: LabeledPointSet, sample: LabeledPointSet, fn: DiscrepancyFn, model: Model, per_point: bool) -> ScanResult:
    model = Model(model)
    check_model_fn(model, fn)
    if len(net) == 0:
        raise ValueError("empty net")
    t0 = time.perf_counter()
    traj, t_r, t_b, rt, bt, sgn, code = _kernel_args(sample, model, fn, per_point)
    phi, qi, theta, r, b = K.halfplane_sweep(net.xy, sample.xy, traj, t_r, t_b, rt, bt, sgn, code)
    if qi < 0:
        return no_region(model, fn)
    shape = Halfplane.from_angle(theta, net.xy[qi])
    res = ScanResult(shape, RegionStats(r, b, phi), model, fn, {"family": "halfplane"})
    res.elapsed = time.perf_counter() - t0
    return res


def max_halfplane_points(net: LabeledPointSet, sample: LabeledPointSet, fn: DiscrepancyFn, model: Model = Model.PARTIAL) -> ScanResult:
    """Best closed halfplane with a net point on its boundary, additive point weights."""
    return halfplane_scan(net, sample, fn, model, per_point=True)


def disk_scan(net, sample, fn, model, per_point, r_min=None, r_max=None, use_hull=False) -> ScanResult:
    model = Model(model)
    check_model_fn(model, fn)
    if len(net) < 2:
        raise ValueError("disk scanning needs at least two net points")
    t0 = time.perf_counter()
    lo = 0.0 if r_min is None else float(r_min)
    hi = math.inf if r_max is None else float(r_max)
    traj, t_r, t_b, rt, bt, sgn, code = _kernel_args(sample, model, fn, per_point)
    best = K.disk_scan_all(net.xy, sample.xy, traj, t_r, t_b, rt, bt, sgn, code, lo, hi, bool(use_hull and not per_point))
    params = {"family": "disk", "r_min": r_min, "r_max": r_max}
    if best[0] < 0:
        return no_region(model, fn, params)
    shape = Disk((best[1], best[2]), best[3])
    res = ScanResult(shape, RegionStats(best[4], best[5], best[0]), model, fn, params)
    res.elapsed = time.perf_counter() - t0
    return res


def max_disk_points(net, sample, fn, r_min=None, r_max=None, model: Model = Model.PARTIAL) -> ScanResult:
    """Best closed disk through two net points (radius optionally windowed)."""
    return disk_scan(net, sample, fn, model, True, r_min, r_max)


def grid_lines(values: np.ndarray) -> np.ndarray:
    return np.unique(np.asarray(values, dtype=float))


def rect_scan(net, sample, fn, model, per_point, X=None, Y=None, max_side=None) -> ScanResult:
    model = Model(model)
    check_model_fn(model, fn)
    if len(net) == 0:
        raise ValueError("empty net")
    t0 = time.perf_counter()
    X = grid_lines(net.xy[:, 0]) if X is None else X
    Y = grid_lines(net.xy[:, 1]) if Y is None else Y
    xs = K.slots(X, sample.xy[:, 0])
    ys = K.slots(Y, sample.xy[:, 1])
    keep = (xs >= 0) & (ys >= 0)
    side = math.inf if max_side is None else float(max_side)
    params = {"family": "rect", "grid": [len(X), len(Y)], "max_side": max_side}
    if per_point:
        best = K.rect_scan_points(
            X, Y, xs[keep], ys[keep], sample.r[keep], sample.b[keep],
            sample.r_total, sample.b_total, b_sign(model), fn.code, side,
        )
    else:
        sub = sample.take(keep)
        xs, ys = xs[keep], ys[keep]
        # one point per (trajectory, cell) is enough under full-model counting
        key = np.stack([sub.traj, xs, ys], axis=1)
        _, first = np.unique(key, axis=0, return_index=True)
        first = np.sort(first)
        traj, t_r, t_b, rt, bt, sgn, code = _kernel_args(sub, model, fn, False)
        best = K.rect_scan_full(X, Y, xs[first], ys[first], traj[first], t_r, t_b, rt, bt, sgn, code, side)
        params["sample_cells"] = int(len(first))
    if best[0] < 0:
        return no_region(model, fn, params)
    i, j, a, b = (int(v) for v in best[1:5])
    shape = Rect(X[i], X[j], Y[a], Y[b])
    res = ScanResult(shape, RegionStats(best[5], best[6], best[0]), model, fn, params)
    res.elapsed = time.perf_counter() - t0
    return res


def max_rect_points(net, sample, fn, model: Model = Model.PARTIAL, max_side=None) -> ScanResult:
    """Best rectangle on the grid of distinct net coordinates, additive point weights."""
    return rect_scan(net, sample, fn, model, True, max_side=max_side)
