"""Full-model scanners: a trajectory counts once if any of its points lies in the region."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from .coreset import CoresetMethod
from .discrepancy import DiscrepancyFn, Model, RegionStats, check_model_fn
from .errors import ConfigError
from .geom import Disk
from .sampling import SamplingParams, draw_two_level
from .scan_point import ScanResult, better, disk_scan, halfplane_scan, no_region, rect_scan, _kernel_args
from .trajectory import LabeledPointSet, TrajectoryDataset


class CounterState:
    """Per-trajectory point counts inside a swept region, with running (r, b) sums.

    A trajectory's weights enter the sums on its 0 -> 1 transition and leave
    on 1 -> 0. The compiled scanners keep the same bookkeeping in arrays.
    """

    def __init__(self):
        self.counts: dict[int, int] = {}
        self.running_r = 0.0
        self.running_b = 0.0

    def insert(self, traj: int, r: float, b: float) -> bool:
        c = self.counts.get(traj, 0)
        self.counts[traj] = c + 1
        if c == 0:
            self.running_r += r
            self.running_b += b
            return True
        return False

    def remove(self, traj: int, r: float, b: float) -> bool:
        c = self.counts.get(traj, 0)
        if c <= 0:
            raise ValueError(f"trajectory {traj} has no points inside")
        if c == 1:
            del self.counts[traj]
            self.running_r -= r
            self.running_b -= b
            return True
        self.counts[traj] = c - 1
        return False

    def __len__(self) -> int:
        return len(self.counts)

    @property
    def empty(self) -> bool:
        return not self.counts


def max_halfplane_full(net: LabeledPointSet, sample: LabeledPointSet, fn: DiscrepancyFn) -> ScanResult:
    """Best halfplane through a net point, each sample trajectory counted once."""
    return halfplane_scan(net, sample, fn, Model.FULL, per_point=False)


def max_disk_full(
    net: LabeledPointSet,
    sample: LabeledPointSet,
    fn: DiscrepancyFn,
    r_min: Optional[float] = None,
    r_max: Optional[float] = None,
    use_hull: bool = False,
) -> ScanResult:
    """Disks through every pair of net points against every sample point.

    This is the quadratic-in-net baseline the multi-scale scan is measured
    against.
    """
    return disk_scan(net, sample, fn, Model.FULL, False, r_min, r_max, use_hull)


def thin_lines(coords: np.ndarray, sample_coords: np.ndarray, sample_traj: np.ndarray, alpha: float, cap: float) -> np.ndarray:
    """Greedy subset of sorted distinct coordinates for rectangle sides.

    A coordinate is kept once it is at least ``alpha`` past the previous kept
    line and the slab between them holds at least ``cap`` sample
    trajectories. The first and last coordinates are always kept.
    """
    lines = np.unique(np.asarray(coords, dtype=float))
    if len(lines) <= 2 or (alpha <= 0 and cap <= 0):
        return lines
    order = np.argsort(sample_coords, kind="mergesort")
    sc = np.asarray(sample_coords)[order]
    st = np.asarray(sample_traj)[order]
    kept = [lines[0]]
    ptr = int(np.searchsorted(sc, lines[0], side="left"))
    seen: set[int] = set()
    for v in lines[1:-1]:
        end = int(np.searchsorted(sc, v, side="left"))
        if cap > 0:
            seen.update(st[ptr:end].tolist())
        ptr = max(ptr, end)
        if v - kept[-1] >= alpha and len(seen) >= cap:
            kept.append(v)
            seen = set()
    kept.append(lines[-1])
    return np.array(kept)


def max_rect_full(
    net: LabeledPointSet,
    sample: LabeledPointSet,
    fn: DiscrepancyFn,
    alpha: float,
    max_side: Optional[float] = None,
    eps: Optional[float] = None,
) -> ScanResult:
    """Grid rectangles with per-trajectory counting.

    Candidate sides come from net coordinates thinned to alpha spacing and,
    when ``eps`` is given, to at least eps * |S| sample trajectories per
    row and column.
    """
    if alpha <= 0:
        raise ConfigError("alpha must be positive")
    if len(net) == 0:
        raise ValueError("empty net")
    cap = 0.0 if eps is None else eps * sample.n_traj
    X = thin_lines(net.xy[:, 0], sample.xy[:, 0], sample.traj, alpha, cap)
    Y = thin_lines(net.xy[:, 1], sample.xy[:, 1], sample.traj, alpha, cap)
    res = rect_scan(net, sample, fn, Model.FULL, False, X, Y, max_side)
    res.params.update(alpha=alpha, eps=eps)
    return res


@dataclass(frozen=True)
class MultiScaleParams:
    r_min: float
    r_max: float
    alpha: float
    use_hull_trick: bool = True
    max_side: Optional[float] = None

    def __post_init__(self):
        if not (0 < self.r_min < self.r_max <= 1):
            raise ConfigError(f"need 0 < r_min < r_max <= 1, got [{self.r_min}, {self.r_max}]")
        z = math.log2(self.r_max / self.r_min)
        if abs(z - round(z)) > 1e-9 or round(z) < 1:
            raise ConfigError("r_max / r_min must be 2^z for an integer z >= 1")
        if not (0 < self.alpha < 1):
            raise ConfigError("alpha must be in (0, 1)")

    @property
    def z(self) -> int:
        return int(round(math.log2(self.r_max / self.r_min)))

    def subranges(self) -> list[tuple[float, float]]:
        return [(self.r_min * 2**i, self.r_min * 2 ** (i + 1)) for i in range(self.z)]


def _all_points(dataset: TrajectoryDataset, method: CoresetMethod, seed: int) -> tuple[LabeledPointSet, LabeledPointSet]:
    from .coreset import coreset_points

    pts = coreset_points(dataset, np.arange(len(dataset)), method, seed)
    return pts, pts


def candidate_pairs(net_xy: np.ndarray, cell: float, reach: int, max_dist: float) -> set[tuple[int, int]]:
    """Reference enumeration of the net pairs one subrange sweeps.

    Pairs (i, j), i < j, whose grid cells are within ``reach`` cells in both
    axes and whose distance is at most ``max_dist``.
    """
    n_cells = int(math.ceil(1.0 / cell)) + 1
    c = np.clip(np.floor(np.asarray(net_xy) / cell).astype(np.int64), 0, n_cells - 1)
    out = set()
    for i in range(len(net_xy)):
        for j in range(i + 1, len(net_xy)):
            if np.all(np.abs(c[i] - c[j]) <= reach) and math.dist(net_xy[i], net_xy[j]) <= max_dist * (1 + 1e-12):
                out.add((i, j))
    return out


def max_disk_multiscale(
    dataset: TrajectoryDataset,
    params: MultiScaleParams,
    sampling: Optional[SamplingParams],
    fn: DiscrepancyFn,
    coreset: Optional[CoresetMethod] = None,
    exact_eval: bool = False,
) -> ScanResult:
    """Disks with radius in [r_min, r_max], scanned one doubling subrange at a time.

    For the subrange [r, 2r] the trajectories are reduced with a grid kernel
    built for radius r and bucketed on an r-edge grid. Each net point is a
    pivot; the second boundary point comes from the 5x5 block of cells
    around the pivot's cell and the third is swept over the sample points.
    The default evaluates only sample points in that block. With
    ``exact_eval`` every sample point within 4r of the pivot is used, which
    covers every candidate disk, and partner points come from the same
    wider range, so all disks in the window through two net points are
    enumerated. ``sampling=None`` uses every trajectory for both N and S.
    """
    check_model_fn(Model.FULL, fn)
    t0 = time.perf_counter()
    best: ScanResult = no_region(Model.FULL, fn)
    info = []
    for lo, hi in params.subranges():
        method = coreset if coreset is not None else CoresetMethod("grid_kernel", params.alpha, lo)
        if sampling is None:
            net, sample = _all_points(dataset, method, 0)
            n = s = len(dataset)
        else:
            tl = draw_two_level(dataset, sampling, method)
            net, sample, n, s = tl.net_points, tl.sample_points, tl.n, tl.s
        row = {"r": lo, "pairs": 0, "n": n, "s": s, "n_k": len(net), "s_k": len(sample)}
        info.append(row)
        if len(net) < 2 or len(sample) == 0:
            continue
        traj, t_r, t_b, rt, bt, sgn, code = _kernel_args(sample, Model.FULL, fn, False)
        reach = 4 if exact_eval else 2
        res, pairs = K.disk_scan_grid(
            net.xy, sample.xy, traj, t_r, t_b, rt, bt, sgn, code,
            lo, lo, hi, reach, exact_eval, params.use_hull_trick,
        )
        row["pairs"] = int(pairs)
        if res[0] < 0:
            continue
        cand = ScanResult(
            Disk((float(res[1]), float(res[2])), float(res[3])),
            RegionStats(float(res[4]), float(res[5]), float(res[0])),
            Model.FULL,
            fn,
        )
        best = better(best, cand)
    best.params = {
        "family": "disk",
        "r_min": params.r_min,
        "r_max": params.r_max,
        "alpha": params.alpha,
        "exact_eval": exact_eval,
        "hull_trick": params.use_hull_trick,
        "subranges": info,
    }
    best.elapsed = time.perf_counter() - t0
    return best
