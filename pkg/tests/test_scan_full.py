import math

import numpy as np
import pytest

from trajscan import _kernels as K
from trajscan.coreset import CoresetMethod, coreset_points
from trajscan.discrepancy import KULLDORFF, LINEAR, Model, evaluate_trajectories
from trajscan.errors import ConfigError
from trajscan.geom import Disk, Rect
from trajscan.pipeline import ScanConfig, _multiscale_params
from trajscan.scan_full import (
    CounterState,
    MultiScaleParams,
    candidate_pairs,
    max_disk_full,
    max_disk_multiscale,
    max_halfplane_full,
    max_rect_full,
    thin_lines,
)
from trajscan.scan_point import max_halfplane_points
from trajscan.trajectory import LabeledPointSet, Trajectory, TrajectoryDataset

from conftest import random_dataset
from helpers import best_phi, full_phi, grid_rects, pencil_disks, pivot_halfplanes, traj_weights


def all_points(ds):
    return coreset_points(ds, np.arange(len(ds)), CoresetMethod("all"))


def full_score(lp, fn):
    t_r, t_b = traj_weights(lp)
    return lambda s: full_phi(s, lp.xy, lp.traj, t_r, t_b, lp.r_total, lp.b_total, fn)


def test_counter_state():
    c = CounterState()
    assert c.insert(3, 1.0, 1.0)
    assert not c.insert(3, 1.0, 1.0)
    assert c.running_r == 1.0 and len(c) == 1
    assert not c.remove(3, 1.0, 1.0)
    assert c.remove(3, 1.0, 1.0)
    assert c.empty and c.running_r == 0.0
    with pytest.raises(ValueError):
        c.remove(3, 1.0, 1.0)


def test_halfplane_counts_trajectory_once():
    t0 = Trajectory(0, [[0.1, 0.1], [0.15, 0.1], [0.1, 0.15], [0.9, 0.9]], 1)
    t1 = Trajectory(1, [[0.9, 0.1]], 0)
    t2 = Trajectory(2, [[0.5, 0.9]], 0)
    ds = TrajectoryDataset((t0, t1, t2))
    lp = all_points(ds)
    res = max_halfplane_full(lp, lp, LINEAR)
    # trajectory 0 alone gives r = 1, b = 1/3
    assert res.stats.phi == pytest.approx(2 / 3)
    assert res.stats.r_frac == pytest.approx(1.0)


def test_single_point_trajectories_match_point_scan():
    rng = np.random.default_rng(2)
    ts = tuple(Trajectory(i, rng.uniform(0, 1, (1, 2)), int(rng.random() < 0.5)) for i in range(20))
    ds = TrajectoryDataset(ts)
    lp = all_points(ds)
    for fn in (LINEAR, KULLDORFF):
        assert max_halfplane_full(lp, lp, fn).stats.phi == pytest.approx(max_halfplane_points(lp, lp, fn, Model.FULL).stats.phi, abs=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_halfplane_full_matches_enumeration(seed):
    ds = random_dataset(np.random.default_rng(seed), 15, 5)
    lp = all_points(ds)
    fn = (LINEAR, KULLDORFF)[seed % 2]
    res = max_halfplane_full(lp, lp, fn)
    want = best_phi(pivot_halfplanes(lp.xy, lp.xy), full_score(lp, fn))
    assert res.stats.phi == pytest.approx(want, abs=1e-9)
    assert evaluate_trajectories(res.shape, ds, Model.FULL, fn).phi >= 0.0


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("hull", [False, True])
def test_disk_full_matches_enumeration(seed, hull):
    ds = random_dataset(np.random.default_rng(20 + seed), 8, 4)
    lp = all_points(ds)
    fn = (LINEAR, KULLDORFF)[seed % 2]
    res = max_disk_full(lp, lp, fn, use_hull=hull)
    want = best_phi(pencil_disks(lp.xy, lp.xy), full_score(lp, fn))
    assert res.stats.phi == pytest.approx(want, abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_rect_full_matches_grid_oracle(seed):
    rng = np.random.default_rng(40 + seed)
    # coarse grid coordinates so many points share lines
    ts = tuple(
        Trajectory(i, rng.integers(0, 6, (int(rng.integers(1, 4)), 2)) / 5.0, int(rng.random() < 0.4)) for i in range(10)
    )
    if not any(t.recorded for t in ts):
        ts = (ts[0].with_labels(1),) + ts[1:]
    ds = TrajectoryDataset(ts)
    lp = all_points(ds)
    res = max_rect_full(lp, lp, KULLDORFF, alpha=1e-9)
    want = best_phi(grid_rects(lp.xy[:, 0], lp.xy[:, 1]), full_score(lp, KULLDORFF))
    assert res.stats.phi == pytest.approx(want, abs=1e-9)


def test_rect_max_side_zero_and_limit():
    rng = np.random.default_rng(5)
    ds = random_dataset(rng, 30, 3)
    lp = all_points(ds)
    zero = max_rect_full(lp, lp, LINEAR, alpha=1e-9, max_side=0.0)
    assert zero.shape.x_lo == zero.shape.x_hi and zero.shape.y_lo == zero.shape.y_hi
    cells = [Rect(x, x, y, y) for x in np.unique(lp.xy[:, 0]) for y in np.unique(lp.xy[:, 1])]
    assert zero.stats.phi == pytest.approx(best_phi(cells, full_score(lp, LINEAR)), abs=1e-9)


def test_planted_rect_wider_than_max_side():
    rng = np.random.default_rng(8)
    ts = []
    for i in range(120):
        p = rng.uniform(0, 1, 2)
        inside = 0.2 <= p[0] <= 0.8 and 0.3 <= p[1] <= 0.7
        ts.append(Trajectory(i, [p], int(inside)))
    ds = TrajectoryDataset(tuple(ts))
    lp = all_points(ds)
    free = max_rect_full(lp, lp, LINEAR, alpha=1e-9)
    capped = max_rect_full(lp, lp, LINEAR, alpha=1e-9, max_side=0.2)
    assert capped.stats.phi < free.stats.phi


def test_thin_lines():
    coords = np.array([0.0, 0.01, 0.02, 0.5, 0.51, 1.0])
    kept = thin_lines(coords, coords, np.arange(6), 0.1, 0.0)
    assert list(kept) == [0.0, 0.5, 1.0]
    # a cap needing 2 trajectories per slab drops 0.5
    sample = np.array([0.1, 0.2, 0.3, 0.6, 0.9])
    kept = thin_lines(coords, sample, np.arange(5), 0.1, 2.0)
    assert kept[0] == 0.0 and kept[-1] == 1.0
    with pytest.raises(ConfigError):
        max_rect_full(LabeledPointSet([[0, 0]], [0], [1], [1], 1, 1), LabeledPointSet([[0, 0]], [0], [1], [1], 1, 1), LINEAR, alpha=0.0)


def test_subranges():
    p = MultiScaleParams(1 / 6000, 16 / 6000, 1e-5)
    starts = [lo for lo, _ in p.subranges()]
    assert starts == pytest.approx([1 / 6000, 1 / 3000, 1 / 1500, 1 / 750])
    assert p.z == 4
    cfg = ScanConfig(alpha=1e-5, r_min=1 / 6000, r_max=1 / 300, z=4)
    assert _multiscale_params(cfg).subranges() == p.subranges()
    with pytest.raises(ConfigError):
        MultiScaleParams(0.1, 0.3, 0.01)
    with pytest.raises(ConfigError):
        MultiScaleParams(0.2, 0.1, 0.01)


@pytest.mark.parametrize("exact", [False, True])
def test_pairs_match_reference_enumeration(exact):
    rng = np.random.default_rng(3)
    net = rng.uniform(0, 1, (120, 2))
    r_lo, r_hi = 0.05, 0.1
    reach = 4 if exact else 2
    n = len(net)
    lp = LabeledPointSet(net, np.arange(n), np.ones(n), np.ones(n), n, n)
    t_r, t_b = np.ones(n), np.ones(n)
    _, pairs = K.disk_scan_grid(net, net, lp.traj, t_r, t_b, n, n, 1.0, LINEAR.code, r_lo, r_lo, r_hi, reach, exact, False)
    assert pairs == len(candidate_pairs(net, r_lo, reach, 2 * r_hi))


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("hull", [False, True])
def test_multiscale_exact_matches_enumeration(seed, hull):
    ds = random_dataset(np.random.default_rng(60 + seed), 8, 4)
    lp = all_points(ds)
    fn = (LINEAR, KULLDORFF)[seed % 2]
    res = max_disk_multiscale(ds, MultiScaleParams(0.1, 0.4, 0.01, hull), None, fn, CoresetMethod("all"), exact_eval=True)
    want = best_phi(pencil_disks(lp.xy, lp.xy, 0.1, 0.4), full_score(lp, fn))
    assert res.stats.phi == pytest.approx(want, abs=1e-9)


def test_multiscale_recovers_concentrated_disk():
    rng = np.random.default_rng(4)
    ts = []
    for i in range(40):
        # recorded trajectories cross a disk of radius 0.05 around (0.3, 0.6)
        a = np.array([0.3, 0.6]) + rng.uniform(-0.03, 0.03, 2)
        ts.append(Trajectory(i, [a, a + rng.normal(0, 0.01, 2)], 1))
    for i in range(40, 200):
        ts.append(Trajectory(i, rng.uniform(0, 1, (2, 2)) * 0.05 + rng.uniform(0, 0.95, 2), 0))
    ds = TrajectoryDataset(tuple(ts))
    planted = evaluate_trajectories(Disk((0.3, 0.6), 0.05), ds, Model.FULL, LINEAR).phi
    res = max_disk_multiscale(ds, MultiScaleParams(0.025, 0.1, 0.005), None, LINEAR, exact_eval=True)
    found = evaluate_trajectories(res.shape, ds, Model.FULL, LINEAR).phi
    assert found >= planted - 0.1
    assert math.dist(res.shape.center, (0.3, 0.6)) <= res.shape.radius + 0.05


def test_multiscale_no_net_points():
    ds = TrajectoryDataset((Trajectory(0, [[0.5, 0.5]], 1), Trajectory(1, [[0.5, 0.5]], 0)))
    res = max_disk_multiscale(ds, MultiScaleParams(0.1, 0.2, 0.01), None, LINEAR, CoresetMethod("all"), exact_eval=True)
    assert not res.found and res.stats.phi == 0.0
