import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trajscan.discrepancy import (
    CLAMP,
    KULLDORFF,
    LINEAR,
    DiscrepancyFn,
    Model,
    evaluate_region,
    evaluate_trajectories,
    kulldorff,
    linear,
    trajectory_hits,
)
from trajscan.errors import ConfigError
from trajscan.geom import Disk, Halfplane, Rect, segment_clip_length
from trajscan.trajectory import LabeledPointSet, Trajectory, TrajectoryDataset

from conftest import random_dataset

# reference values from 50-digit evaluation of r ln(r/b) + (1-r) ln((1-r)/(1-b))
KULLDORFF_TABLE = [
    (0.8, 0.5, 0.192744757021757),
    (0.0777, 0.05, 0.00696048607246995),
    (0.5, 0.5, 0.0),
    (0.3, 0.6, 0.183786897386812),
    (0.01, 0.2, 0.181004960570561),
    (0.99, 0.5, 0.637145646205098),
    (0.2, 0.05, 0.139778666682651),
]


@pytest.mark.parametrize("r,b,want", KULLDORFF_TABLE)
def test_kulldorff_table(r, b, want):
    assert kulldorff(r, b) == pytest.approx(want, abs=1e-12)


def test_kulldorff_spot_values():
    assert abs(kulldorff(0.8, 0.5) - 0.19274) <= 1e-5
    assert abs(kulldorff(0.0777, 0.05) - 0.00696) <= 1e-5


def test_kulldorff_clamps_at_edges():
    assert np.isfinite(kulldorff(0.0, 1.0))
    assert np.isfinite(kulldorff(1.0, 0.0))
    assert kulldorff(0.0, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert kulldorff(1.0, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert kulldorff(0.0, 1.0) == pytest.approx(kulldorff(CLAMP, 1 - CLAMP))


def test_linear():
    assert linear(0.8, 0.5) == pytest.approx(0.3)
    assert linear(0.4, 0.4) == 0.0


@settings(max_examples=200, deadline=None)
@given(r=st.floats(0, 1), b=st.floats(0, 1))
def test_fn_properties(r, b):
    assert kulldorff(r, b) >= -1e-15
    assert kulldorff(b, b) == pytest.approx(0.0, abs=1e-12)
    assert linear(r, b) == linear(b, r)
    one = DiscrepancyFn("linear", one_sided=True)
    assert one(r, b) == (abs(r - b) if r > b else 0.0)


def test_unknown_fn_and_flux_kulldorff():
    with pytest.raises(ConfigError):
        DiscrepancyFn("chi2")
    ds = random_dataset(np.random.default_rng(0), 5, 3)
    with pytest.raises(ConfigError):
        evaluate_trajectories(Disk((0.5, 0.5), 0.2), ds, Model.FLUX, KULLDORFF)


def test_full_model_counts_once():
    # 3 of 5 coreset points of trajectory 0 are inside the shape
    lp = LabeledPointSet(
        [[0.1, 0.1], [0.12, 0.1], [0.11, 0.12], [0.9, 0.9], [0.8, 0.8], [0.95, 0.1]],
        [0, 0, 0, 0, 0, 1],
        [1, 1, 1, 1, 1, 0],
        [1, 1, 1, 1, 1, 1],
        1.0,
        2.0,
    )
    st_ = evaluate_region(Disk((0.1, 0.1), 0.05), lp, Model.FULL, LINEAR)
    assert st_.r_frac == 1.0
    assert st_.b_frac == 0.5


def test_flux_both_endpoints_cancel():
    ds = TrajectoryDataset((Trajectory(0, [[0.4, 0.4], [0.9, 0.9], [0.5, 0.5]], 1), Trajectory(1, [[0.0, 0.0], [0.1, 0.1]])))
    st_ = evaluate_trajectories(Disk((0.45, 0.45), 0.1), ds, Model.FLUX, LINEAR)
    assert st_.r_frac == 0.0 and st_.b_frac == 0.0 and st_.phi == 0.0


def test_flux_signs():
    ds = TrajectoryDataset((Trajectory(0, [[0.1, 0.1], [0.9, 0.9]], 1), Trajectory(1, [[0.9, 0.1], [0.1, 0.1]])))
    # trajectory 0 leaves the disk, trajectory 1 enters it
    st_ = evaluate_trajectories(Disk((0.1, 0.1), 0.05), ds, Model.FLUX, LINEAR)
    assert st_.r_frac == 1.0
    assert st_.b_frac == 0.0


def test_partial_all_inside():
    ds = random_dataset(np.random.default_rng(3), 10, 4)
    st_ = evaluate_trajectories(Rect(-1, 2, -1, 2), ds, Model.PARTIAL, KULLDORFF)
    assert st_.r_frac == pytest.approx(1.0) and st_.b_frac == pytest.approx(1.0)
    assert st_.phi == pytest.approx(0.0, abs=1e-9)


def test_partial_matches_clip_lengths():
    rng = np.random.default_rng(4)
    ds = random_dataset(rng, 12, 5)
    shape = Disk((0.5, 0.5), 0.3)
    ins = np.zeros(len(ds))
    for i, t in enumerate(ds):
        w = t.waypoints
        ins[i] = sum(segment_clip_length(w[j], w[j + 1], shape) for j in range(t.m - 1))
    L = ds.arclengths
    r = ds.recorded
    st_ = evaluate_trajectories(shape, ds, Model.PARTIAL, LINEAR)
    assert st_.r_frac == pytest.approx((r @ ins) / (r @ L))
    assert st_.b_frac == pytest.approx(ins.sum() / L.sum())


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_full_region_from_all_waypoints_needs_segments(seed):
    rng = np.random.default_rng(seed)
    ds = random_dataset(rng, 10, 5)
    shape = Halfplane.from_angle(float(rng.uniform(0, 6.28)), rng.uniform(0, 1, 2))
    # for halfplanes a trajectory meets the shape iff some waypoint does
    hits = trajectory_hits(shape, ds)
    by_points = np.array([bool(shape.contains_xy(t.waypoints[:, 0], t.waypoints[:, 1]).any()) for t in ds])
    assert np.array_equal(hits, by_points)
    a = evaluate_trajectories(shape, ds, Model.FULL, KULLDORFF)
    lp = LabeledPointSet(ds.xy, np.repeat(np.arange(len(ds)), np.diff(ds.offsets)), ds.recorded[np.repeat(np.arange(len(ds)), np.diff(ds.offsets))], np.ones(ds.n_waypoints), ds.recorded.sum(), len(ds))
    b = evaluate_region(shape, lp, Model.FULL, KULLDORFF)
    assert a.phi == pytest.approx(b.phi, abs=1e-12)


def test_evaluate_region_empty():
    lp = LabeledPointSet(np.zeros((0, 2)), [], [], [], 1, 1)
    with pytest.raises(ValueError):
        evaluate_region(Disk((0, 0), 1), lp, Model.PARTIAL, LINEAR)
