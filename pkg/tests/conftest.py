import numpy as np
import pytest

from trajscan.trajectory import Trajectory, TrajectoryDataset


def random_dataset(rng: np.random.Generator, n_traj: int, max_m: int, p_recorded: float = 0.4) -> TrajectoryDataset:
    """Small random dataset in the unit square with at least one recorded and one baseline-only trajectory."""
    ts = []
    for i in range(n_traj):
        m = int(rng.integers(1, max_m + 1))
        ts.append(Trajectory(i, rng.uniform(0, 1, (m, 2)), int(rng.random() < p_recorded)))
    labels = [t.recorded for t in ts]
    if sum(labels) == 0:
        ts[0] = ts[0].with_labels(1)
    if n_traj > 1 and sum(t.recorded for t in ts) == n_traj:
        ts[-1] = ts[-1].with_labels(0)
    return TrajectoryDataset(tuple(ts))


def random_polyline(rng: np.random.Generator, m: int, step: float = 0.1) -> np.ndarray:
    start = rng.uniform(0.2, 0.8, 2)
    steps = rng.normal(0.0, step, (m - 1, 2))
    return np.clip(np.vstack([start, start + np.cumsum(steps, axis=0)]), 0.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
