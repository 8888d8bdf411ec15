"""Two-level sampling: a sparse net N that proposes regions and a dense sample S that scores them."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .coreset import CoresetMethod, coreset_points
from .errors import ConfigError
from .trajectory import LabeledPointSet, TrajectoryDataset


@dataclass(frozen=True)
class SamplingParams:
    """Error and confidence targets plus the size-formula constants.

    ``k_bound`` is the coreset size used in the size formulas. With
    ``adapt_k`` the draw raises it to the largest coreset actually seen.
    """

    eps: float = 0.1
    delta: float = 0.05
    k_bound: int = 1
    c_net: float = 1.0
    c_sample: float = 0.25
    seed: int = 0
    adapt_k: bool = True

    def __post_init__(self):
        if not (0 < self.eps < 1):
            raise ConfigError(f"eps must be in (0, 1), got {self.eps}")
        if not (0 < self.delta < 1):
            raise ConfigError(f"delta must be in (0, 1), got {self.delta}")
        if self.k_bound < 1:
            raise ConfigError("k_bound must be at least 1")
        if self.c_net <= 0 or self.c_sample <= 0:
            raise ConfigError("size constants must be positive")


def net_size(params: SamplingParams) -> int:
    eps, delta, k = params.eps, params.delta, params.k_bound
    lk = math.log(k) if k > 1 else 0.0
    inner = max(math.e, lk / (eps * delta))
    return math.ceil(params.c_net * max(1.0, lk) / eps * math.log(inner) - 1e-9)


def sample_size(params: SamplingParams) -> int:
    eps, delta, k = params.eps, params.delta, params.k_bound
    return math.ceil(params.c_sample / eps**2 * (math.log(k + 1) + math.log(1 / delta)) - 1e-9)


@dataclass
class TwoLevelSample:
    net_idx: np.ndarray
    sample_idx: np.ndarray
    net_points: LabeledPointSet
    sample_points: LabeledPointSet
    params: SamplingParams

    @property
    def n(self) -> int:
        return len(self.net_idx)

    @property
    def s(self) -> int:
        return len(self.sample_idx)

    @property
    def n_k(self) -> int:
        return len(self.net_points)

    @property
    def s_k(self) -> int:
        return len(self.sample_points)


def draw_indices(n_total: int, n: int, s: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform without-replacement draws for N and S, sorted, capped at n_total."""
    rng = np.random.default_rng(seed)
    perm_n = rng.permutation(n_total)
    perm_s = rng.permutation(n_total)
    return np.sort(perm_n[: min(n, n_total)]), np.sort(perm_s[: min(s, n_total)])


def draw_two_level(dataset: TrajectoryDataset, params: SamplingParams, method: CoresetMethod) -> TwoLevelSample:
    """Draw N and S, then coreset each chosen trajectory.

    Each of N and S is a prefix of its own seeded permutation, so growing a
    size only appends trajectories. Sizes are recomputed while the largest
    realized coreset exceeds the current k.
    """
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    p = params
    for _ in range(32):
        n_idx, s_idx = draw_indices(len(dataset), net_size(p), sample_size(p), p.seed)
        net = coreset_points(dataset, n_idx, method, p.seed)
        sample = coreset_points(dataset, s_idx, method, p.seed)
        k_real = max(max(net.per_traj_k.values(), default=1), max(sample.per_traj_k.values(), default=1))
        if not p.adapt_k or k_real <= p.k_bound:
            break
        p = replace(p, k_bound=k_real)
    p = replace(p, k_bound=max(p.k_bound, k_real)) if p.adapt_k else p
    return TwoLevelSample(n_idx, s_idx, net, sample, p)
