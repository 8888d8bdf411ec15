"""Discrepancy functions and evaluation of a region under the three models."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError
from .geom import Shape, clip_lengths, contains_points, segments_hit
from .trajectory import LabeledPointSet, TrajectoryDataset

CLAMP = 1e-7


class Model(str, Enum):
    FLUX = "flux"
    PARTIAL = "partial"
    FULL = "full"


class Family(str, Enum):
    HALFPLANE = "halfplane"
    DISK = "disk"
    RECT = "rect"


def kulldorff(r: float, b: float) -> float:
    r = min(max(r, CLAMP), 1.0 - CLAMP)
    b = min(max(b, CLAMP), 1.0 - CLAMP)
    return r * math.log(r / b) + (1.0 - r) * math.log((1.0 - r) / (1.0 - b))


def linear(r: float, b: float) -> float:
    return abs(r - b)


@dataclass(frozen=True)
class DiscrepancyFn:
    """A discrepancy function phi(r, b).

    With ``one_sided`` only regions with r > b score; others get 0.
    """

    name: str = "kulldorff"
    one_sided: bool = False

    def __post_init__(self):
        if self.name not in ("kulldorff", "linear"):
            raise ConfigError(f"unknown discrepancy function {self.name!r}")

    def __call__(self, r: float, b: float) -> float:
        if self.one_sided and not r > b:
            return 0.0
        return kulldorff(r, b) if self.name == "kulldorff" else linear(r, b)

    @property
    def code(self) -> int:
        """Integer tag understood by the compiled sweep kernels."""
        return (2 if self.name == "kulldorff" else 0) + (1 if self.one_sided else 0)


KULLDORFF = DiscrepancyFn("kulldorff")
LINEAR = DiscrepancyFn("linear")


def check_model_fn(model: Model, fn: DiscrepancyFn) -> None:
    if Model(model) is Model.FLUX and fn.name != "linear":
        raise ConfigError("the flux model supports only the linear discrepancy")


def b_sign(model: Model) -> float:
    """Flux start points carry b = -b(t); flipping the sign gives the outflow fraction."""
    return -1.0 if Model(model) is Model.FLUX else 1.0


@dataclass(frozen=True)
class RegionStats:
    r_frac: float
    b_frac: float
    phi: float

    def __post_init__(self):
        for name in ("r_frac", "b_frac", "phi"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def to_dict(self) -> dict:
        return {"r_frac": self.r_frac, "b_frac": self.b_frac, "phi": self.phi}


def _frac(num: float, den: float) -> float:
    return num / den if den != 0 else 0.0


def stats_from_sums(r_sum: float, b_sum: float, r_total: float, b_total: float, model: Model, fn: DiscrepancyFn) -> RegionStats:
    r = _frac(r_sum, r_total)
    b = b_sign(model) * _frac(b_sum, b_total)
    return RegionStats(r, b, fn(r, b))


def evaluate_region(shape: Shape, sample: LabeledPointSet, model: Model, fn: DiscrepancyFn) -> RegionStats:
    """Phi of a shape estimated from a labeled point set."""
    model = Model(model)
    check_model_fn(model, fn)
    if len(sample) == 0:
        raise ValueError("empty sample")
    inside = contains_points(shape, sample.xy)
    if model is Model.FULL:
        # one (r, b) per trajectory: any point of the trajectory carries it
        _, first = np.unique(sample.traj, return_index=True)
        hit = np.isin(sample.traj[first], sample.traj[inside])
        r_sum = float(sample.r[first][hit].sum())
        b_sum = float(sample.b[first][hit].sum())
    else:
        r_sum = float(sample.r[inside].sum())
        b_sum = float(sample.b[inside].sum())
    return stats_from_sums(r_sum, b_sum, sample.r_total, sample.b_total, model, fn)


def trajectory_hits(shape: Shape, dataset: TrajectoryDataset) -> np.ndarray:
    """Full-model membership of every trajectory, tested segment by segment."""
    a, b, owner = dataset.segments
    hit = segments_hit(a, b, shape)
    out = np.zeros(len(dataset), dtype=bool)
    out[owner[hit]] = True
    return out


def evaluate_trajectories(shape: Shape, dataset: TrajectoryDataset, model: Model, fn: DiscrepancyFn) -> RegionStats:
    """Exact Phi of a shape on whole trajectories (no coreset, no sampling)."""
    model = Model(model)
    check_model_fn(model, fn)
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    rt = dataset.recorded
    bt = dataset.baseline
    if model is Model.FULL:
        w = trajectory_hits(shape, dataset).astype(float)
        return stats_from_sums(float(rt @ w), float(bt @ w), rt.sum(), bt.sum(), model, fn)
    if model is Model.PARTIAL:
        a, b, owner = dataset.segments
        inside_len = np.bincount(owner, weights=clip_lengths(a, b, shape), minlength=len(dataset))
        L = dataset.arclengths
        return stats_from_sums(float(rt @ inside_len), float(bt @ inside_len), float(rt @ L), float(bt @ L), model, fn)
    off = dataset.offsets
    xy = dataset.xy
    first_in = contains_points(shape, xy[off[:-1]]).astype(float)
    last_in = contains_points(shape, xy[off[1:] - 1]).astype(float)
    delta = first_in - last_in
    # flux: start points weigh (r, -b), end points (-r, b)
    return stats_from_sums(float(rt @ delta), -float(bt @ delta), rt.sum(), bt.sum(), model, fn)
