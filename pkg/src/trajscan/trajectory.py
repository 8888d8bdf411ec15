"""Trajectory data model, normalisation to the unit square, and labeled point sets."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ZeroExtentError
from .geom import Disk, Halfplane, Rect, Shape


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A polyline with per-trajectory labels.

    ``recorded`` is r(t) in {0, 1}; ``baseline`` is b(t).
    """

    id: int
    waypoints: np.ndarray
    recorded: int = 0
    baseline: float = 1.0

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.waypoints, dtype=float).reshape(-1, 2))
        if len(w) == 0:
            raise ValueError(f"trajectory {self.id} has no waypoints")
        if not np.all(np.isfinite(w)):
            raise ValueError(f"trajectory {self.id} has non-finite coordinates")
        if self.recorded not in (0, 1):
            raise ValueError(f"recorded label must be 0 or 1, got {self.recorded!r}")
        w.setflags(write=False)
        object.__setattr__(self, "waypoints", w)

    @property
    def m(self) -> int:
        return len(self.waypoints)

    @cached_property
    def segment_lengths(self) -> np.ndarray:
        d = np.diff(self.waypoints, axis=0)
        return np.hypot(d[:, 0], d[:, 1])

    @cached_property
    def cumulative(self) -> np.ndarray:
        """Arclength at each waypoint, starting from 0."""
        return np.concatenate([[0.0], np.cumsum(self.segment_lengths)])

    @property
    def arclength(self) -> float:
        return float(self.cumulative[-1])

    def at_arclength(self, s) -> np.ndarray:
        """Points at arclength positions ``s`` (clamped to [0, L])."""
        s = np.clip(np.asarray(s, dtype=float), 0.0, self.arclength)
        if self.m == 1:
            return np.repeat(self.waypoints, np.size(s), axis=0).reshape(np.shape(s) + (2,))
        cum = self.cumulative
        j = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, self.m - 2)
        seg = self.segment_lengths[j]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(seg > 0, (s - cum[j]) / seg, 0.0)
        a = self.waypoints[j]
        b = self.waypoints[j + 1]
        return a + u[..., None] * (b - a)

    def with_labels(self, recorded: int, baseline: float | None = None) -> Trajectory:
        return Trajectory(self.id, self.waypoints, int(recorded), self.baseline if baseline is None else baseline)


def arclength(t: Trajectory) -> float:
    return t.arclength


@dataclass(frozen=True)
class Transform:
    """Affine map p -> (p - origin) * scale from original to normalized coordinates."""

    scale: float = 1.0
    origin: tuple[float, float] = (0.0, 0.0)

    def forward(self, xy) -> np.ndarray:
        return (np.asarray(xy, dtype=float) - np.asarray(self.origin)) * self.scale

    def inverse(self, xy) -> np.ndarray:
        return np.asarray(xy, dtype=float) / self.scale + np.asarray(self.origin)

    @property
    def is_identity(self) -> bool:
        return self.scale == 1.0 and self.origin == (0.0, 0.0)

    def shape_to_original(self, shape: Shape) -> Shape:
        s, (ox, oy) = self.scale, self.origin
        if isinstance(shape, Disk):
            c = self.inverse(shape.center)
            return Disk((c[0], c[1]), shape.radius / s)
        if isinstance(shape, Rect):
            return Rect(shape.x_lo / s + ox, shape.x_hi / s + ox, shape.y_lo / s + oy, shape.y_hi / s + oy)
        if isinstance(shape, Halfplane):
            nx, ny = shape.normal
            return Halfplane(shape.normal, shape.offset / s + nx * ox + ny * oy)
        raise TypeError(shape)

    def shape_to_normalized(self, shape: Shape) -> Shape:
        s, (ox, oy) = self.scale, self.origin
        if isinstance(shape, Disk):
            c = self.forward(shape.center)
            return Disk((c[0], c[1]), shape.radius * s)
        if isinstance(shape, Rect):
            return Rect((shape.x_lo - ox) * s, (shape.x_hi - ox) * s, (shape.y_lo - oy) * s, (shape.y_hi - oy) * s)
        if isinstance(shape, Halfplane):
            nx, ny = shape.normal
            return Halfplane(shape.normal, (shape.offset - nx * ox - ny * oy) * s)
        raise TypeError(shape)


@dataclass(frozen=True, eq=False)
class TrajectoryDataset:
    trajectories: tuple[Trajectory, ...]
    transform: Transform = field(default_factory=Transform)

    def __post_init__(self):
        object.__setattr__(self, "trajectories", tuple(self.trajectories))

    def __len__(self) -> int:
        return len(self.trajectories)

    def __getitem__(self, i: int) -> Trajectory:
        return self.trajectories[i]

    def __iter__(self):
        return iter(self.trajectories)

    @cached_property
    def recorded(self) -> np.ndarray:
        return np.array([t.recorded for t in self.trajectories], dtype=float)

    @cached_property
    def baseline(self) -> np.ndarray:
        return np.array([t.baseline for t in self.trajectories], dtype=float)

    @cached_property
    def arclengths(self) -> np.ndarray:
        return np.array([t.arclength for t in self.trajectories], dtype=float)

    @cached_property
    def offsets(self) -> np.ndarray:
        """CSR offsets of each trajectory's waypoints in ``xy``."""
        return np.concatenate([[0], np.cumsum([t.m for t in self.trajectories])]).astype(np.int64)

    @cached_property
    def xy(self) -> np.ndarray:
        if not self.trajectories:
            return np.zeros((0, 2))
        return np.concatenate([t.waypoints for t in self.trajectories])

    @cached_property
    def segments(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(a, b, owner) for every segment; a single-waypoint trajectory yields one zero-length segment."""
        xy = self.xy
        off = self.offsets
        m = np.diff(off)
        n_seg = np.maximum(m - 1, 1)
        owner = np.repeat(np.arange(len(m)), n_seg)
        # index of each segment's first waypoint
        first = np.repeat(off[:-1], n_seg) + (np.arange(int(n_seg.sum())) - np.repeat(np.cumsum(n_seg) - n_seg, n_seg))
        second = np.where(np.repeat(m, n_seg) > 1, first + 1, first)
        return xy[first], xy[second], owner

    @property
    def n_waypoints(self) -> int:
        return int(self.offsets[-1])

    def bbox(self) -> tuple[float, float, float, float]:
        xy = self.xy
        return (float(xy[:, 0].min()), float(xy[:, 0].max()), float(xy[:, 1].min()), float(xy[:, 1].max()))

    def subset(self, idx: Sequence[int]) -> TrajectoryDataset:
        return TrajectoryDataset(tuple(self.trajectories[i] for i in idx), self.transform)

    def relabel(self, recorded: Sequence[int]) -> TrajectoryDataset:
        ts = tuple(t.with_labels(int(r)) for t, r in zip(self.trajectories, recorded))
        return TrajectoryDataset(ts, self.transform)


def normalize(trajectories: Sequence[Trajectory] | TrajectoryDataset) -> TrajectoryDataset:
    """Map waypoints into the unit square with one uniform scale.

    Data already inside [0, 1]^2 keeps the identity transform.
    """
    ts = tuple(trajectories)
    if not ts:
        raise ValueError("empty dataset")
    xy = np.concatenate([t.waypoints for t in ts])
    lo = xy.min(axis=0)
    hi = xy.max(axis=0)
    extent = float((hi - lo).max())
    if extent == 0.0:
        raise ZeroExtentError("zero extent: all waypoints are identical")
    if lo.min() >= 0.0 and hi.max() <= 1.0:
        return TrajectoryDataset(ts, Transform())
    tf = Transform(1.0 / extent, (float(lo[0]), float(lo[1])))
    out = []
    for t in ts:
        w = np.clip(tf.forward(t.waypoints), 0.0, 1.0)
        out.append(Trajectory(t.id, w, t.recorded, t.baseline))
    return TrajectoryDataset(tuple(out), tf)


@dataclass(frozen=True, eq=False)
class LabeledPointSet:
    """Points tagged with a trajectory index and (r, b) weights.

    ``traj`` indexes trajectories of the producing dataset. ``r_total`` and
    ``b_total`` are the masses that in-shape sums are divided by.
    """

    xy: np.ndarray
    traj: np.ndarray
    r: np.ndarray
    b: np.ndarray
    r_total: float
    b_total: float

    def __post_init__(self):
        xy = np.ascontiguousarray(np.asarray(self.xy, dtype=float).reshape(-1, 2))
        n = len(xy)
        traj = np.ascontiguousarray(np.asarray(self.traj, dtype=np.int64).reshape(-1))
        r = np.ascontiguousarray(np.asarray(self.r, dtype=float).reshape(-1))
        b = np.ascontiguousarray(np.asarray(self.b, dtype=float).reshape(-1))
        if not (len(traj) == len(r) == len(b) == n):
            raise ValueError("point set arrays must have equal length")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(b))):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "xy", xy)
        object.__setattr__(self, "traj", traj)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "r_total", float(self.r_total))
        object.__setattr__(self, "b_total", float(self.b_total))

    def __len__(self) -> int:
        return len(self.xy)

    @property
    def per_traj_k(self) -> dict[int, int]:
        ids, counts = np.unique(self.traj, return_counts=True)
        return {int(i): int(c) for i, c in zip(ids, counts)}

    @property
    def n_traj(self) -> int:
        return len(np.unique(self.traj))

    def take(self, mask_or_idx) -> LabeledPointSet:
        return LabeledPointSet(
            self.xy[mask_or_idx], self.traj[mask_or_idx], self.r[mask_or_idx], self.b[mask_or_idx], self.r_total, self.b_total
        )

    @staticmethod
    def concat(parts: Sequence[LabeledPointSet], r_total: float, b_total: float) -> LabeledPointSet:
        if not parts:
            return LabeledPointSet(np.zeros((0, 2)), [], [], [], r_total, b_total)
        return LabeledPointSet(
            np.concatenate([p.xy for p in parts]),
            np.concatenate([p.traj for p in parts]),
            np.concatenate([p.r for p in parts]),
            np.concatenate([p.b for p in parts]),
            r_total,
            b_total,
        )
