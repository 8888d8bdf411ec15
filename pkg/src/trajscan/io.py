"""Waypoint CSV ingestion and export."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .errors import IngestError
from .trajectory import Trajectory, TrajectoryDataset, normalize

HEADER = ["traj_id", "x", "y", "label"]
LABELS = {"r": 1, "b": 0}


@dataclass(frozen=True)
class IngestReport:
    n_traj: int
    n_waypoints: int
    bbox: tuple[float, float, float, float]

    def to_dict(self) -> dict:
        return {"n_traj": self.n_traj, "n_waypoints": self.n_waypoints, "bbox": list(self.bbox)}


def read_waypoints(fh: TextIO, source: str = "<input>") -> tuple[list[Trajectory], list[str]]:
    """Parse ``traj_id,x,y,label`` rows into trajectories in original coordinates.

    Waypoints of one trajectory must be contiguous and in path order; label
    ``r`` marks a recorded trajectory and must not change within an id.
    Also returns the traj_id strings in file order.
    """
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError(f"{source}: empty file, expected header {','.join(HEADER)}") from None
    if [h.strip() for h in header] != HEADER:
        raise IngestError(f"{source}:1: header must be {','.join(HEADER)}, got {','.join(header)}")
    out: list[Trajectory] = []
    seen: set[str] = set()
    cur_id = None
    cur_label = None
    cur_pts: list[tuple[float, float]] = []

    def flush():
        if cur_id is not None:
            out.append(Trajectory(len(out), np.array(cur_pts), LABELS[cur_label]))

    ids: list[str] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise IngestError(f"{source}:{lineno}: expected 4 fields, got {len(row)}")
        tid, xs, ys, label = (c.strip() for c in row)
        try:
            x, y = float(xs), float(ys)
        except ValueError:
            raise IngestError(f"{source}:{lineno}: coordinates must be numbers, got {xs!r}, {ys!r}") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise IngestError(f"{source}:{lineno}: non-finite coordinate")
        if label not in LABELS:
            raise IngestError(f"{source}:{lineno}: label must be 'r' or 'b', got {label!r}")
        if tid != cur_id:
            if tid in seen:
                raise IngestError(f"{source}:{lineno}: rows of traj_id {tid} are not contiguous")
            flush()
            seen.add(tid)
            ids.append(tid)
            cur_id, cur_label, cur_pts = tid, label, []
        elif label != cur_label:
            raise IngestError(f"{source}:{lineno}: traj_id {tid} has conflicting labels {cur_label!r} and {label!r}")
        cur_pts.append((x, y))
    flush()
    if not out:
        raise IngestError(f"{source}: no waypoints")
    return out, ids


def ingest(path: str | Path) -> tuple[TrajectoryDataset, IngestReport, list[str]]:
    """Read, validate and normalize a waypoint CSV.

    Returns the normalized dataset, a report in original coordinates and the
    original traj_id strings in dataset order.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        ts, ids = read_waypoints(fh, str(path))
    raw = TrajectoryDataset(tuple(ts))
    ds = normalize(raw)
    return ds, IngestReport(len(ds), raw.n_waypoints, raw.bbox()), ids


def write_waypoints(fh: TextIO, dataset: TrajectoryDataset, ids: Iterable[str] | None = None, original: bool = True) -> None:
    """Write a dataset as waypoint CSV, mapped back to original coordinates by default."""
    ids = list(ids) if ids is not None else [str(t.id) for t in dataset]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(HEADER)
    for tid, t in zip(ids, dataset):
        pts = dataset.transform.inverse(t.waypoints) if original else t.waypoints
        label = "r" if t.recorded else "b"
        for x, y in pts:
            w.writerow([tid, repr(float(x)), repr(float(y)), label])


def write_points(fh: TextIO, rows: Iterable[tuple[str, np.ndarray]]) -> None:
    """Coreset CSV: ``traj_id,x,y``."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["traj_id", "x", "y"])
    for tid, pts in rows:
        for x, y in pts:
            w.writerow([tid, repr(float(x)), repr(float(y))])
