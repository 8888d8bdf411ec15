"""Slow, obviously-correct reference implementations used as test oracles."""

import itertools
import math

import numpy as np

from trajscan.discrepancy import DiscrepancyFn
from trajscan.geom import Disk, Halfplane, Rect, contains_points


def brute_hull(points):
    """Extreme points by the O(n^3) test: p is extreme iff it is not inside any triangle or segment of others."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    out = []
    for i, p in enumerate(pts):
        others = np.delete(pts, i, axis=0)
        extreme = True
        for a, b, c in itertools.combinations(range(len(others)), 3):
            if _in_triangle(p, others[a], others[b], others[c]):
                extreme = False
                break
        if extreme:
            for a, b in itertools.combinations(range(len(others)), 2):
                if _on_segment(p, others[a], others[b]):
                    extreme = False
                    break
        if extreme:
            out.append(tuple(p))
    return sorted(out)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _in_triangle(p, a, b, c):
    if _cross(a, b, c) == 0:
        # degenerate triangles are covered by the segment test
        return False
    d1, d2, d3 = _cross(a, b, p), _cross(b, c, p), _cross(c, a, p)
    neg = d1 < 0 or d2 < 0 or d3 < 0
    pos = d1 > 0 or d2 > 0 or d3 > 0
    return not (neg and pos)


def _on_segment(p, a, b):
    if abs(_cross(a, b, p)) > 1e-15:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def point_phi(shape, xy, r, b, r_total, b_total, fn: DiscrepancyFn) -> float:
    inside = contains_points(shape, xy)
    return fn(float(r[inside].sum()) / r_total, float(b[inside].sum()) / b_total)


def full_phi(shape, xy, traj, t_r, t_b, r_total, b_total, fn: DiscrepancyFn) -> float:
    inside = contains_points(shape, xy)
    hit = np.unique(traj[inside])
    return fn(float(t_r[hit].sum()) / r_total, float(t_b[hit].sum()) / b_total)


def halfplanes_through_pairs(xy):
    """Every closed halfplane whose boundary passes through two of the points, both orientations,
    plus tiny rotations about each point so that each side of every pair is reachable."""
    out = []
    n = len(xy)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            d = xy[j] - xy[i]
            if not d.any():
                continue
            base = math.atan2(d[1], d[0]) + math.pi / 2
            for tilt in (-1e-7, 0.0, 1e-7):
                for flip in (0.0, math.pi):
                    out.append(Halfplane.from_angle(base + tilt + flip, xy[i]))
    return out


def disks_through_triples(xy, r_min=0.0, r_max=math.inf):
    """Circumcircles of all non-collinear triples, plus diametral disks of all pairs."""
    out = []
    n = len(xy)
    for i, j in itertools.combinations(range(n), 2):
        c = (xy[i] + xy[j]) / 2
        rad = float(np.hypot(*(xy[i] - xy[j]))) / 2
        if rad > 0 and r_min <= rad <= r_max:
            out.append(Disk((c[0], c[1]), rad))
    for i, j, k in itertools.combinations(range(n), 3):
        a, b, c = xy[i], xy[j], xy[k]
        d = 2 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
        if abs(d) < 1e-12:
            continue
        ux = ((a @ a) * (b[1] - c[1]) + (b @ b) * (c[1] - a[1]) + (c @ c) * (a[1] - b[1])) / d
        uy = ((a @ a) * (c[0] - b[0]) + (b @ b) * (a[0] - c[0]) + (c @ c) * (b[0] - a[0])) / d
        rad = float(np.hypot(a[0] - ux, a[1] - uy))
        if r_min <= rad <= r_max:
            out.append(Disk((ux, uy), rad))
    return out


def grid_rects(xs, ys):
    xs = np.unique(xs)
    ys = np.unique(ys)
    out = []
    for i in range(len(xs)):
        for j in range(i, len(xs)):
            for a in range(len(ys)):
                for b in range(a, len(ys)):
                    out.append(Rect(xs[i], xs[j], ys[a], ys[b]))
    return out


# coreset families with a deterministic alpha-guarantee, as (tag, family) pairs
GUARANTEED = [
    ("even", "disk"),
    ("even", "rect"),
    ("even", "halfplane"),
    ("gridding", "disk"),
    ("gridding", "rect"),
    ("gridding", "halfplane"),
    ("random", "disk"),
    ("random", "rect"),
    ("random", "halfplane"),
    ("dp", "halfplane"),
    ("hull", "halfplane"),
    ("approx_hull", "halfplane"),
    ("grid_kernel", "disk"),
]


def walk(rng, m_lo=2, m_hi=12, step=0.12):
    m = int(rng.integers(m_lo, m_hi + 1))
    start = rng.uniform(0.2, 0.8, 2)
    w = start + np.vstack([np.zeros(2), np.cumsum(rng.normal(0.0, step, (m - 1, 2)), axis=0)])
    return np.clip(w, 0.0, 1.0)


def deep_shape(rng, family, x, alpha, r_min=0.0):
    """A random shape whose alpha-shrunk copy still contains the point x."""
    if family == "disk":
        R = float(rng.uniform(max(r_min, 1.05 * alpha), max(r_min, 1.05 * alpha) + 0.3))
        off = rng.uniform(0.0, R - alpha)
        th = rng.uniform(0, 2 * math.pi)
        return Disk((x[0] + off * math.cos(th), x[1] + off * math.sin(th)), R)
    if family == "rect":
        lo = x - alpha - rng.uniform(0, 0.2, 2)
        hi = x + alpha + rng.uniform(0, 0.2, 2)
        return Rect(lo[0], hi[0], lo[1], hi[1])
    th = rng.uniform(0, 2 * math.pi)
    h = Halfplane.from_angle(th, x)
    return Halfplane(h.normal, h.offset + alpha + float(rng.uniform(0, 0.2)))


def random_shape(rng, family, r_min=0.0):
    if family == "disk":
        return Disk(tuple(rng.uniform(-0.2, 1.2, 2)), float(rng.uniform(max(r_min, 0.01), max(r_min, 0.01) + 0.3)))
    if family == "rect":
        a, b = np.sort(rng.uniform(-0.1, 1.1, 2)), np.sort(rng.uniform(-0.1, 1.1, 2))
        return Rect(a[0], a[1], b[0], b[1])
    return Halfplane.from_angle(rng.uniform(0, 2 * math.pi), rng.uniform(-0.2, 1.2, 2))


def near_miss_shape(rng, family, w, alpha, r_min=0.0):
    """A shape that just misses the polyline w (gap below alpha), or None."""
    from trajscan.trajectory import Trajectory

    gap = float(rng.uniform(0.0, alpha))
    if family == "halfplane":
        th = rng.uniform(0, 2 * math.pi)
        u = np.array([math.cos(th), math.sin(th)])
        top = float((w @ u).max())
        return Halfplane((-u[0], -u[1]), -(top + gap + 1e-9))
    if family == "rect":
        hi_x = float(w[:, 0].max())
        lo = rng.uniform(-0.1, 1.1)
        return Rect(hi_x + gap + 1e-9, hi_x + gap + 0.3, min(lo, lo + 0.2), lo + 0.2)
    t = Trajectory(0, w)
    s = t.at_arclength(np.linspace(0.0, t.arclength, 4001))
    # start from a curve point and move outward until the disk just misses
    y = t.at_arclength(rng.uniform(0.0, t.arclength))
    th = rng.uniform(0, 2 * math.pi)
    R = float(rng.uniform(max(r_min, 0.01), max(r_min, 0.01) + 0.3))
    c = y + (R + gap + 1e-6) * np.array([math.cos(th), math.sin(th)])
    d = float(np.hypot(*(s - c).T).min())
    if d <= 1e-6:
        return None
    R = min(R, d - 1e-6)
    if R < max(r_min, 1e-6):
        return None
    return Disk((c[0], c[1]), R)


def safe_shrink(shape, d):
    """Shape shrunk inward by d, or None if nothing is left."""
    try:
        return shape.shrink(d)
    except ValueError:
        return None


def alpha_trial(tag, family, seed, alpha=None):
    """One seeded (trajectory, shape) trial.

    Returns (false_positive, missed_deep, fp_checked, deep_checked); the last
    two say whether each condition was actually exercised.
    """
    from trajscan.coreset import CoresetMethod, simplify
    from trajscan.geom import trajectory_intersects
    from trajscan.trajectory import Trajectory

    rng = np.random.default_rng([seed, 7])
    if alpha is None:
        alpha = float(rng.uniform(0.01, 0.05))
    t = Trajectory(0, walk(rng))
    r_min = float(rng.uniform(2 * alpha, 0.2)) if tag == "grid_kernel" else 0.0
    method = CoresetMethod(tag, alpha=alpha, r=r_min if tag == "grid_kernel" else None)
    pts = simplify(t, method, np.random.default_rng([seed, 11]))

    # condition 1, alternately on an arbitrary shape and on a near miss
    if seed % 2:
        shape = random_shape(rng, family, r_min)
    else:
        shape = near_miss_shape(rng, family, t.waypoints, alpha, r_min) or random_shape(rng, family, r_min)
    probe = safe_shrink(shape, alpha / 2) if tag == "gridding" else shape
    fp = fp_checked = False
    if not trajectory_intersects(t.waypoints, shape) and probe is not None:
        fp_checked = True
        fp = bool(contains_points(probe, pts).any())

    # condition 2 on a shape built around a random curve point
    x = t.at_arclength(rng.uniform(0.0, t.arclength))
    deep = deep_shape(rng, family, x, alpha, r_min)
    shrunk = safe_shrink(deep, alpha)
    missed = deep_checked = False
    if shrunk is not None and trajectory_intersects(t.waypoints, shrunk):
        deep_checked = True
        missed = not bool(contains_points(deep, pts).any())
    return fp, missed, fp_checked, deep_checked


def pencil_disks(net_xy, sample_xy, r_min=0.0, r_max=math.inf):
    """Every combinatorially distinct closed disk through two net points with radius in the window.

    The disks through q1, q2 have centers m + tau * u on the bisector. Each
    sample point switches membership at one tau; the candidates are those
    switch values, the window ends, and one tau inside every gap.
    """
    out = []
    n = len(net_xy)
    for i in range(n):
        for j in range(i + 1, n):
            q1, q2 = net_xy[i], net_xy[j]
            d = q2 - q1
            h = float(np.hypot(*d)) / 2
            if h == 0 or h > r_max:
                continue
            m = (q1 + q2) / 2
            u = np.array([-d[1], d[0]]) / (2 * h)
            t_lo = math.sqrt(max(r_min**2 - h * h, 0.0))
            t_hi = math.sqrt(r_max**2 - h * h) if math.isfinite(r_max) else math.inf

            def ok(t):
                return t_lo <= abs(t) <= t_hi

            taus = []
            for p in sample_xy:
                w = p - m
                den = 2 * float(u @ w)
                if den != 0:
                    taus.append((float(w @ w) - h * h) / den)
            span = max([abs(t) for t in taus], default=0.0) + 1.0
            cand = [t for t in taus if ok(t)]
            for t in (t_lo, -t_lo, t_hi, -t_hi, span, -span):
                if math.isfinite(t) and ok(t):
                    cand.append(t)
            cand = sorted(set(cand))
            cand += [(a + b) / 2 for a, b in zip(cand, cand[1:]) if ok((a + b) / 2)]
            for t in cand:
                c = m + t * u
                out.append(Disk((c[0], c[1]), math.sqrt(h * h + t * t)))
    return out


def pivot_halfplanes(net_xy, sample_xy):
    """Every combinatorially distinct closed halfplane whose boundary passes through a net point."""
    out = []
    for q in net_xy:
        angles = [0.0]
        for p in sample_xy:
            d = p - q
            if d.any():
                base = math.atan2(d[1], d[0]) + math.pi / 2
                angles += [base, base + math.pi]
        for a in angles:
            for tilt in (-1e-7, 0.0, 1e-7):
                out.append(Halfplane.from_angle(a + tilt, q))
    return out


def traj_weights(sample):
    """Per-trajectory (r, b) arrays for full-model oracles."""
    n_t = int(sample.traj.max()) + 1
    t_r = np.zeros(n_t)
    t_b = np.zeros(n_t)
    t_r[sample.traj] = sample.r
    t_b[sample.traj] = sample.b
    return t_r, t_b


def best_phi(shapes, score):
    return max((score(s) for s in shapes), default=0.0)
