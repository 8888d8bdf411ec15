"""Compiled inner loops for the sweep scanners.

Every kernel works on trajectory counters: ``traj`` maps each sample point
to a trajectory slot and ``t_r``/``t_b`` hold that trajectory's weights. A
trajectory's weights enter the running sums when its first point enters
the shape and leave when its last point leaves. Point-set semantics are
the special case of one point per slot.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

CLAMP = 1e-7
TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-12


@njit(cache=True)
def phi_value(code, r, b):
    if code & 1 and not r > b:
        return 0.0
    if code >= 2:
        rc = min(max(r, CLAMP), 1.0 - CLAMP)
        bc = min(max(b, CLAMP), 1.0 - CLAMP)
        return rc * math.log(rc / bc) + (1.0 - rc) * math.log((1.0 - rc) / (1.0 - bc))
    return abs(r - b)


@njit(cache=True)
def _fracs(run_r, run_b, r_total, b_total, bsign):
    r = run_r / r_total if r_total != 0.0 else 0.0
    b = bsign * run_b / b_total if b_total != 0.0 else 0.0
    return r, b


# ---------------------------------------------------------------- halfplanes


@njit(cache=True)
def halfplane_sweep(net_xy, s_xy, s_traj, t_r, t_b, r_total, b_total, bsign, code):
    """Rotate a closed halfplane about every net point.

    Returns (phi, net index, normal angle, r_frac, b_frac). A sample point at
    polar angle f around the pivot is inside for normal angles in
    [f + pi/2, f + 3pi/2].
    """
    ns = s_xy.shape[0]
    counts = np.zeros(t_r.shape[0], np.int64)
    ang = np.empty(2 * ns)
    kind = np.empty(2 * ns, np.int64)
    who = np.empty(2 * ns, np.int64)
    best = -1.0
    best_q = -1
    best_theta = 0.0
    best_r = 0.0
    best_b = 0.0
    half = 0.5 * math.pi
    for qi in range(net_xy.shape[0]):
        qx = net_xy[qi, 0]
        qy = net_xy[qi, 1]
        for j in range(ns):
            counts[s_traj[j]] = 0
        run_r = 0.0
        run_b = 0.0
        ne = 0
        for j in range(ns):
            dx = s_xy[j, 0] - qx
            dy = s_xy[j, 1] - qy
            t = s_traj[j]
            if dx == 0.0 and dy == 0.0:
                if counts[t] == 0:
                    run_r += t_r[t]
                    run_b += t_b[t]
                counts[t] += 1
                continue
            f = math.atan2(dy, dx)
            a_in = (f + half) % TWO_PI
            a_out = (f + 3.0 * half) % TWO_PI
            if a_in >= TWO_PI - ANGLE_TOL:
                a_in = 0.0
            if a_out >= TWO_PI - ANGLE_TOL:
                a_out = 0.0
            if a_in > a_out:
                if counts[t] == 0:
                    run_r += t_r[t]
                    run_b += t_b[t]
                counts[t] += 1
            ang[ne] = a_in
            kind[ne] = 0
            who[ne] = j
            ne += 1
            ang[ne] = a_out
            kind[ne] = 1
            who[ne] = j
            ne += 1
        if ne == 0:
            r, b = _fracs(run_r, run_b, r_total, b_total, bsign)
            v = phi_value(code, r, b)
            if v > best:
                best, best_q, best_theta, best_r, best_b = v, qi, 0.0, r, b
            continue
        order = np.argsort(ang[:ne])
        first = ang[order[0]]
        last = ang[order[ne - 1]]
        theta0 = ((first + last + TWO_PI) * 0.5) % TWO_PI
        r, b = _fracs(run_r, run_b, r_total, b_total, bsign)
        v = phi_value(code, r, b)
        if v > best:
            best, best_q, best_theta, best_r, best_b = v, qi, theta0, r, b
        g = 0
        while g < ne:
            a0 = ang[order[g]]
            h = g
            while h < ne and ang[order[h]] - a0 <= ANGLE_TOL:
                h += 1
            for e in range(g, h):
                k = order[e]
                if kind[k] == 0:
                    t = s_traj[who[k]]
                    if counts[t] == 0:
                        run_r += t_r[t]
                        run_b += t_b[t]
                    counts[t] += 1
            r, b = _fracs(run_r, run_b, r_total, b_total, bsign)
            v = phi_value(code, r, b)
            if v > best:
                best, best_q, best_theta, best_r, best_b = v, qi, a0, r, b
            for e in range(g, h):
                k = order[e]
                if kind[k] == 1:
                    t = s_traj[who[k]]
                    counts[t] -= 1
                    if counts[t] == 0:
                        run_r -= t_r[t]
                        run_b -= t_b[t]
            if h < ne:
                mid = 0.5 * (ang[order[h - 1]] + ang[order[h]])
                r, b = _fracs(run_r, run_b, r_total, b_total, bsign)
                v = phi_value(code, r, b)
                if v > best:
                    best, best_q, best_theta, best_r, best_b = v, qi, mid, r, b
            g = h
    return best, best_q, best_theta, best_r, best_b


# --------------------------------------------------------------------- disks


@njit(cache=True)
def _interval_rep(lo, hi, t_min, t_max):
    """A parameter strictly inside (lo, hi) with t_min <= |t| <= t_max, or nan."""
    for piece in range(2):
        if piece == 0:
            pl = -t_max
            pu = -t_min
        else:
            pl = t_min
            pu = t_max
        a = max(lo, pl)
        c = min(hi, pu)
        if a < c:
            if math.isinf(a) and math.isinf(c):
                return 0.0 if t_min == 0.0 else t_min + 1.0
            if math.isinf(a):
                return c - max(1.0, abs(c))
            if math.isinf(c):
                return a + max(1.0, abs(a))
            return 0.5 * (a + c)
        if a == c and lo < a and a < hi:
            return a
    return math.nan


@njit(cache=True)
def disk_pair_sweep(qx, qy, px, py, s_xy, s_idx, n_idx, s_traj, t_r, t_b, counts,
                    r_total, b_total, bsign, code, r_min, r_max, tau, kind, who, best):
    """Sweep the pencil of closed disks whose boundary passes through q and p.

    The center moves along the bisector, c(t) = q + (p - q)/2 + t u. A sample
    point x is inside iff A_x t <= B_x, so each point contributes one
    threshold event. ``best`` holds (phi, cx, cy, radius, r, b) and is updated
    in place; counters are restored to zero on return.
    """
    vx = px - qx
    vy = py - qy
    d2 = vx * vx + vy * vy
    if d2 == 0.0:
        return
    h2 = 0.25 * d2
    if r_max * r_max < h2 * (1.0 - 1e-12):
        return
    t_min = math.sqrt(max(0.0, r_min * r_min - h2))
    t_max = math.sqrt(max(0.0, r_max * r_max - h2)) if not math.isinf(r_max) else math.inf
    norm = math.sqrt(d2)
    ux = -vy / norm
    uy = vx / norm
    mx = 0.5 * vx
    my = 0.5 * vy
    run_r = 0.0
    run_b = 0.0
    far = t_max + 1e-9 * (1.0 + t_max)
    ne = 0
    for e in range(n_idx):
        j = s_idx[e]
        xx = s_xy[j, 0] - qx
        xy_ = s_xy[j, 1] - qy
        t = s_traj[j]
        A = -2.0 * (xx * (-vy) + xy_ * vx) / norm
        B = 2.0 * (xx * mx + xy_ * my) - (xx * xx + xy_ * xy_)
        if A == 0.0:
            if B >= -1e-15:
                if counts[t] == 0:
                    run_r += t_r[t]
                    run_b += t_b[t]
                counts[t] += 1
            continue
        tt = B / A
        # thresholds past the radius window only fix the point's state
        if A > 0.0:
            if tt < -far:
                continue
            if counts[t] == 0:
                run_r += t_r[t]
                run_b += t_b[t]
            counts[t] += 1
            if tt > far:
                continue
            kind[ne] = 1
        else:
            if tt > far:
                continue
            if tt < -far:
                if counts[t] == 0:
                    run_r += t_r[t]
                    run_b += t_b[t]
                counts[t] += 1
                continue
            kind[ne] = 0
        tau[ne] = tt
        who[ne] = t
        ne += 1
    r_lo2 = r_min * r_min * (1.0 - 1e-12)
    r_hi2 = r_max * r_max * (1.0 + 1e-12)
    order = np.argsort(tau[:ne])
    lo = -math.inf
    hi = tau[order[0]] if ne > 0 else math.inf
    rep = _interval_rep(lo, hi, t_min, t_max)
    if not math.isnan(rep):
        r, b = _fracs(run_r, run_b, r_total, b_total, bsign)
        v = phi_value(code, r, b)
        if v > best[0]:
            best[0] = v
            best[1] = qx + mx + rep * ux
            best[2] = qy + my + rep * uy
            best[3] = math.sqrt(h2 + rep * rep)
            best[4] = r
            best[5] = b
    g = 0
    while g < ne:
        t0 = tau[order[g]]
        h = g
        tol = 1e-12 * max(1.0, abs(t0))
        while h < ne and tau[order[h]] - t0 <= tol:
            h += 1
        for e in range(g, h):
            k = order[e]
            if kind[k] == 0:
                t = who[k]
                if counts[t] == 0:
                    run_r += t_r[t]
                    run_b += t_b[t]
                counts[t] += 1
        rad2 = h2 + t0 * t0
        if rad2 >= r_lo2 and rad2 <= r_hi2:
            r, b = _fracs(run_r, run_b, r_total, b_total, bsign)
            v = phi_value(code, r, b)
            if v > best[0]:
                best[0] = v
                best[1] = qx + mx + t0 * ux
                best[2] = qy + my + t0 * uy
                best[3] = math.sqrt(rad2)
                best[4] = r
                best[5] = b
        for e in range(g, h):
            k = order[e]
            if kind[k] == 1:
                t = who[k]
                counts[t] -= 1
                if counts[t] == 0:
                    run_r -= t_r[t]
                    run_b -= t_b[t]
        lo = tau[order[h - 1]]
        hi = tau[order[h]] if h < ne else math.inf
        rep = _interval_rep(lo, hi, t_min, t_max)
        if not math.isnan(rep):
            r, b = _fracs(run_r, run_b, r_total, b_total, bsign)
            v = phi_value(code, r, b)
            if v > best[0]:
                best[0] = v
                best[1] = qx + mx + rep * ux
                best[2] = qy + my + rep * uy
                best[3] = math.sqrt(h2 + rep * rep)
                best[4] = r
                best[5] = b
        g = h
    for e in range(n_idx):
        counts[s_traj[s_idx[e]]] = 0


@njit(cache=True)
def _cross(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


@njit(cache=True)
def hull_prune(qx, qy, s_xy, s_traj, s_idx, n_idx, out):
    """Keep, per trajectory, the points whose inversion about q is a hull vertex.

    Disks through q become halfplanes after the inversion w = x'/|x'|^2, so a
    trajectory meets such a disk iff one of these vertices does. Points equal
    to q are always kept. Writes kept indices to ``out`` and returns the count.
    """
    if n_idx == 0:
        return 0
    trajs = np.empty(n_idx, np.int64)
    for e in range(n_idx):
        trajs[e] = s_traj[s_idx[e]]
    order = np.argsort(trajs, kind="mergesort")
    wx = np.empty(n_idx)
    wy = np.empty(n_idx)
    n_out = 0
    g = 0
    while g < n_idx:
        h = g
        tg = trajs[order[g]]
        while h < n_idx and trajs[order[h]] == tg:
            h += 1
        m = 0
        grp = np.empty(h - g, np.int64)
        for e in range(g, h):
            j = s_idx[order[e]]
            dx = s_xy[j, 0] - qx
            dy = s_xy[j, 1] - qy
            r2 = dx * dx + dy * dy
            if r2 == 0.0:
                out[n_out] = j
                n_out += 1
                continue
            wx[m] = dx / r2
            wy[m] = dy / r2
            grp[m] = j
            m += 1
        if m <= 3:
            for e in range(m):
                out[n_out] = grp[e]
                n_out += 1
            g = h
            continue
        # monotone chain over (wx, wy)
        keys = np.empty(m)
        for e in range(m):
            keys[e] = wy[e]
        o1 = np.argsort(keys, kind="mergesort")
        keys2 = np.empty(m)
        for e in range(m):
            keys2[e] = wx[o1[e]]
        o2 = np.argsort(keys2, kind="mergesort")
        srt = np.empty(m, np.int64)
        for e in range(m):
            srt[e] = o1[o2[e]]
        hull = np.empty(2 * m + 1, np.int64)
        k = 0
        for e in range(m):
            c = srt[e]
            while k >= 2 and _cross(wx[hull[k - 2]], wy[hull[k - 2]], wx[hull[k - 1]], wy[hull[k - 1]], wx[c], wy[c]) <= 0.0:
                k -= 1
            hull[k] = c
            k += 1
        lower = k + 1
        for e in range(m - 2, -1, -1):
            c = srt[e]
            while k >= lower and _cross(wx[hull[k - 2]], wy[hull[k - 2]], wx[hull[k - 1]], wy[hull[k - 1]], wx[c], wy[c]) <= 0.0:
                k -= 1
            hull[k] = c
            k += 1
        kept = np.zeros(m, np.bool_)
        for e in range(k):
            kept[hull[e]] = True
        for e in range(m):
            if kept[e]:
                out[n_out] = grp[e]
                n_out += 1
        g = h
    return n_out


@njit(cache=True)
def disk_scan_all(net_xy, s_xy, s_traj, t_r, t_b, r_total, b_total, bsign, code, r_min, r_max, use_hull):
    """Disks through every pair of net points, evaluated on every sample point."""
    nn = net_xy.shape[0]
    ns = s_xy.shape[0]
    counts = np.zeros(t_r.shape[0], np.int64)
    tau = np.empty(ns)
    kind = np.empty(ns, np.int64)
    who = np.empty(ns, np.int64)
    all_idx = np.arange(ns)
    pruned = np.empty(ns, np.int64)
    best = np.zeros(6)
    best[0] = -1.0
    for qi in range(nn):
        qx = net_xy[qi, 0]
        qy = net_xy[qi, 1]
        if use_hull:
            n_idx = hull_prune(qx, qy, s_xy, s_traj, all_idx, ns, pruned)
            idx = pruned
        else:
            n_idx = ns
            idx = all_idx
        for pj in range(qi + 1, nn):
            disk_pair_sweep(qx, qy, net_xy[pj, 0], net_xy[pj, 1], s_xy, idx, n_idx, s_traj, t_r, t_b, counts,
                            r_total, b_total, bsign, code, r_min, r_max, tau, kind, who, best)
    return best


@njit(cache=True)
def _gather_cells(sorted_ids, cx, cy, n_cells, reach, out, dist_q, qx, qy, xy, order, max_d):
    """Indices (into the original arrays) of points in cells within ``reach`` of (cx, cy).

    ``sorted_ids``/``order`` give points sorted by cell id. With max_d > 0
    points farther than max_d from (qx, qy) are dropped.
    """
    n = 0
    for dy in range(-reach, reach + 1):
        yy = cy + dy
        if yy < 0 or yy >= n_cells:
            continue
        lo_id = yy * n_cells + max(cx - reach, 0)
        hi_id = yy * n_cells + min(cx + reach, n_cells - 1)
        a = np.searchsorted(sorted_ids, lo_id, side="left")
        b = np.searchsorted(sorted_ids, hi_id, side="right")
        for e in range(a, b):
            j = order[e]
            if dist_q:
                dx = xy[j, 0] - qx
                dy2 = xy[j, 1] - qy
                if dx * dx + dy2 * dy2 > max_d * max_d:
                    continue
            out[n] = j
            n += 1
    return n


@njit(cache=True)
def disk_scan_grid(net_xy, s_xy, s_traj, t_r, t_b, r_total, b_total, bsign, code,
                   cell, r_lo, r_hi, reach, exact, use_hull):
    """One radius subrange of the multi-scale disk scan.

    Pivots are visited cell by cell in row-major order; second boundary
    points and sample points come from cells within ``reach`` of the pivot's
    cell. With ``exact`` the sample points are additionally limited to the
    disk of radius 2*r_hi around the pivot, which contains every candidate.
    Returns (best, number of pivot pairs swept).
    """
    n_cells = int(math.ceil(1.0 / cell)) + 1
    nn = net_xy.shape[0]
    ns = s_xy.shape[0]
    net_cx = np.empty(nn, np.int64)
    net_cy = np.empty(nn, np.int64)
    net_id = np.empty(nn, np.int64)
    for i in range(nn):
        net_cx[i] = min(max(int(math.floor(net_xy[i, 0] / cell)), 0), n_cells - 1)
        net_cy[i] = min(max(int(math.floor(net_xy[i, 1] / cell)), 0), n_cells - 1)
        net_id[i] = net_cy[i] * n_cells + net_cx[i]
    s_id = np.empty(ns, np.int64)
    for j in range(ns):
        cx = min(max(int(math.floor(s_xy[j, 0] / cell)), 0), n_cells - 1)
        cy = min(max(int(math.floor(s_xy[j, 1] / cell)), 0), n_cells - 1)
        s_id[j] = cy * n_cells + cx
    net_order = np.argsort(net_id, kind="mergesort")
    net_sorted = net_id[net_order]
    s_order = np.argsort(s_id, kind="mergesort")
    s_sorted = s_id[s_order]

    counts = np.zeros(t_r.shape[0], np.int64)
    cand = np.empty(nn, np.int64)
    idx = np.empty(ns, np.int64)
    pruned = np.empty(ns, np.int64)
    tau = np.empty(ns)
    kind = np.empty(ns, np.int64)
    who = np.empty(ns, np.int64)
    best = np.zeros(6)
    best[0] = -1.0
    pairs = 0
    reach_d = 2.0 * r_hi
    e = 0
    while e < nn:
        cid = net_sorted[e]
        f = e
        while f < nn and net_sorted[f] == cid:
            f += 1
        q0 = net_order[e]
        cx = net_cx[q0]
        cy = net_cy[q0]
        n_cand = _gather_cells(net_sorted, cx, cy, n_cells, reach, cand, False, 0.0, 0.0, net_xy, net_order, 0.0)
        n_block = 0
        if not exact:
            n_block = _gather_cells(s_sorted, cx, cy, n_cells, reach, idx, False, 0.0, 0.0, s_xy, s_order, 0.0)
        for pe in range(e, f):
            qi = net_order[pe]
            qx = net_xy[qi, 0]
            qy = net_xy[qi, 1]
            if exact:
                n_idx = _gather_cells(s_sorted, cx, cy, n_cells, reach, idx, True, qx, qy, s_xy, s_order, reach_d)
            else:
                n_idx = n_block
            use = idx
            if use_hull:
                n_idx = hull_prune(qx, qy, s_xy, s_traj, idx, n_idx, pruned)
                use = pruned
            for c in range(n_cand):
                pj = cand[c]
                if pj <= qi:
                    continue
                dx = net_xy[pj, 0] - qx
                dy = net_xy[pj, 1] - qy
                if dx * dx + dy * dy > reach_d * reach_d * (1.0 + 1e-12):
                    continue
                pairs += 1
                disk_pair_sweep(qx, qy, net_xy[pj, 0], net_xy[pj, 1], s_xy, use, n_idx, s_traj, t_r, t_b, counts,
                                r_total, b_total, bsign, code, r_lo, r_hi, tau, kind, who, best)
        e = f
    return best, pairs


# ---------------------------------------------------------------- rectangles


@njit(cache=True)
def _slot(lines, v):
    """Slot 2i for v on line i, 2i+1 strictly between lines i and i+1, -1 outside."""
    g = lines.shape[0]
    i = np.searchsorted(lines, v, side="right") - 1
    if i < 0:
        return -1
    if lines[i] == v:
        return 2 * i
    if i == g - 1:
        return -1
    return 2 * i + 1


@njit(cache=True)
def slots(lines, vals):
    out = np.empty(vals.shape[0], np.int64)
    for k in range(vals.shape[0]):
        out[k] = _slot(lines, vals[k])
    return out


@njit(cache=True)
def rect_scan_points(X, Y, xs, ys, w_r, w_b, r_total, b_total, bsign, code, max_side):
    """Exhaustive grid-rectangle scan with additive point weights.

    Returns (phi, i, j, a, b, r, b) for the rectangle [X_i, X_j] x [Y_a, Y_b].
    """
    gx = X.shape[0]
    gy = Y.shape[0]
    n = xs.shape[0]
    nxs = 2 * gx - 1
    nys = 2 * gy - 1
    # bucket points by y slot
    ycount = np.zeros(nys + 1, np.int64)
    for k in range(n):
        ycount[ys[k] + 1] += 1
    for s in range(nys):
        ycount[s + 1] += ycount[s]
    yorder = np.empty(n, np.int64)
    fill = ycount[:-1].copy()
    for k in range(n):
        yorder[fill[ys[k]]] = k
        fill[ys[k]] += 1
    col_r = np.zeros(nxs)
    col_b = np.zeros(nxs)
    best = np.empty(7)
    best[0] = -1.0
    for a in range(gy):
        col_r[:] = 0.0
        col_b[:] = 0.0
        for bt in range(a, gy):
            if Y[bt] - Y[a] > max_side:
                break
            lo_s = 2 * bt - 1 if bt > a else 2 * bt
            for s in range(lo_s, 2 * bt + 1):
                for e in range(ycount[s], ycount[s + 1]):
                    k = yorder[e]
                    col_r[xs[k]] += w_r[k]
                    col_b[xs[k]] += w_b[k]
            for i in range(gx):
                run_r = 0.0
                run_b = 0.0
                for j in range(i, gx):
                    if X[j] - X[i] > max_side:
                        break
                    if j > i:
                        run_r += col_r[2 * j - 1]
                        run_b += col_b[2 * j - 1]
                    run_r += col_r[2 * j]
                    run_b += col_b[2 * j]
                    r, b = _fracs(run_r, run_b, r_total, b_total, bsign)
                    v = phi_value(code, r, b)
                    if v > best[0]:
                        best[0] = v
                        best[1] = i
                        best[2] = j
                        best[3] = a
                        best[4] = bt
                        best[5] = r
                        best[6] = b
    return best


@njit(cache=True)
def rect_scan_full(X, Y, xs, ys, s_traj, t_r, t_b, r_total, b_total, bsign, code, max_side):
    """Grid-rectangle scan with per-trajectory counters; same return layout as rect_scan_points."""
    gx = X.shape[0]
    gy = Y.shape[0]
    n = xs.shape[0]
    nxs = 2 * gx - 1
    counts = np.zeros(t_r.shape[0], np.int64)
    active = np.zeros(n, np.bool_)
    xcount = np.zeros(nxs + 1, np.int64)
    xorder = np.empty(n, np.int64)
    best = np.empty(7)
    best[0] = -1.0
    for a in range(gy):
        active[:] = False
        for bt in range(a, gy):
            if Y[bt] - Y[a] > max_side:
                break
            lo_s = 2 * bt - 1 if bt > a else 2 * bt
            for k in range(n):
                if ys[k] >= lo_s and ys[k] <= 2 * bt:
                    active[k] = True
            # counting sort of active points by x slot
            xcount[:] = 0
            for k in range(n):
                if active[k]:
                    xcount[xs[k] + 1] += 1
            for s in range(nxs):
                xcount[s + 1] += xcount[s]
            fill = xcount[:-1].copy()
            for k in range(n):
                if active[k]:
                    xorder[fill[xs[k]]] = k
                    fill[xs[k]] += 1
            for i in range(gx):
                run_r = 0.0
                run_b = 0.0
                jmax = i
                for j in range(i, gx):
                    if X[j] - X[i] > max_side:
                        break
                    jmax = j
                    lo_x = 2 * j - 1 if j > i else 2 * j
                    for e in range(xcount[lo_x], xcount[2 * j + 1]):
                        t = s_traj[xorder[e]]
                        if counts[t] == 0:
                            run_r += t_r[t]
                            run_b += t_b[t]
                        counts[t] += 1
                    r, b = _fracs(run_r, run_b, r_total, b_total, bsign)
                    v = phi_value(code, r, b)
                    if v > best[0]:
                        best[0] = v
                        best[1] = i
                        best[2] = j
                        best[3] = a
                        best[4] = bt
                        best[5] = r
                        best[6] = b
                for e in range(xcount[2 * i], xcount[2 * jmax + 1]):
                    counts[s_traj[xorder[e]]] = 0
    return best
