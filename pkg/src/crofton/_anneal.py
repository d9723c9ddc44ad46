"""Compiled Metropolis chain over polyline configurations.

The evaluation panel is sorted into angular bins and by offset inside each bin, so the
lines crossing an edge are found by two binary searches per bin plus an exact test on the
candidates.  Moves only touch the edges they change and the count variance is updated from
the per-line count deltas.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from ._kernels import segment_crossing

DISK, POLYGON, ELLIPSE = 0, 1, 2
MOVE_PERTURB, MOVE_SPLIT, MOVE_DELETE, MOVE_TRANSLATE = 0, 1, 2, 3
CONTAIN_TOL = 1e-9
CROSS_EPS = 1e-12


# ---------------------------------------------------------------------------
# domain predicates (coordinates already shifted to the domain reference point)


@njit(cache=True)
def contains(x, y, kind, dpar, hn, ho, tol):
    if kind == DISK:
        return math.hypot(x - dpar[0], y - dpar[1]) <= dpar[2] + tol
    if kind == POLYGON:
        for i in range(hn.shape[0]):
            if hn[i, 0] * x + hn[i, 1] * y - ho[i] > tol:
                return False
        return True
    c = math.cos(dpar[4])
    s = math.sin(dpar[4])
    dx = x - dpar[0]
    dy = y - dpar[1]
    lx = c * dx + s * dy
    ly = -s * dx + c * dy
    q = math.sqrt((lx / dpar[2]) ** 2 + (ly / dpar[3]) ** 2)
    return (q - 1.0) * min(dpar[2], dpar[3]) <= tol


@njit(cache=True)
def _ellipse_nearest(a, b, x, y):
    sx = 1.0 if x >= 0 else -1.0
    sy = 1.0 if y >= 0 else -1.0
    x = abs(x)
    y = abs(y)
    lo = 0.0
    hi = max(a, b) * math.hypot(x, y) + max(a, b) ** 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g = (a * x / (mid + a * a)) ** 2 + (b * y / (mid + b * b)) ** 2 - 1.0
        if g > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, hi):
            break
    t = 0.5 * (lo + hi)
    return sx * a * a * x / (t + a * a), sy * b * b * y / (t + b * b)


@njit(cache=True)
def project(x, y, kind, dpar, poly, hn, ho):
    """Nearest point of the closed domain."""
    if contains(x, y, kind, dpar, hn, ho, 0.0):
        return x, y
    if kind == DISK:
        dx = x - dpar[0]
        dy = y - dpar[1]
        r = math.hypot(dx, dy)
        return dpar[0] + dx * dpar[2] / r, dpar[1] + dy * dpar[2] / r
    if kind == POLYGON:
        best = np.inf
        bx = x
        by = y
        m = poly.shape[0]
        for i in range(m):
            ax = poly[i, 0]
            ay = poly[i, 1]
            ex = poly[(i + 1) % m, 0] - ax
            ey = poly[(i + 1) % m, 1] - ay
            t = ((x - ax) * ex + (y - ay) * ey) / (ex * ex + ey * ey)
            t = min(max(t, 0.0), 1.0)
            px = ax + t * ex
            py = ay + t * ey
            d = math.hypot(px - x, py - y)
            if d < best:
                best = d
                bx = px
                by = py
        return bx, by
    c = math.cos(dpar[4])
    s = math.sin(dpar[4])
    dx = x - dpar[0]
    dy = y - dpar[1]
    lx, ly = _ellipse_nearest(dpar[2], dpar[3], c * dx + s * dy, -s * dx + c * dy)
    return dpar[0] + c * lx - s * ly, dpar[1] + s * lx + c * ly


# ---------------------------------------------------------------------------
# panel queries


@njit(cache=True)
def _lower(arr, lo, hi, value):
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < value:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True)
def edge_lines(ax, ay, bx, by, lc, ls, lp, bin_ptr, bin_c, bin_s, half_width, out, n_out):
    """Append to ``out`` the panel lines crossing edge AB; return the new fill level."""
    margin = max(math.hypot(ax, ay), math.hypot(bx, by)) * half_width + 2 * CROSS_EPS
    for b in range(bin_c.shape[0]):
        pa = ax * bin_c[b] + ay * bin_s[b]
        pb = bx * bin_c[b] + by * bin_s[b]
        lo = min(pa, pb) - margin
        hi = max(pa, pb) + margin
        j = _lower(lp, bin_ptr[b], bin_ptr[b + 1], lo)
        end = bin_ptr[b + 1]
        while j < end and lp[j] <= hi:
            if segment_crossing(ax, ay, bx, by, lc[j], ls[j], lp[j], CROSS_EPS) == 1:
                out[n_out] = j
                n_out += 1
            j += 1
    return n_out


@njit(cache=True)
def separating_lines(vx, vy, wx, wy, lc, ls, lp, bin_ptr, bin_c, bin_s, half_width, out):
    """Panel lines that do not keep V and W strictly on one side (beyond the tie tolerance).

    Moving a vertex from V to W with its neighbours fixed can only change the counts of
    these lines, since every crossing decision depends on endpoint sides alone.
    """
    tol = 2 * CROSS_EPS
    margin = max(math.hypot(vx, vy), math.hypot(wx, wy)) * half_width + 2 * tol
    n_out = 0
    for b in range(bin_c.shape[0]):
        pa = vx * bin_c[b] + vy * bin_s[b]
        pb = wx * bin_c[b] + wy * bin_s[b]
        lo = min(pa, pb) - margin
        hi = max(pa, pb) + margin
        j = _lower(lp, bin_ptr[b], bin_ptr[b + 1], lo)
        end = bin_ptr[b + 1]
        while j < end and lp[j] <= hi:
            sv = vx * lc[j] + vy * ls[j] - lp[j]
            sw = wx * lc[j] + wy * ls[j] - lp[j]
            if min(sv, sw) <= tol and max(sv, sw) >= -tol:
                out[n_out] = j
                n_out += 1
            j += 1
    return n_out


@njit(cache=True, inline="always")
def _cross(ax, ay, bx, by, c, s, p):
    r = segment_crossing(ax, ay, bx, by, c, s, p, CROSS_EPS)
    return r if r > 0 else 0


@njit(cache=True)
def initial_counts(verts, nv, lc, ls, lp, bin_ptr, bin_c, bin_s, half_width):
    cnt = np.zeros(lp.shape[0], dtype=np.int64)
    buf = np.empty(lp.shape[0], dtype=np.int64)
    for k in range(nv.shape[0]):
        for i in range(nv[k] - 1):
            m = edge_lines(verts[k, i, 0], verts[k, i, 1], verts[k, i + 1, 0], verts[k, i + 1, 1],
                           lc, ls, lp, bin_ptr, bin_c, bin_s, half_width, buf, 0)
            for t in range(m):
                cnt[buf[t]] += 1
    return cnt


# ---------------------------------------------------------------------------
# length-preserving vertex placement


@njit(cache=True)
def _on_circle(cx, cy, r, gx, gy):
    dx = gx - cx
    dy = gy - cy
    d = math.hypot(dx, dy)
    if d < 1e-300:
        return False, gx, gy
    return True, cx + dx * r / d, cy + dy * r / d


@njit(cache=True)
def _on_ellipse(ax, ay, bx, by, s, gx, gy):
    """Radial projection of G onto {x : |x - A| + |x - B| = s}."""
    mx = 0.5 * (ax + bx)
    my = 0.5 * (ay + by)
    c2 = math.hypot(bx - ax, by - ay)
    if s - c2 <= 1e-12 * s:
        # degenerate ellipse: the vertex must stay on segment AB
        if c2 < 1e-300:
            return False, gx, gy
        ex = (bx - ax) / c2
        ey = (by - ay) / c2
        t = min(max((gx - ax) * ex + (gy - ay) * ey, 0.0), c2)
        return True, ax + t * ex, ay + t * ey
    if c2 < 1e-300:
        ex = 1.0
        ey = 0.0
    else:
        ex = (bx - ax) / c2
        ey = (by - ay) / c2
    major = 0.5 * s
    minor = math.sqrt(max(major * major - 0.25 * c2 * c2, 0.0))
    dx = gx - mx
    dy = gy - my
    lx = dx * ex + dy * ey
    ly = -dx * ey + dy * ex
    q = math.sqrt((lx / major) ** 2 + (ly / minor) ** 2)
    if q < 1e-300:
        return False, gx, gy
    return True, mx + dx / q, my + dy / q


@njit(cache=True)
def _dist(pts, i, j):
    return math.hypot(pts[i, 0] - pts[j, 0], pts[i, 1] - pts[j, 1])


@njit(cache=True)
def _partner(old, pts, n, i, j, kind, dpar, poly, hn, ho):
    """Move vertex ``j`` so the polyline keeps its length after ``i`` moved in ``pts``.

    ``j`` goes to an ellipse whose foci are its neighbours (the moved ``i`` counts as a
    neighbour when adjacent), with the focal sum fixed by the length budget; with a single
    neighbour the ellipse is a circle.  Clamping and re-placement alternate up to 8 times.
    """
    if abs(i - j) == 1:
        a = 2 * i - j  # neighbour of i away from j
        b = 2 * j - i  # neighbour of j away from i
        rest = _dist(old, i, j)
        if 0 <= a < n:
            rest += _dist(old, a, i) - _dist(pts, a, i)
        if 0 <= b < n:
            rest += _dist(old, j, b)
        f1 = i
        f2 = b
    else:
        change = 0.0
        if i > 0:
            change += _dist(pts, i - 1, i) - _dist(old, i - 1, i)
        if i < n - 1:
            change += _dist(pts, i, i + 1) - _dist(old, i, i + 1)
        f1 = j - 1
        f2 = j + 1
        rest = -change
        if f1 >= 0:
            rest += _dist(old, f1, j)
        if f2 < n:
            rest += _dist(old, j, f2)
    if f1 < 0 or f1 >= n:
        f1 = f2
        f2 = -1
    elif f2 < 0 or f2 >= n:
        f2 = -1
    gx = old[j, 0]
    gy = old[j, 1]
    for _ in range(8):
        if f2 >= 0:
            if rest < _dist(pts, f1, f2):
                return False
            ok, px, py = _on_ellipse(pts[f1, 0], pts[f1, 1], pts[f2, 0], pts[f2, 1], rest, gx, gy)
        else:
            if rest <= 0.0:
                return False
            ok, px, py = _on_circle(pts[f1, 0], pts[f1, 1], rest, gx, gy)
        if not ok:
            return False
        pts[j, 0] = px
        pts[j, 1] = py
        if contains(px, py, kind, dpar, hn, ho, CONTAIN_TOL):
            return True
        gx, gy = project(px, py, kind, dpar, poly, hn, ho)
    return False


@njit(cache=True)
def _poly_length(pts, n):
    total = 0.0
    for i in range(n - 1):
        total += math.hypot(pts[i + 1, 0] - pts[i, 0], pts[i + 1, 1] - pts[i, 1])
    return total


@njit(cache=True)
def _restore(pts, n, target, kind, dpar, poly, hn, ho):
    """Centroid rescale to ``target`` length alternating with clamping; 8 rounds at most."""
    for _ in range(8):
        length = _poly_length(pts, n)
        if length < 1e-300:
            return False
        lam = target / length
        cx = 0.0
        cy = 0.0
        for i in range(n):
            cx += pts[i, 0]
            cy += pts[i, 1]
        cx /= n
        cy /= n
        for i in range(n):
            pts[i, 0] = cx + lam * (pts[i, 0] - cx)
            pts[i, 1] = cy + lam * (pts[i, 1] - cy)
        inside = True
        for i in range(n):
            if not contains(pts[i, 0], pts[i, 1], kind, dpar, hn, ho, CONTAIN_TOL):
                inside = False
                break
        if inside:
            return True
        for i in range(n):
            pts[i, 0], pts[i, 1] = project(pts[i, 0], pts[i, 1], kind, dpar, poly, hn, ho)
    return False


# ---------------------------------------------------------------------------
# the chain


@njit(cache=True, nogil=True)
def run_chain(verts, nv, lc, ls, lp, bin_ptr, bin_c, bin_s, half_width,
              kind, dpar, poly, hn, ho,
              steps, t0, t1, move_scale, move_cdf, adjacent_prob, seed):
    np.random.seed(seed)
    n_poly = nv.shape[0]
    cap = verts.shape[1]
    n_lines = lp.shape[0]
    cnt = initial_counts(verts, nv, lc, ls, lp, bin_ptr, bin_c, bin_s, half_width)
    s1 = 0
    s2 = 0
    for j in range(n_lines):
        s1 += cnt[j]
        s2 += cnt[j] * cnt[j]
    obj = s2 / n_lines - (s1 / n_lines) ** 2

    best_verts = verts.copy()
    best_nv = nv.copy()
    best_obj = obj
    hist_obj = np.empty(steps)
    hist_temp = np.empty(steps)
    hist_acc = np.zeros(steps, dtype=np.bool_)
    hist_move = np.empty(steps, dtype=np.int8)

    delta = np.zeros(n_lines, dtype=np.int64)
    mark = np.zeros(n_lines, dtype=np.bool_)
    touched = np.empty(n_lines, dtype=np.int64)
    buf = np.empty(n_lines, dtype=np.int64)
    new_pts = np.empty((cap, 2))
    ratio = t1 / t0

    for step in range(steps):
        temp = t0 * ratio ** (step / max(steps - 1, 1))
        sigma = move_scale * temp
        u = np.random.random()
        move = 0
        while move < 3 and u > move_cdf[move]:
            move += 1
        hist_temp[step] = temp
        hist_move[step] = move

        # choose the polyline and build its candidate vertex list in new_pts
        k = -1
        partner = -1
        lo2 = 0
        hi2 = 0
        valid = False
        lo_edge = 0
        hi_edge = 0
        new_n = 0
        if move == MOVE_PERTURB or move == MOVE_SPLIT:
            total = 0
            for q in range(n_poly):
                total += nv[q] if move == MOVE_PERTURB else nv[q] - 1
            pick = np.random.randint(0, total)
            for q in range(n_poly):
                size = nv[q] if move == MOVE_PERTURB else nv[q] - 1
                if pick < size:
                    k = q
                    break
                pick -= size
            n = nv[k]
            for i in range(n):
                new_pts[i, 0] = verts[k, i, 0]
                new_pts[i, 1] = verts[k, i, 1]
            if move == MOVE_PERTURB:
                i = pick
                if np.random.random() < adjacent_prob or n < 4:
                    partner = i + 1 if (i + 1 < n and (i == 0 or np.random.random() < 0.5)) else i - 1
                else:
                    partner = np.random.randint(0, n - 3)
                    if partner >= i - 1:
                        partner += 3  # skip i and its neighbours
                gx = verts[k, i, 0] + sigma * np.random.normal()
                gy = verts[k, i, 1] + sigma * np.random.normal()
                new_pts[i, 0], new_pts[i, 1] = project(gx, gy, kind, dpar, poly, hn, ho)
                if _partner(verts[k], new_pts, n, i, partner, kind, dpar, poly, hn, ho):
                    valid = True
                    new_n = n
                    lo_edge = max(min(i, partner) - 1, 0)
                    hi_edge = min(max(i, partner) + 1, n - 1)
                    if abs(i - partner) > 1:
                        lo_edge = max(i - 1, 0)
                        hi_edge = min(i + 1, n - 1)
                        lo2 = max(partner - 1, 0)
                        hi2 = min(partner + 1, n - 1)
            elif n < cap:
                i = pick
                for j in range(n, i + 1, -1):
                    new_pts[j, 0] = new_pts[j - 1, 0]
                    new_pts[j, 1] = new_pts[j - 1, 1]
                new_pts[i + 1, 0] = 0.5 * (verts[k, i, 0] + verts[k, i + 1, 0])
                new_pts[i + 1, 1] = 0.5 * (verts[k, i, 1] + verts[k, i + 1, 1])
                valid = True
                new_n = n + 1
                lo_edge = i
                hi_edge = i + 2
        elif move == MOVE_DELETE:
            total = 0
            for q in range(n_poly):
                total += max(nv[q] - 2, 0)
            if total > 0:
                pick = np.random.randint(0, total)
                for q in range(n_poly):
                    size = max(nv[q] - 2, 0)
                    if pick < size:
                        k = q
                        break
                    pick -= size
                n = nv[k]
                i = pick + 1
                target = _poly_length(verts[k], n)
                m = 0
                for j in range(n):
                    if j != i:
                        new_pts[m, 0] = verts[k, j, 0]
                        new_pts[m, 1] = verts[k, j, 1]
                        m += 1
                gap = math.hypot(new_pts[i, 0] - new_pts[i - 1, 0], new_pts[i, 1] - new_pts[i - 1, 1])
                if gap > 1e-12:
                    valid = _restore(new_pts, n - 1, target, kind, dpar, poly, hn, ho)
                new_n = n - 1
                lo_edge = 0
                hi_edge = n - 1
        else:
            k = np.random.randint(0, n_poly)
            n = nv[k]
            target = _poly_length(verts[k], n)
            dx = sigma * np.random.normal()
            dy = sigma * np.random.normal()
            for i in range(n):
                new_pts[i, 0] = verts[k, i, 0] + dx
                new_pts[i, 1] = verts[k, i, 1] + dy
            valid = _restore(new_pts, n, target, kind, dpar, poly, hn, ho)
            new_n = n
            lo_edge = 0
            hi_edge = n - 1

        if not valid:
            hist_obj[step] = obj
            continue

        # per-line count deltas between old edges of verts[k] and new edges of new_pts
        n_touch = 0
        if move == MOVE_PERTURB:
            m = separating_lines(verts[k, pick, 0], verts[k, pick, 1], new_pts[pick, 0],
                                 new_pts[pick, 1], lc, ls, lp, bin_ptr, bin_c, bin_s,
                                 half_width, buf)
            m = separating_lines(verts[k, partner, 0], verts[k, partner, 1], new_pts[partner, 0],
                                 new_pts[partner, 1], lc, ls, lp, bin_ptr, bin_c, bin_s,
                                 half_width, buf[m:]) + m
            for t in range(m):
                j = buf[t]
                d = 0
                for rng_lo, rng_hi in ((lo_edge, hi_edge), (lo2, hi2)):
                    for e in range(rng_lo, rng_hi):
                        d += _cross(new_pts[e, 0], new_pts[e, 1], new_pts[e + 1, 0],
                                    new_pts[e + 1, 1], lc[j], ls[j], lp[j])
                        d -= _cross(verts[k, e, 0], verts[k, e, 1], verts[k, e + 1, 0],
                                    verts[k, e + 1, 1], lc[j], ls[j], lp[j])
                if d != 0 and not mark[j]:
                    delta[j] = d
                    mark[j] = True
                    touched[n_touch] = j
                    n_touch += 1
        else:
            old_hi = hi_edge
            new_hi = hi_edge
            if move == MOVE_SPLIT:
                old_hi = lo_edge + 1
            elif move == MOVE_DELETE:
                old_hi = nv[k] - 1
                new_hi = new_n - 1
            for sign in (-1, 1):
                src = verts[k] if sign < 0 else new_pts
                for e in range(lo_edge, old_hi if sign < 0 else new_hi):
                    m = edge_lines(src[e, 0], src[e, 1], src[e + 1, 0], src[e + 1, 1],
                                   lc, ls, lp, bin_ptr, bin_c, bin_s, half_width, buf, 0)
                    for t in range(m):
                        j = buf[t]
                        if not mark[j]:
                            mark[j] = True
                            touched[n_touch] = j
                            n_touch += 1
                        delta[j] += sign
        d1 = 0
        d2 = 0
        for t in range(n_touch):
            j = touched[t]
            d = delta[j]
            d1 += d
            d2 += (cnt[j] + d) * (cnt[j] + d) - cnt[j] * cnt[j]
        new_obj = (s2 + d2) / n_lines - ((s1 + d1) / n_lines) ** 2
        change = new_obj - obj
        accept = change <= 0.0 or np.random.random() < math.exp(-change / temp)
        if accept:
            for t in range(n_touch):
                j = touched[t]
                cnt[j] += delta[j]
            s1 += d1
            s2 += d2
            obj = new_obj
            for i in range(new_n):
                verts[k, i, 0] = new_pts[i, 0]
                verts[k, i, 1] = new_pts[i, 1]
            nv[k] = new_n
            hist_acc[step] = True
            if obj < best_obj:
                best_obj = obj
                best_verts[:, :, :] = verts
                best_nv[:] = nv
        for t in range(n_touch):
            delta[touched[t]] = 0
            mark[touched[t]] = False
        hist_obj[step] = obj
    return best_verts, best_nv, best_obj, hist_obj, hist_temp, hist_acc, hist_move
