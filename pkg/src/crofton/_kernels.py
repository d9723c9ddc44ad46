"""Compiled intersection-count loops shared by the estimators and the optimizer."""
from __future__ import annotations

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi


@njit(cache=True, inline="always")
def segment_crossing(ax, ay, bx, by, c, s, p, eps):
    """0/1 crossing of segment AB with the line x.(c, s) = p; -1 when the line contains it.

    Endpoints within ``eps`` follow the half-open convention: start included, end excluded.
    """
    sa = ax * c + ay * s - p
    sb = bx * c + by * s - p
    za = abs(sa) <= eps
    zb = abs(sb) <= eps
    if za and zb:
        return -1
    if za:
        return 1
    if zb:
        return 0
    if (sa < 0.0) != (sb < 0.0):
        return 1
    return 0


@njit(cache=True, inline="always")
def in_arc(theta, start, sweep, radius, full, eps):
    if full:
        return True
    if sweep > 0.0:
        t = (theta - start) % TWO_PI
    else:
        t = (start - theta) % TWO_PI
    s = t * radius
    if s >= TWO_PI * radius - eps:
        return True
    return s < abs(sweep) * radius - eps


@njit(cache=True, nogil=True)
def count_segments(phi, p, seg, mult, eps, counts):
    degenerate = 0
    for i in range(phi.shape[0]):
        c = math.cos(phi[i])
        s = math.sin(phi[i])
        acc = 0
        for k in range(seg.shape[0]):
            r = segment_crossing(seg[k, 0], seg[k, 1], seg[k, 2], seg[k, 3], c, s, p[i], eps)
            if r < 0:
                degenerate += 1
            else:
                acc += r * mult[k]
        counts[i] += acc
    return degenerate


@njit(cache=True, nogil=True)
def count_arcs(phi, p, circles, circ_ptr, arc_start, arc_sweep, arc_full, arc_mult, eps, counts):
    degenerate = 0
    for i in range(phi.shape[0]):
        f = phi[i]
        c = math.cos(f)
        s = math.sin(f)
        acc = 0
        for g in range(circles.shape[0]):
            cx = circles[g, 0]
            cy = circles[g, 1]
            r = circles[g, 2]
            d = p[i] - (cx * c + cy * s)
            ad = abs(d)
            if ad > r + eps:
                continue
            if abs(ad - r) <= eps:
                tangent_angle = f if d > 0.0 else f + math.pi
                for k in range(circ_ptr[g], circ_ptr[g + 1]):
                    if in_arc(tangent_angle, arc_start[k], arc_sweep[k], r, arc_full[k], eps):
                        degenerate += 1
                continue
            h = math.sqrt(max(r * r - d * d, 0.0))
            delta = math.atan2(h, d)
            t1 = f + delta
            t2 = f - delta
            for k in range(circ_ptr[g], circ_ptr[g + 1]):
                hits = 0
                if in_arc(t1, arc_start[k], arc_sweep[k], r, arc_full[k], eps):
                    hits += 1
                if in_arc(t2, arc_start[k], arc_sweep[k], r, arc_full[k], eps):
                    hits += 1
                acc += hits * arc_mult[k]
        counts[i] += acc
    return degenerate


@njit(cache=True, nogil=True)
def moment_sums(counts):
    s1 = 0
    s2 = 0
    s3 = 0
    s4 = 0
    for i in range(counts.shape[0]):
        n = counts[i]
        n2 = n * n
        s1 += n
        s2 += n2
        s3 += n2 * n
        s4 += n2 * n2
    return s1, s2, s3, s4
