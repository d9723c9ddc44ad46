"""Static SVG pictures of a domain, a set inside it and optionally some hitting lines."""
from __future__ import annotations

import math

import numpy as np

from .geometry import Arc, ConvexDomain, ConvexPolygon, Disk, Ellipse, RectSet, Segment
from .kinematic import HittingLineSpace, sample_hitting_lines

BASE_STROKE = 0.02  # set stroke width per unit multiplicity, in domain units
OUTLINE_STROKE = 0.01
LINE_STROKE = 0.004


def _f(x: float) -> str:
    return f"{x:.6g}"


def _bbox(domain: ConvexDomain, rect: RectSet):
    if isinstance(domain, ConvexPolygon):
        pts = domain.array
    else:
        c, r = np.array(domain.reference_point), domain.circumradius
        pts = np.array([c - r, c + r])
    for q in rect.pieces:
        if isinstance(q, Segment):
            pts = np.vstack([pts, q.a, q.b])
        else:
            pts = np.vstack([pts, np.array(q.center) - q.radius, np.array(q.center) + q.radius])
    return pts.min(axis=0), pts.max(axis=0)


def _outline(domain: ConvexDomain) -> str:
    style = f'fill="none" stroke="#555555" stroke-width="{_f(OUTLINE_STROKE)}"'
    if isinstance(domain, Disk):
        cx, cy = domain.center
        return f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(domain.radius)}" {style}/>'
    if isinstance(domain, Ellipse):
        (cx, cy), (a, b) = domain.center, domain.semi_axes
        rot = math.degrees(domain.rotation)
        return (f'<ellipse cx="{_f(cx)}" cy="{_f(cy)}" rx="{_f(a)}" ry="{_f(b)}" '
                f'transform="rotate({_f(rot)} {_f(cx)} {_f(cy)})" {style}/>')
    pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in domain.vertices)
    return f'<polygon points="{pts}" {style}/>'


def _piece(q) -> str:
    style = f'fill="none" stroke="#c0392b" stroke-width="{_f(BASE_STROKE * q.mult)}"'
    if isinstance(q, Segment):
        (x1, y1), (x2, y2) = q.a, q.b
        return f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" {style}/>'
    cx, cy = q.center
    if q.is_full_circle:
        return f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(q.radius)}" {style}/>'
    (x1, y1), (x2, y2) = q.evaluate(np.array([0.0, q.length]))[0]
    large = 1 if abs(q.sweep) > math.pi else 0
    sweep = 1 if q.sweep > 0 else 0
    r = _f(q.radius)
    return (f'<path d="M {_f(x1)} {_f(y1)} A {r} {r} 0 {large} {sweep} {_f(x2)} {_f(y2)}" '
            f'{style}/>')


def chord(domain: ConvexDomain, phi: float, p: float):
    """End points of the chord cut from ``domain`` by the line ``(phi, p)``, or ``None``."""
    u = np.array([math.cos(phi), math.sin(phi)])
    t = np.array([-u[1], u[0]])
    if isinstance(domain, Disk):
        c = np.array(domain.center)
        off = p - c @ u
        h2 = domain.radius**2 - off * off
        if h2 < 0:
            return None
        mid = c + off * u
        h = math.sqrt(h2)
        return mid - h * t, mid + h * t
    if isinstance(domain, Ellipse):
        verts = domain.boundary_vertices()
    else:
        verts = domain.array
    # clip the line against the polygon edges (Cyrus-Beck on an infinite line)
    base = p * u
    lo, hi = -math.inf, math.inf
    n = len(verts)
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        e = b - a
        inward = np.array([-e[1], e[0]])  # counter-clockwise vertices
        denom = inward @ t
        num = inward @ (base - a)
        if abs(denom) < 1e-15:
            if num < 0:
                return None
            continue
        s = -num / denom
        if denom > 0:
            lo = max(lo, s)
        else:
            hi = min(hi, s)
    if lo > hi:
        return None
    return base + lo * t, base + hi * t


def render_svg(domain: ConvexDomain, rect: RectSet, lines: int = 0, seed: int = 42,
               size: int = 480) -> str:
    """SVG document; ``lines`` hitting lines (indices ``0..lines-1`` of ``seed``) are drawn
    as chords of the domain.  Output is a deterministic function of the arguments."""
    lo, hi = _bbox(domain, rect)
    pad = 0.05 * float(max(hi - lo))
    lo, hi = lo - pad, hi + pad
    w, h = hi - lo
    height = int(round(size * h / w))
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{height}" '
        f'viewBox="{_f(lo[0])} {_f(-hi[1])} {_f(w)} {_f(h)}">',
        '<g transform="scale(1,-1)">',
        _outline(domain),
    ]
    if lines:
        sample = sample_hitting_lines(HittingLineSpace(domain, seed), 0, lines)
        parts.append(f'<g class="lines" stroke="#2e86c1" stroke-width="{_f(LINE_STROKE)}">')
        for phi, p in zip(sample.phi, sample.p):
            ends = chord(domain, phi, p)
            if ends is not None:
                (x1, y1), (x2, y2) = ends
                parts.append(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}"/>')
        parts.append("</g>")
    parts.extend(_piece(q) for q in rect.pieces)
    parts += ["</g>", "</svg>"]
    return "\n".join(parts) + "\n"
