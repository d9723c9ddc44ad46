"""Curve pieces, rectifiable sets and convex planar domains.

Only segments and circular arcs are first-class pieces.  Every piece carries an
integer multiplicity so that ``n`` copies of a boundary are represented exactly
instead of by duplicated geometry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import ellipe

TWO_PI = 2.0 * math.pi
# absolute tolerance (domain units) for degeneracy classification and containment
GEOM_EPS = 1e-9


class GeometryError(ValueError):
    """Invalid geometric input."""


class ParameterDomainError(ValueError):
    """Arclength parameter outside ``[0, length]``."""


def _pt(v) -> tuple[float, float]:
    x, y = v
    return (float(x), float(y))


@dataclass(frozen=True)
class Segment:
    a: tuple[float, float]
    b: tuple[float, float]
    mult: int = 1

    def __post_init__(self):
        object.__setattr__(self, "a", _pt(self.a))
        object.__setattr__(self, "b", _pt(self.b))
        if int(self.mult) != self.mult or self.mult < 1:
            raise GeometryError(f"multiplicity must be a positive integer, got {self.mult}")
        object.__setattr__(self, "mult", int(self.mult))
        if self.a == self.b:
            raise GeometryError(f"segment endpoints coincide: {self.a}")

    @property
    def length(self) -> float:
        return math.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1])

    @property
    def direction(self) -> np.ndarray:
        d = np.subtract(self.b, self.a)
        return d / np.hypot(*d)

    @property
    def normal(self) -> np.ndarray:
        dx, dy = self.direction
        return np.array([-dy, dx])

    def evaluate(self, s):
        """Points and unit normals at arclength parameters ``s`` (array-friendly)."""
        s = np.asarray(s, dtype=float)
        d = self.direction
        pts = np.asarray(self.a) + s[..., None] * d
        nrm = np.broadcast_to(self.normal, pts.shape)
        return pts, nrm

    def with_mult(self, mult: int) -> "Segment":
        return Segment(self.a, self.b, mult)


@dataclass(frozen=True)
class Arc:
    center: tuple[float, float]
    radius: float
    start: float
    sweep: float
    mult: int = 1

    def __post_init__(self):
        object.__setattr__(self, "center", _pt(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "sweep", float(self.sweep))
        if int(self.mult) != self.mult or self.mult < 1:
            raise GeometryError(f"multiplicity must be a positive integer, got {self.mult}")
        object.__setattr__(self, "mult", int(self.mult))
        if not self.radius > 0:
            raise GeometryError(f"arc radius must be positive, got {self.radius}")
        if self.sweep == 0 or abs(self.sweep) > TWO_PI * (1 + 1e-12):
            raise GeometryError(f"arc sweep must satisfy 0 < |sweep| <= 2*pi, got {self.sweep}")

    @property
    def length(self) -> float:
        return self.radius * abs(self.sweep)

    @property
    def is_full_circle(self) -> bool:
        return abs(self.sweep) >= TWO_PI * (1 - 1e-12)

    def evaluate(self, s):
        s = np.asarray(s, dtype=float)
        theta = self.start + math.copysign(1.0, self.sweep) * s / self.radius
        nrm = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        pts = np.asarray(self.center) + self.radius * nrm
        return pts, nrm

    def with_mult(self, mult: int) -> "Arc":
        return Arc(self.center, self.radius, self.start, self.sweep, mult)


CurvePiece = Union[Segment, Arc]


def piece_length(piece: CurvePiece) -> float:
    """Analytic length of ``piece``, multiplicity excluded."""
    return piece.length


def point_and_normal(piece: CurvePiece, s: float) -> tuple[np.ndarray, np.ndarray]:
    length = piece.length
    if not (-1e-12 * max(1.0, length) <= s <= length * (1 + 1e-12)):
        raise ParameterDomainError(f"s={s} outside [0, {length}]")
    pts, nrm = piece.evaluate(min(max(s, 0.0), length))
    return np.asarray(pts), np.asarray(nrm)


def sample_points(piece: CurvePiece, count: int) -> np.ndarray:
    """``count`` points evenly spaced in arclength, endpoints included."""
    pts, _ = piece.evaluate(np.linspace(0.0, piece.length, count))
    return pts


@dataclass(frozen=True)
class RectSet:
    """Finite multiset of curve pieces."""

    pieces: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))

    @property
    def total_length(self) -> float:
        return math.fsum(p.mult * p.length for p in self.pieces)

    def __len__(self) -> int:
        return len(self.pieces)

    def __iter__(self):
        return iter(self.pieces)

    def __add__(self, other: "RectSet") -> "RectSet":
        return RectSet(self.pieces + other.pieces)


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Disk:
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", _pt(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise GeometryError("disk radius must be positive")

    def support(self, phi):
        phi = np.asarray(phi, dtype=float)
        return self.center[0] * np.cos(phi) + self.center[1] * np.sin(phi) + self.radius

    @property
    def perimeter(self) -> float:
        return TWO_PI * self.radius

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    @property
    def reference_point(self) -> tuple[float, float]:
        return self.center

    @property
    def circumradius(self) -> float:
        return self.radius

    def longest_chord(self) -> Segment:
        cx, cy = self.center
        return Segment((cx - self.radius, cy), (cx + self.radius, cy))

    def boundary_pieces(self, copies: int = 1) -> RectSet:
        _check_copies(copies)
        return RectSet((Arc(self.center, self.radius, 0.0, TWO_PI, copies),))

    def contains(self, pts, tol: float = GEOM_EPS):
        pts = np.asarray(pts, dtype=float)
        r = np.hypot(pts[..., 0] - self.center[0], pts[..., 1] - self.center[1])
        return r <= self.radius + tol

    def project(self, pts):
        """Nearest point of the closed disk."""
        pts = np.array(pts, dtype=float)
        c = np.asarray(self.center)
        d = pts - c
        r = np.hypot(d[..., 0], d[..., 1])
        out = r > self.radius
        scale = np.where(out, self.radius / np.where(out, r, 1.0), 1.0)
        return c + d * scale[..., None]


@dataclass(frozen=True)
class ConvexPolygon:
    """Strictly convex polygon; vertices are stored counter-clockwise."""

    vertices: tuple

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise GeometryError("polygon vertices must be a list of (x, y) pairs")
        keep = [0]
        for i in range(1, len(v)):
            if np.hypot(*(v[i] - v[keep[-1]])) > GEOM_EPS:
                keep.append(i)
        if len(keep) > 1 and np.hypot(*(v[keep[-1]] - v[keep[0]])) <= GEOM_EPS:
            keep.pop()
        v = v[keep]
        if len(v) < 3:
            raise GeometryError("polygon needs at least 3 distinct vertices")
        area2 = np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
        if area2 < 0:
            v = v[::-1]
        n = len(v)
        for i in range(n):
            a, b, c = v[i - 1], v[i], v[(i + 1) % n]
            cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            scale = np.hypot(*(b - a)) * np.hypot(*(c - b))
            if cross <= GEOM_EPS * scale:
                raise GeometryError(f"polygon is not strictly convex at vertex {i}: {tuple(b)}")
        object.__setattr__(self, "vertices", tuple(map(tuple, v.tolist())))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.vertices)

    def support(self, phi):
        phi = np.asarray(phi, dtype=float)
        v = self.array
        proj = np.multiply.outer(np.cos(phi), v[:, 0]) + np.multiply.outer(np.sin(phi), v[:, 1])
        return proj.max(axis=-1)

    @property
    def perimeter(self) -> float:
        v = self.array
        return math.fsum(np.hypot(*(np.roll(v, -1, axis=0) - v).T))

    def _diameter_pair(self):
        v = self.array
        d = np.hypot(v[:, None, 0] - v[None, :, 0], v[:, None, 1] - v[None, :, 1])
        i, j = np.unravel_index(np.argmax(d), d.shape)
        return v[i], v[j], d[i, j]

    @property
    def diameter(self) -> float:
        return float(self._diameter_pair()[2])

    @property
    def reference_point(self) -> tuple[float, float]:
        c = self.array.mean(axis=0)
        return (float(c[0]), float(c[1]))

    @property
    def circumradius(self) -> float:
        return float(np.max(np.hypot(*(self.array - self.reference_point).T)))

    def longest_chord(self) -> Segment:
        a, b, _ = self._diameter_pair()
        return Segment(a, b)

    def boundary_pieces(self, copies: int = 1) -> RectSet:
        _check_copies(copies)
        v = self.vertices
        return RectSet(tuple(Segment(v[i], v[(i + 1) % len(v)], copies) for i in range(len(v))))

    def _halfplanes(self):
        v = self.array
        e = np.roll(v, -1, axis=0) - v
        nrm = np.stack([e[:, 1], -e[:, 0]], axis=1)
        nrm /= np.hypot(nrm[:, 0], nrm[:, 1])[:, None]
        off = np.sum(nrm * v, axis=1)
        return nrm, off

    def contains(self, pts, tol: float = GEOM_EPS):
        pts = np.asarray(pts, dtype=float)
        nrm, off = self._halfplanes()
        return np.all(pts @ nrm.T - off <= tol, axis=-1)

    def project(self, pts):
        pts = np.array(pts, dtype=float)
        flat = pts.reshape(-1, 2)
        inside = self.contains(flat, tol=0.0)
        v = self.array
        w = np.roll(v, -1, axis=0)
        out = flat.copy()
        for k in np.flatnonzero(~inside):
            q = flat[k]
            e = w - v
            t = np.clip(np.sum((q - v) * e, axis=1) / np.sum(e * e, axis=1), 0.0, 1.0)
            cand = v + t[:, None] * e
            out[k] = cand[np.argmin(np.hypot(*(cand - q).T))]
        return out.reshape(pts.shape)


@dataclass(frozen=True)
class Ellipse:
    center: tuple[float, float] = (0.0, 0.0)
    semi_axes: tuple[float, float] = (1.0, 1.0)
    rotation: float = 0.0
    # max chord-to-curve deviation of the polygonal boundary returned by boundary_pieces
    boundary_tol: float = 1e-4

    def __post_init__(self):
        object.__setattr__(self, "center", _pt(self.center))
        object.__setattr__(self, "semi_axes", _pt(self.semi_axes))
        object.__setattr__(self, "rotation", float(self.rotation))
        if min(self.semi_axes) <= 0:
            raise GeometryError("ellipse semi-axes must be positive")

    def _local(self, pts):
        pts = np.asarray(pts, dtype=float)
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        dx = pts[..., 0] - self.center[0]
        dy = pts[..., 1] - self.center[1]
        return c * dx + s * dy, -s * dx + c * dy

    def _world(self, x, y):
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        return np.stack([self.center[0] + c * x - s * y, self.center[1] + s * x + c * y], axis=-1)

    def support(self, phi):
        phi = np.asarray(phi, dtype=float)
        a, b = self.semi_axes
        psi = phi - self.rotation
        return (self.center[0] * np.cos(phi) + self.center[1] * np.sin(phi)
                + np.hypot(a * np.cos(psi), b * np.sin(psi)))

    @property
    def perimeter(self) -> float:
        a, b = max(self.semi_axes), min(self.semi_axes)
        return 4.0 * a * float(ellipe(1.0 - (b / a) ** 2))

    @property
    def diameter(self) -> float:
        return 2.0 * max(self.semi_axes)

    @property
    def reference_point(self) -> tuple[float, float]:
        return self.center

    @property
    def circumradius(self) -> float:
        return max(self.semi_axes)

    def longest_chord(self) -> Segment:
        a, b = self.semi_axes
        if a >= b:
            ends = self._world(np.array([-a, a]), np.zeros(2))
        else:
            ends = self._world(np.zeros(2), np.array([-b, b]))
        return Segment(ends[0], ends[1])

    def boundary_vertices(self) -> np.ndarray:
        a, b = self.semi_axes
        kmax = max(a, b) / min(a, b) ** 2
        n = max(16, math.ceil(TWO_PI * max(a, b) * math.sqrt(kmax / (8.0 * self.boundary_tol))))
        t = np.linspace(0.0, TWO_PI, n, endpoint=False)
        return self._world(a * np.cos(t), b * np.sin(t))

    def boundary_pieces(self, copies: int = 1) -> RectSet:
        """Inscribed polygon whose chords deviate from the ellipse by at most ``boundary_tol``."""
        _check_copies(copies)
        v = self.boundary_vertices()
        return RectSet(tuple(Segment(v[i], v[(i + 1) % len(v)], copies) for i in range(len(v))))

    def contains(self, pts, tol: float = GEOM_EPS):
        x, y = self._local(pts)
        a, b = self.semi_axes
        q = np.sqrt((x / a) ** 2 + (y / b) ** 2)
        return (q - 1.0) * min(a, b) <= tol

    def project(self, pts):
        """Nearest point of the closed ellipse (bisection on the Lagrange multiplier)."""
        pts = np.array(pts, dtype=float)
        x, y = self._local(pts)
        a, b = self.semi_axes
        x = np.atleast_1d(x).astype(float)
        y = np.atleast_1d(y).astype(float)
        out_x, out_y = x.copy(), y.copy()
        for k in np.flatnonzero((x / a) ** 2 + (y / b) ** 2 > 1.0):
            out_x[k], out_y[k] = _ellipse_nearest(a, b, x[k], y[k])
        res = self._world(out_x, out_y)
        return res.reshape(pts.shape)


def _ellipse_nearest(a: float, b: float, x: float, y: float) -> tuple[float, float]:
    # nearest point on x^2/a^2 + y^2/b^2 = 1 to an exterior point: solve for t >= 0 with
    # (a x / (t + a^2))^2 + (b y / (t + b^2))^2 = 1
    sx, sy = math.copysign(1.0, x), math.copysign(1.0, y)
    x, y = abs(x), abs(y)

    def g(t):
        return (a * x / (t + a * a)) ** 2 + (b * y / (t + b * b)) ** 2 - 1.0

    lo, hi = 0.0, max(a, b) * math.hypot(x, y) + max(a, b) ** 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, hi):
            break
    t = 0.5 * (lo + hi)
    px, py = a * a * x / (t + a * a), b * b * y / (t + b * b)
    return sx * px, sy * py


ConvexDomain = Union[Disk, ConvexPolygon, Ellipse]


def _check_copies(copies: int):
    if int(copies) != copies or copies < 1:
        raise GeometryError(f"copies must be a positive integer, got {copies}")


def unit_square() -> ConvexPolygon:
    return ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))


def support_function(domain: ConvexDomain, phi):
    return domain.support(phi)


def width(domain: ConvexDomain, phi):
    phi = np.asarray(phi, dtype=float)
    return domain.support(phi) + domain.support(phi + math.pi)


def domain_perimeter(domain: ConvexDomain) -> float:
    return domain.perimeter


def domain_diameter(domain: ConvexDomain) -> float:
    return domain.diameter


def longest_chord(domain: ConvexDomain) -> Segment:
    return domain.longest_chord()


def boundary_pieces(domain: ConvexDomain, copies: int = 1) -> RectSet:
    return domain.boundary_pieces(copies)


def uncontained_pieces(rect: RectSet, domain: ConvexDomain, samples: int = 64,
                       tol: float = GEOM_EPS) -> list[int]:
    """Indices of pieces with a sample point outside the closed domain."""
    bad = []
    for i, piece in enumerate(rect.pieces):
        if not np.all(domain.contains(sample_points(piece, samples), tol=tol)):
            bad.append(i)
    return bad


def _collinear_overlap(p: Segment, q: Segment, tol: float) -> bool:
    d = p.direction
    n = np.array([-d[1], d[0]])
    a = np.asarray(p.a)
    if abs(np.dot(np.subtract(q.a, a), n)) > tol or abs(np.dot(np.subtract(q.b, a), n)) > tol:
        return False
    s0, s1 = 0.0, p.length
    t = sorted((float(np.dot(np.subtract(q.a, a), d)), float(np.dot(np.subtract(q.b, a), d))))
    return min(s1, t[1]) - max(s0, t[0]) > tol


def _arc_interval(arc: Arc) -> tuple[float, float]:
    lo = arc.start if arc.sweep > 0 else arc.start + arc.sweep
    return lo % TWO_PI, abs(arc.sweep)


def _arc_overlap(p: Arc, q: Arc, tol: float) -> bool:
    if math.hypot(p.center[0] - q.center[0], p.center[1] - q.center[1]) > tol:
        return False
    if abs(p.radius - q.radius) > tol:
        return False
    if p.is_full_circle or q.is_full_circle:
        return True
    (a0, la), (b0, lb) = _arc_interval(p), _arc_interval(q)
    ang = tol / p.radius
    for shift in (-TWO_PI, 0.0, TWO_PI):
        lo = max(a0, b0 + shift)
        hi = min(a0 + la, b0 + shift + lb)
        if hi - lo > ang:
            return True
    return False


def overlapping_pairs(rect: RectSet, tol: float = GEOM_EPS) -> list[tuple[int, int]]:
    """Pairs of pieces that share a sub-curve of positive length."""
    out = []
    pieces = rect.pieces
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            p, q = pieces[i], pieces[j]
            if isinstance(p, Segment) and isinstance(q, Segment):
                hit = _collinear_overlap(p, q, tol)
            elif isinstance(p, Arc) and isinstance(q, Arc):
                hit = _arc_overlap(p, q, tol)
            else:
                hit = False
            if hit:
                out.append((i, j))
    return out


def segments_collinear(p: Segment, q: Segment, rel_tol: float = 1e-12) -> bool:
    d = p.direction
    scale = max(p.length, q.length, 1.0)
    a = np.asarray(p.a)
    n = np.array([-d[1], d[0]])
    return (abs(np.dot(np.subtract(q.a, a), n)) <= rel_tol * scale
            and abs(np.dot(np.subtract(q.b, a), n)) <= rel_tol * scale)


__all__ = [
    "Arc", "ConvexDomain", "ConvexPolygon", "CurvePiece", "Disk", "Ellipse", "GeometryError",
    "ParameterDomainError", "RectSet", "Segment", "boundary_pieces", "domain_diameter",
    "domain_perimeter", "longest_chord", "overlapping_pairs", "piece_length", "point_and_normal",
    "sample_points", "support_function", "uncontained_pieces", "unit_square", "width",
]
