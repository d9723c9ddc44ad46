"""Kinematic measure on lines, the hitting-line probability space and intersection counts.

A line is ``{x : x . (cos phi, sin phi) = p}`` with ``phi`` in ``[0, 2 pi)`` and ``p`` real.
Every line has two such representations and the measure ``dphi dp`` is taken over this
double cover, which makes ``(1/4) * int n_l(set) dmu = length(set)`` and gives the lines
meeting a convex domain total measure ``2 * perimeter``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .geometry import Arc, ConvexDomain, CurvePiece, RectSet, Segment, TWO_PI

# tie-breaking tolerance of the intersection predicates
COUNT_EPS = 1e-12
# counters per sample: each Philox block holds 4 uint64, two per rejection attempt
_BLOCKS_PER_SAMPLE = 4
_ATTEMPTS_IN_BLOCK = 2 * _BLOCKS_PER_SAMPLE
_MAX_ATTEMPTS = 10**6
_U53 = 1.0 / 9007199254740992.0


@dataclass(frozen=True)
class LineCoords:
    phi: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)
        object.__setattr__(self, "p", float(self.p))

    def flipped(self) -> "LineCoords":
        """The other coordinate representation of the same line."""
        return LineCoords(self.phi + math.pi, -self.p)

    @property
    def normal(self) -> np.ndarray:
        return np.array([math.cos(self.phi), math.sin(self.phi)])


def lines_hit_domain(phi, p, domain: ConvexDomain):
    phi = np.asarray(phi, dtype=float)
    p = np.asarray(p, dtype=float)
    return (-domain.support(phi + math.pi) <= p) & (p <= domain.support(phi))


def line_hits_domain(line: LineCoords, domain: ConvexDomain) -> bool:
    return bool(lines_hit_domain(line.phi, line.p, domain))


@dataclass(frozen=True)
class HittingLineSpace:
    """Lines meeting ``domain``, with the normalized kinematic measure."""

    domain: ConvexDomain
    seed: int = 42

    def __post_init__(self):
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def total_measure(self) -> float:
        return 2.0 * self.domain.perimeter

    @property
    def box_radius(self) -> float:
        return self.domain.circumradius

    @property
    def box_measure(self) -> float:
        """Measure of the rejection box ``[0, 2 pi) x [-R, R]`` around the reference point."""
        return TWO_PI * 2.0 * self.box_radius


@dataclass(frozen=True)
class LineSample:
    phi: np.ndarray
    p: np.ndarray
    attempts: np.ndarray  # rejection attempts used per sample

    def __len__(self):
        return len(self.phi)


def _propose(space: HittingLineSpace, raw_phi, raw_p):
    cx, cy = space.domain.reference_point
    phi = (raw_phi >> np.uint64(11)).astype(np.float64) * (_U53 * TWO_PI)
    off = ((raw_p >> np.uint64(11)).astype(np.float64) * _U53 * 2.0 - 1.0) * space.box_radius
    p = off + cx * np.cos(phi) + cy * np.sin(phi)
    return phi, p


def _fallback(space: HittingLineSpace, index: int, tried: int):
    rng = np.random.default_rng([space.seed, index, 1])
    attempts = tried
    while attempts < _MAX_ATTEMPTS:
        raw = rng.integers(0, 2**64, size=(256, 2), dtype=np.uint64, endpoint=False)
        phi, p = _propose(space, raw[:, 0], raw[:, 1])
        ok = np.flatnonzero(lines_hit_domain(phi, p, space.domain))
        if ok.size:
            j = ok[0]
            return phi[j], p[j], attempts + j + 1
        attempts += 256
    raise RuntimeError(f"rejection sampler exceeded {_MAX_ATTEMPTS} attempts at index {index}")


def sample_hitting_lines(space: HittingLineSpace, start: int, count: int) -> LineSample:
    """Lines with sample indices ``start .. start+count-1``.

    Sample ``i`` is a pure function of ``(seed, i)``: it reads its own Philox counter
    block, so chunking and ordering never change the values.
    """
    if start < 0 or count < 0:
        raise ValueError("start and count must be nonnegative")
    bitgen = np.random.Philox(key=space.seed, counter=start * _BLOCKS_PER_SAMPLE)
    raw = bitgen.random_raw(count * 4 * _BLOCKS_PER_SAMPLE).reshape(count, _ATTEMPTS_IN_BLOCK, 2)
    out_phi = np.empty(count)
    out_p = np.empty(count)
    attempts = np.zeros(count, dtype=np.int64)
    pending = np.arange(count)
    for j in range(_ATTEMPTS_IN_BLOCK):
        if not pending.size:
            break
        phi, p = _propose(space, raw[pending, j, 0], raw[pending, j, 1])
        ok = lines_hit_domain(phi, p, space.domain)
        done = pending[ok]
        out_phi[done] = phi[ok]
        out_p[done] = p[ok]
        attempts[done] = j + 1
        pending = pending[~ok]
    for r in pending:
        out_phi[r], out_p[r], attempts[r] = _fallback(space, start + int(r), _ATTEMPTS_IN_BLOCK)
    return LineSample(out_phi, out_p, attempts)


def sample_hitting_line(space: HittingLineSpace, sample_index: int) -> LineCoords:
    s = sample_hitting_lines(space, sample_index, 1)
    return LineCoords(s.phi[0], s.p[0])


# ---------------------------------------------------------------------------
# counting


@dataclass(frozen=True)
class _Packed:
    seg: np.ndarray
    seg_mult: np.ndarray
    circles: np.ndarray
    circ_ptr: np.ndarray
    arc_start: np.ndarray
    arc_sweep: np.ndarray
    arc_full: np.ndarray
    arc_mult: np.ndarray


@lru_cache(maxsize=64)
def _pack(rect: RectSet) -> _Packed:
    segs = [q for q in rect.pieces if isinstance(q, Segment)]
    arcs = [q for q in rect.pieces if isinstance(q, Arc)]
    seg = np.array([[*q.a, *q.b] for q in segs], dtype=float).reshape(-1, 4)
    seg_mult = np.array([q.mult for q in segs], dtype=np.int64)
    groups: dict[tuple, list[Arc]] = {}
    for q in arcs:
        groups.setdefault((q.center, q.radius), []).append(q)
    circles = np.array([[*k[0], k[1]] for k in groups], dtype=float).reshape(-1, 3)
    ordered = [q for g in groups.values() for q in g]
    ptr = np.cumsum([0] + [len(g) for g in groups.values()]).astype(np.int64)
    return _Packed(
        seg, seg_mult, circles, ptr,
        np.array([q.start for q in ordered], dtype=float),
        np.array([q.sweep for q in ordered], dtype=float),
        np.array([q.is_full_circle for q in ordered], dtype=np.bool_),
        np.array([q.mult for q in ordered], dtype=np.int64),
    )


def canonical_lines(phi, p) -> tuple[np.ndarray, np.ndarray]:
    """The representation with ``phi`` in ``[0, pi)``: ``(phi, p)`` and ``(phi + pi, -p)``
    are one line, and counting on a fixed representative makes tie-breaking identical for
    both."""
    phi = np.array(phi, dtype=float) % TWO_PI
    p = np.array(p, dtype=float)
    upper = phi >= math.pi
    phi[upper] -= math.pi
    p[upper] = -p[upper]
    return phi, p


def count_lines(phi, p, rect: RectSet, eps: float = COUNT_EPS) -> tuple[np.ndarray, int]:
    """Intersection counts ``n_l(rect)`` (with multiplicity) for arrays of lines.

    Returns the counts and the number of degenerate (tangent / containing) line-piece events,
    which contribute zero to the counts.
    """
    phi, p = canonical_lines(np.atleast_1d(phi), np.atleast_1d(p))
    counts = np.zeros(phi.shape[0], dtype=np.int64)
    pk = _pack(rect)
    degenerate = 0
    if len(pk.seg):
        degenerate += _kernels.count_segments(phi, p, pk.seg, pk.seg_mult, eps, counts)
    if len(pk.circles):
        degenerate += _kernels.count_arcs(phi, p, pk.circles, pk.circ_ptr, pk.arc_start,
                                          pk.arc_sweep, pk.arc_full, pk.arc_mult, eps, counts)
    return counts, int(degenerate)


def line_curve_intersections(line: LineCoords, piece: CurvePiece) -> int:
    """Transversal intersections of ``line`` with ``piece``, multiplicity excluded."""
    counts, _ = count_lines([line.phi], [line.p], RectSet((piece.with_mult(1),)))
    return int(counts[0])


def count_intersections(line: LineCoords, rect: RectSet) -> int:
    counts, _ = count_lines([line.phi], [line.p], rect)
    return int(counts[0])
