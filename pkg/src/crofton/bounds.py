"""Closed-form bounds on the quadratic Crofton functional and the constructions attaining them."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np

from .estimators import closed_form_copies_plus_segment
from .geometry import Arc, ConvexDomain, Disk, RectSet, Segment, TWO_PI, Ellipse
from .kinematic import HittingLineSpace, count_lines, sample_hitting_lines


def frac(x: float) -> float:
    """Fractional part ``x - floor(x)``."""
    return x - math.floor(x)


def lemma1_bound(mean: float) -> float:
    """Smallest possible ``E[X^2]`` of a nonnegative integer variable with ``E[X] = mean``."""
    if mean < 0:
        raise ValueError("mean must be nonnegative")
    f = frac(mean)
    return mean * mean + f - f * f


def lemma1_check(distribution: Mapping[int, float]) -> tuple[float, float, bool]:
    """Return ``(E X^2, lemma1_bound(E X), tight)`` for a finite integer distribution.

    ``tight`` says whether the support sits inside ``{floor(EX), floor(EX) + 1}``, the
    equality case.
    """
    if not distribution:
        raise ValueError("empty distribution")
    support = np.array(list(distribution.keys()))
    probs = np.array(list(distribution.values()), dtype=float)
    if np.any(support < 0) or np.any(support != np.round(support)):
        raise ValueError("support must be nonnegative integers")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
        raise ValueError("probabilities must be nonnegative and sum to 1")
    support = support.astype(np.int64)
    mean = math.fsum(support * probs)
    lhs = math.fsum(support.astype(float) ** 2 * probs)
    rhs = lemma1_bound(mean)
    if lhs < rhs - 1e-12:
        raise AssertionError(f"second moment {lhs} below the integer bound {rhs}")
    used = support[probs > 0]
    k = math.floor(mean + 1e-12)
    tight = bool(np.all((used == k) | (used == k + 1)))
    return lhs, rhs, tight


@dataclass(frozen=True)
class BoundsReport:
    L: float
    perimeter: float
    diameter: float
    fractional: float
    trivialLowerLinear: float
    trivialLowerQuadratic: float
    thm3Lower: float
    thm3Upper: float
    inTheoremRegime: bool
    copies: int | None
    segmentLength: float | None
    extremalValue: float | None

    @property
    def nu_variance_lower(self) -> float:
        """Lower bound on the variance of the count under the hitting-line probability."""
        return self.fractional - self.fractional**2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["nuVarianceLower"] = self.nu_variance_lower
        d["nuVarianceUpper"] = 0.5
        return d


def regime(domain: ConvexDomain, length: float) -> tuple[int, float] | None:
    """``(n, L - n |dOmega|)`` when ``0 <= L - n |dOmega| <= diam``, else ``None``."""
    per, diam = domain.perimeter, domain.diameter
    n = math.floor(length / per)
    rest = length - n * per
    if rest > per - 1e-12 * per:
        n, rest = n + 1, 0.0
    rest = max(rest, 0.0)
    if rest <= diam * (1 + 1e-12):
        return n, min(rest, diam)
    return None


def theorem3_bounds(domain: ConvexDomain, length: float) -> BoundsReport:
    if length < 0:
        raise ValueError("length must be nonnegative")
    per = domain.perimeter
    f = frac(2.0 * length / per)
    quad = 2.0 * length**2 / per
    lower = quad + 0.5 * per * f * (1.0 - f)
    upper = quad + 0.25 * per
    reg = regime(domain, length)
    extremal = None
    copies = seg = None
    if reg is not None:
        copies, seg = reg
        extremal = closed_form_copies_plus_segment(domain, copies, seg)
    return BoundsReport(length, per, domain.diameter, f, length, quad, lower, upper,
                        reg is not None, copies, seg, extremal)


class RegimeError(ValueError):
    def __init__(self, length: float, below: float, above: float):
        self.length, self.below, self.above = length, below, above
        super().__init__(f"L={length} is outside every interval [n|dOmega|, n|dOmega| + diam]; "
                         f"nearest admissible lengths are {below} and {above}")


def extremal_set(domain: ConvexDomain, length: float) -> RectSet:
    """``n`` boundary copies plus a centred sub-segment of the longest chord."""
    reg = regime(domain, length)
    if reg is None:
        per, diam = domain.perimeter, domain.diameter
        n = math.floor(length / per)
        raise RegimeError(length, n * per + diam, (n + 1) * per)
    n, seg_len = reg
    pieces = domain.boundary_pieces(n).pieces if n > 0 else ()
    if seg_len > 0:
        chord = domain.longest_chord()
        mid = 0.5 * (np.asarray(chord.a) + np.asarray(chord.b))
        half = 0.5 * seg_len * chord.direction
        pieces = pieces + (Segment(mid - half, mid + half),)
    return RectSet(pieces)


def _boundary_cut(domain: ConvexDomain, m: int) -> list[RectSet]:
    """``m`` consecutive boundary pieces of equal length covering the boundary once."""
    if isinstance(domain, Disk):
        step = TWO_PI / m
        return [RectSet((Arc(domain.center, domain.radius, i * step, step),)) for i in range(m)]
    if isinstance(domain, Ellipse):
        verts = domain.boundary_vertices()
    else:
        verts = domain.array
    loop = np.vstack([verts, verts[:1]])
    seg_len = np.hypot(*np.diff(loop, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]
    cuts = np.linspace(0.0, total, m + 1)

    def point_at(s):
        k = min(np.searchsorted(cum, s, side="right") - 1, len(seg_len) - 1)
        return loop[k] + (s - cum[k]) / seg_len[k] * (loop[k + 1] - loop[k])

    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        inner = [loop[k] for k in range(1, len(loop) - 1) if a < cum[k] < b]
        pts = [point_at(a), *inner, point_at(b)]
        segs = tuple(Segment(p, q) for p, q in zip(pts[:-1], pts[1:])
                     if np.hypot(*(np.subtract(q, p))) > 1e-14)
        out.append(RectSet(segs))
    return out


def alpha_thinned_boundary(domain: ConvexDomain, length: float, m_pieces: int = 256,
                           seed: int = 0) -> RectSet:
    """Random set of expected length ``length``: full boundary copies plus thinned pieces.

    With ``k = floor(L / |dOmega|)`` and ``alpha = frac(L / |dOmega|)``, each of ``m_pieces``
    equal-length boundary pieces is kept independently with probability ``alpha``.  The
    realized length is ``RectSet.total_length``; it is not conditioned to equal ``length``.
    """
    if length < 0:
        raise ValueError("length must be nonnegative")
    if m_pieces < 8:
        raise ValueError("m_pieces must be at least 8")
    per = domain.perimeter
    k = math.floor(length / per)
    alpha = length / per - k
    pieces = domain.boundary_pieces(k).pieces if k > 0 else ()
    if alpha > 0:
        keep = np.random.default_rng(seed).random(m_pieces) < alpha
        for part, kept in zip(_boundary_cut(domain, m_pieces), keep):
            if kept:
                pieces = pieces + part.pieces
    return RectSet(pieces)


def alpha_thinning_expectation(domain: ConvexDomain, length: float) -> float:
    """Limit (many pieces) of the expected quadratic Crofton value of the thinned boundary.

    A hitting line meets the boundary twice and the two pieces hit are kept independently,
    so the count is ``2k + Bin(2, alpha)``.
    """
    per = domain.perimeter
    k = math.floor(length / per)
    alpha = length / per - k
    second = 4 * k * k + 8 * k * alpha + 2 * alpha * (1 + alpha)
    return 0.5 * per * second


@dataclass(frozen=True)
class OpacityReport:
    coverage: float
    lengthRatio: float
    samples: int
    misses: int
    degenerateEvents: int

    @property
    def opaque(self) -> bool:
        """Opaque at the sampled resolution: every sampled hitting line meets the set."""
        return self.misses == 0

    def to_dict(self) -> dict:
        return {**asdict(self), "opaque": self.opaque}


def opacity_check(rect: RectSet, domain: ConvexDomain, n: int = 10**6, seed: int = 42,
                  chunk: int = 1 << 16) -> OpacityReport:
    """Fraction of hitting lines that meet ``rect``; the set need not lie inside the domain."""
    space = HittingLineSpace(domain, seed)
    misses = degenerate = 0
    for start in range(0, n, chunk):
        lines = sample_hitting_lines(space, start, min(chunk, n - start))
        counts, deg = count_lines(lines.phi, lines.p, rect)
        misses += int(np.count_nonzero(counts == 0))
        degenerate += deg
    ratio = rect.total_length / (0.5 * domain.perimeter)
    return OpacityReport(1.0 - misses / n, ratio, n, misses, degenerate)
