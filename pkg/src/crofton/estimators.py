"""Monte Carlo moments of the intersection count under the hitting-line measure."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, astuple, dataclass

import numpy as np

from . import _kernels
from .geometry import ConvexDomain, RectSet, uncontained_pieces
from .kinematic import HittingLineSpace, count_lines, sample_hitting_lines

DEFAULT_CHUNK = 1 << 16


class ContainmentError(ValueError):
    def __init__(self, indices, rect: RectSet):
        self.indices = list(indices)
        listing = "; ".join(f"#{i}: {rect.pieces[i]}" for i in self.indices)
        super().__init__(f"pieces not contained in the closed domain: {listing}")


def require_contained(rect: RectSet, domain: ConvexDomain) -> None:
    bad = uncontained_pieces(rect, domain)
    if bad:
        raise ContainmentError(bad, rect)


def worker_count() -> int:
    env = os.environ.get("CROFTON_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class MomentReport:
    sampleCount: int
    meanCount: float
    secondMoment: float
    variance: float
    croftonLength: float
    quarterSecondMomentMu: float
    stdErrMean: float
    stdErrSecond: float
    stdErrVariance: float
    degenerateEvents: int
    attempts: int
    totalMeasure: float

    @property
    def acceptance_rate(self) -> float:
        return self.sampleCount / self.attempts

    @property
    def stdErrCrofton(self) -> float:
        return self.totalMeasure / 4.0 * self.stdErrMean

    @property
    def stdErrQuarter(self) -> float:
        return self.totalMeasure / 4.0 * self.stdErrSecond

    def to_dict(self) -> dict:
        d = asdict(self)
        d["acceptanceRate"] = self.acceptance_rate
        return d


@dataclass
class _Sums:
    n: int = 0
    s1: int = 0
    s2: int = 0
    s3: int = 0
    s4: int = 0
    degenerate: int = 0
    attempts: int = 0

    def merge(self, other: "_Sums") -> "_Sums":
        return _Sums(*(a + b for a, b in zip(astuple(self), astuple(other))))


def sample_counts(rect: RectSet, space: HittingLineSpace, start: int, count: int):
    lines = sample_hitting_lines(space, start, count)
    counts, degenerate = count_lines(lines.phi, lines.p, rect)
    return counts, degenerate, int(lines.attempts.sum())


def _chunk_sums(rect, space, start, count) -> _Sums:
    counts, degenerate, attempts = sample_counts(rect, space, start, count)
    s1, s2, s3, s4 = _kernels.moment_sums(counts)
    return _Sums(count, int(s1), int(s2), int(s3), int(s4), degenerate, attempts)


def report_from_sums(sums: _Sums, perimeter: float) -> MomentReport:
    n = sums.n
    m1, m2, m3, m4 = (sums.s1 / n, sums.s2 / n, sums.s3 / n, sums.s4 / n)
    var = m2 - m1 * m1
    # integer power sums are exact, so these are free of accumulation error
    var_n = max(var, 0.0)
    var_n2 = max(m4 - m2 * m2, 0.0)
    # delta-method variance of the plug-in variance: Var[(n - m)^2]
    c4 = m4 - 4 * m3 * m1 + 6 * m2 * m1**2 - 3 * m1**4
    var_v = max(c4 - var * var, 0.0)
    half = perimeter / 2.0
    return MomentReport(
        sampleCount=n,
        meanCount=m1,
        secondMoment=m2,
        variance=var,
        croftonLength=half * m1,
        quarterSecondMomentMu=half * m2,
        stdErrMean=math.sqrt(var_n / n),
        stdErrSecond=math.sqrt(var_n2 / n),
        stdErrVariance=math.sqrt(var_v / n),
        degenerateEvents=sums.degenerate,
        attempts=sums.attempts,
        totalMeasure=2.0 * perimeter,
    )


def estimate_moments(rect: RectSet, domain: ConvexDomain, n: int = 10**6, seed: int = 42,
                     chunk: int = DEFAULT_CHUNK, check_containment: bool = True) -> MomentReport:
    """Sample moments of ``n_l(rect)`` over ``n`` hitting lines.

    Deterministic in ``(seed, n)``; the thread count (``CROFTON_THREADS``) never changes the
    result because the power sums are integers.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if check_containment:
        require_contained(rect, domain)
    space = HittingLineSpace(domain, seed)
    starts = list(range(0, n, chunk))
    jobs = [(s, min(chunk, n - s)) for s in starts]
    workers = min(worker_count(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda j: _chunk_sums(rect, space, *j), jobs))
    else:
        parts = [_chunk_sums(rect, space, *j) for j in jobs]
    total = _Sums()
    for part in parts:
        total = total.merge(part)
    return report_from_sums(total, domain.perimeter)


@dataclass(frozen=True)
class IdentityCheck:
    residual: float
    tolerance: float
    lhs: float
    rhs: float

    @property
    def ok(self) -> bool:
        return abs(self.residual) < self.tolerance

    def to_dict(self) -> dict:
        return {**asdict(self), "ok": self.ok}


def variance_identity_check(report: MomentReport, length: float, perimeter: float) -> IdentityCheck:
    """Centered second moment against ``int n^2 dmu - 8 L^2 / |dOmega|``.

    Both sides are estimated from the same report; they agree up to Crofton noise in the mean.
    """
    mu_hit = 2.0 * perimeter
    m = 2.0 * length / perimeter
    centered = report.secondMoment - 2.0 * m * report.meanCount + m * m
    lhs = mu_hit * centered
    rhs = mu_hit * report.secondMoment - 8.0 * length**2 / perimeter
    se = abs(mu_hit * 2.0 * m) * report.stdErrMean
    return IdentityCheck(lhs - rhs, max(3.0 * se, 1e-12 * max(1.0, abs(rhs))), lhs, rhs)


def closed_form_copies_plus_segment(domain: ConvexDomain, k: int, seg_len: float) -> float:
    """``(1/4) int n^2 dmu`` for ``k`` boundary copies plus a chord of length ``seg_len``."""
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a nonnegative integer, got {k}")
    diam = domain.diameter
    if not (0.0 <= seg_len <= diam * (1 + 1e-12)):
        raise ValueError(f"segment length {seg_len} outside [0, {diam}]")
    per = domain.perimeter
    direct = 2.0 * k * k * per + (4 * k + 1) * seg_len
    length = k * per + seg_len
    via_length = 2.0 * length**2 / per + seg_len * (1.0 - 2.0 * seg_len / per)
    if abs(direct - via_length) > 1e-10 * max(1.0, abs(direct)):
        raise AssertionError(f"closed forms disagree: {direct} vs {via_length}")
    return direct
