"""Simulated annealing over polyline sets of fixed length inside a convex domain.

The objective is the variance of the intersection count under the hitting-line
probability, evaluated on a fixed panel of lines (common random numbers), so the
chain optimizes a deterministic function of the geometry.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _anneal
from .bounds import frac
from .estimators import worker_count
from .geometry import ConvexDomain, ConvexPolygon, Disk, Ellipse, GeometryError, RectSet, \
    Segment, TWO_PI
from .kinematic import HittingLineSpace, canonical_lines, count_lines, sample_hitting_lines

LENGTH_RTOL = 1e-9
CONTAIN_TOL = _anneal.CONTAIN_TOL


@dataclass(frozen=True)
class Configuration:
    polylines: tuple  # tuple of (n_i, 2) float arrays, n_i >= 2
    targetLength: float

    def __post_init__(self):
        polys = tuple(np.array(p, dtype=float).reshape(-1, 2) for p in self.polylines)
        for i, p in enumerate(polys):
            if len(p) < 2:
                raise GeometryError(f"polyline {i} needs at least 2 vertices")
            p.setflags(write=False)
        object.__setattr__(self, "polylines", polys)
        if not self.targetLength >= 0:
            raise GeometryError("targetLength must be nonnegative")

    @property
    def length(self) -> float:
        return math.fsum(float(np.hypot(*np.diff(p, axis=0).T).sum()) for p in self.polylines)

    @property
    def vertex_count(self) -> int:
        return sum(len(p) for p in self.polylines)

    def to_rectset(self) -> RectSet:
        segs = []
        for p in self.polylines:
            for a, b in zip(p[:-1], p[1:]):
                if math.hypot(*(b - a)) > 1e-14:
                    segs.append(Segment(a, b))
        return RectSet(tuple(segs))

    def validate(self, domain: ConvexDomain) -> None:
        """Raise unless the length and containment invariants hold."""
        if self.targetLength > 0 and abs(self.length - self.targetLength) > LENGTH_RTOL * self.targetLength:
            raise GeometryError(f"length {self.length} differs from target {self.targetLength}")
        for i, p in enumerate(self.polylines):
            bad = np.flatnonzero(~domain.contains(p, tol=CONTAIN_TOL))
            if bad.size:
                raise GeometryError(f"polyline {i} has vertices {bad.tolist()} outside the domain")


EMPTY = Configuration((), 0.0)


@dataclass(frozen=True)
class AnnealSchedule:
    steps: int = 100_000
    initialTemp: float = 5e-3
    finalTemp: float = 1e-6
    panelSize: int = 10_000
    moveScale: float = 20.0
    seed: int = 0
    # splits are almost always accepted, so the cap also limits panel overfitting
    maxVertices: int = 48
    # probabilities of perturb / split / delete / translate
    moveWeights: tuple = (0.96, 0.01, 0.02, 0.01)
    angularBins: int = 64
    # chance that the length-compensating vertex is adjacent to the perturbed one
    adjacentPartner: float = 0.5

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be positive")
        if not 0 < self.finalTemp < self.initialTemp:
            raise ValueError("need 0 < finalTemp < initialTemp")
        if self.panelSize < 10_000:
            raise ValueError("panelSize must be at least 10^4")
        if self.moveScale <= 0:
            raise ValueError("moveScale must be positive")
        if len(self.moveWeights) != 4 or min(self.moveWeights) < 0 or sum(self.moveWeights) <= 0:
            raise ValueError("moveWeights needs four nonnegative entries")
        if self.maxVertices < 3:
            raise ValueError("maxVertices must be at least 3")


# ---------------------------------------------------------------------------
# panel


@dataclass(frozen=True)
class Panel:
    domain: ConvexDomain
    phi: np.ndarray
    p: np.ndarray
    seed: int

    @classmethod
    def draw(cls, domain: ConvexDomain, size: int, seed: int) -> "Panel":
        lines = sample_hitting_lines(HittingLineSpace(domain, seed), 0, size)
        return cls(domain, lines.phi, lines.p, seed)

    def __len__(self):
        return len(self.phi)

    def counts(self, config: Configuration) -> np.ndarray:
        if not config.polylines:
            return np.zeros(len(self), dtype=np.int64)
        return count_lines(self.phi, self.p, config.to_rectset())[0]


def objective(config: Configuration, panel: Panel) -> float:
    """Population variance of the intersection count over the panel lines."""
    return float(np.var(panel.counts(config)))


def objective_with_se(config: Configuration, panel: Panel) -> tuple[float, float]:
    """Panel variance and its delta-method standard error."""
    c = panel.counts(config).astype(float)
    n = len(c)
    d = (c - c.mean()) ** 2
    var = d.mean()
    return float(var), float(d.std() / math.sqrt(n))


# ---------------------------------------------------------------------------
# compiled chain plumbing


def _domain_arrays(domain: ConvexDomain, shift):
    sx, sy = shift
    hn = np.zeros((0, 2))
    ho = np.zeros(0)
    poly = np.zeros((0, 2))
    if isinstance(domain, Disk):
        kind = _anneal.DISK
        dpar = np.array([domain.center[0] - sx, domain.center[1] - sy, domain.radius, 0.0, 0.0])
    elif isinstance(domain, ConvexPolygon):
        kind = _anneal.POLYGON
        poly = domain.array - np.array([sx, sy])
        nrm, off = domain._halfplanes()
        hn = np.ascontiguousarray(nrm, dtype=float)
        ho = np.ascontiguousarray(off - nrm @ np.array([sx, sy]), dtype=float)
        dpar = np.zeros(5)
    elif isinstance(domain, Ellipse):
        kind = _anneal.ELLIPSE
        dpar = np.array([domain.center[0] - sx, domain.center[1] - sy, *domain.semi_axes,
                         domain.rotation])
    else:
        raise TypeError(f"unsupported domain {type(domain).__name__}")
    return kind, dpar, np.ascontiguousarray(poly), hn, ho


def _binned_panel(panel: Panel, shift, bins: int):
    """Canonical panel lines in shifted coordinates, binned by angle and sorted by offset."""
    sx, sy = shift
    phi, p = canonical_lines(panel.phi, panel.p)
    p = p - sx * np.cos(phi) - sy * np.sin(phi)
    b = np.minimum((phi / math.pi * bins).astype(np.int64), bins - 1)
    order = np.lexsort((p, b))
    ptr = np.searchsorted(b[order], np.arange(bins + 1)).astype(np.int64)
    mid = (np.arange(bins) + 0.5) * math.pi / bins
    phi_s = phi[order]
    return (np.cos(phi_s), np.sin(phi_s), np.ascontiguousarray(p[order]), ptr,
            np.cos(mid), np.sin(mid), 0.5 * math.pi / bins)


@dataclass
class AnnealResult:
    best: Configuration
    panelObjective: float  # best objective on the optimization panel
    objective: float  # re-evaluated on the independent 10x panel
    objectiveSE: float
    history: dict = field(repr=False)  # step, temp, objective, accepted, move
    seed: int = 0

    @property
    def acceptance_rate(self) -> float:
        return float(self.history["accepted"].mean()) if len(self.history["step"]) else 0.0

    def history_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "temp", "objective", "accepted"])
        h = self.history
        for row in zip(h["step"], h["temp"], h["objective"], h["accepted"]):
            w.writerow([int(row[0]), repr(float(row[1])), repr(float(row[2])), int(row[3])])
        return buf.getvalue()


def _check_init(domain: ConvexDomain, length: float, init: Configuration, cap: int):
    if abs(init.targetLength - length) > LENGTH_RTOL * max(length, 1.0):
        raise GeometryError(f"init targetLength {init.targetLength} differs from L={length}")
    init.validate(domain)
    too_long = [i for i, p in enumerate(init.polylines) if len(p) > cap]
    if too_long:
        raise GeometryError(f"polylines {too_long} exceed maxVertices={cap}")


def _chain_seed(seed: int, restart: int) -> int:
    return int(np.random.SeedSequence([seed, restart]).generate_state(1)[0])


def _eval_seed(seed: int) -> int:
    return int(np.random.SeedSequence([seed, 0xE7A1]).generate_state(1, dtype=np.uint64)[0])


def anneal(domain: ConvexDomain, length: float, init: Configuration,
           schedule: AnnealSchedule = AnnealSchedule(), panel: Panel | None = None,
           eval_panel: Panel | None = None, restart: int = 0) -> AnnealResult:
    """One annealing chain; deterministic in ``(schedule.seed, restart)``.

    Vertex perturbations keep the length exactly by placing the moved vertex on the
    ellipse (or circle, for an endpoint) of constant adjacent-edge length.  The other
    moves restore the polyline length by centroid rescaling alternated with clamping.
    """
    if length == 0:
        return _empty_result(schedule.seed)
    _check_init(domain, length, init, schedule.maxVertices)
    if panel is None:
        panel = Panel.draw(domain, schedule.panelSize, schedule.seed)
    if eval_panel is None:
        eval_panel = Panel.draw(domain, 10 * schedule.panelSize, _eval_seed(schedule.seed))
    shift = np.array(domain.reference_point)
    cap = schedule.maxVertices
    verts = np.zeros((len(init.polylines), cap, 2))
    nv = np.zeros(len(init.polylines), dtype=np.int64)
    for k, p in enumerate(init.polylines):
        verts[k, :len(p)] = p - shift
        nv[k] = len(p)
    w = np.asarray(schedule.moveWeights, dtype=float)
    cdf = np.cumsum(w / w.sum())
    seed = _chain_seed(schedule.seed, restart)
    best_v, best_n, best_obj, h_obj, h_temp, h_acc, h_move = _anneal.run_chain(
        verts, nv, *_binned_panel(panel, shift, schedule.angularBins),
        *_domain_arrays(domain, shift),
        schedule.steps, schedule.initialTemp, schedule.finalTemp, schedule.moveScale, cdf,
        schedule.adjacentPartner, seed)
    best = Configuration(tuple(best_v[k, :best_n[k]] + shift for k in range(len(best_n))),
                         length)
    obj, se = objective_with_se(best, eval_panel)
    history = {"step": np.arange(schedule.steps), "temp": h_temp, "objective": h_obj,
               "accepted": h_acc, "move": h_move}
    return AnnealResult(best, float(best_obj), obj, se, history, seed)


def _empty_result(seed: int) -> AnnealResult:
    history = {"step": np.zeros(0, dtype=np.int64), "temp": np.zeros(0), "objective": np.zeros(0),
               "accepted": np.zeros(0, dtype=bool), "move": np.zeros(0, dtype=np.int8)}
    return AnnealResult(EMPTY, 0.0, 0.0, 0.0, history, seed)


# ---------------------------------------------------------------------------
# initial configurations


def _boundary_point(domain: ConvexDomain, theta: float) -> np.ndarray:
    """Boundary point on the ray from the reference point at angle ``theta``."""
    c = np.array(domain.reference_point)
    u = np.array([math.cos(theta), math.sin(theta)])
    lo, hi = 0.0, 2.0 * domain.circumradius + 1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if domain.contains((c + mid * u)[None], tol=0.0)[0]:
            lo = mid
        else:
            hi = mid
    return c + lo * u


def polygon_path(domain: ConvexDomain, length: float, sides: int = 4, rotation: float = 0.0,
                 shrink: float = 1.0 - 1e-9) -> Configuration:
    """Walk around an inscribed ``sides``-gon (repeating laps) until the length is used up."""
    if length == 0:
        return EMPTY
    c = np.array(domain.reference_point)
    ring = np.array([c + shrink * (_boundary_point(domain, rotation + TWO_PI * i / sides) - c)
                     for i in range(sides)])
    pts = [ring[0]]
    left = length
    i = 0
    while left > 1e-15 * length:
        a, b = ring[i % sides], ring[(i + 1) % sides]
        d = math.hypot(*(b - a))
        if d >= left:
            pts.append(a + (b - a) * (left / d))
            left = 0.0
        else:
            pts.append(b)
            left -= d
        i += 1
    return _exact_length(Configuration((np.array(pts),), length))


def random_polyline(domain: ConvexDomain, length: float, vertices: int = 3,
                    seed: int = 0, tries: int = 10_000) -> Configuration:
    """Random walk with equal steps ``L / (vertices - 1)`` that stays in the domain."""
    if length == 0:
        return EMPTY
    if vertices < 2:
        raise ValueError("need at least 2 vertices")
    rng = np.random.default_rng(seed)
    step = length / (vertices - 1)
    c = np.array(domain.reference_point)
    r = domain.circumradius
    for _ in range(tries):
        start = c + rng.uniform(-r, r, 2)
        if not domain.contains(start[None])[0]:
            continue
        pts = [start]
        for _ in range(vertices - 1):
            ang = rng.uniform(0, TWO_PI, 64)
            cand = pts[-1] + step * np.column_stack([np.cos(ang), np.sin(ang)])
            ok = np.flatnonzero(domain.contains(cand, tol=0.0))
            if not ok.size:
                break
            pts.append(cand[ok[0]])
        if len(pts) == vertices:
            return _exact_length(Configuration((np.array(pts),), length))
    raise GeometryError(f"no random {vertices}-vertex polyline of length {length} found")


def _exact_length(config: Configuration) -> Configuration:
    """Rescale the last edge so the length matches the target to rounding."""
    p = np.array(config.polylines[-1])
    rest = config.length - math.hypot(*(p[-1] - p[-2]))
    want = config.targetLength - rest
    d = p[-1] - p[-2]
    p[-1] = p[-2] + d * (want / math.hypot(*d))
    return Configuration(config.polylines[:-1] + (p,), config.targetLength)


def default_init(domain: ConvexDomain, length: float, restart: int, seed: int = 0,
                 cap: int = 48) -> Configuration:
    """Even restarts start from an inscribed 16-gon path, odd ones from a random walk."""
    if restart % 2 == 0:
        sides = 16
        side = 2 * math.sin(math.pi / sides) * domain.circumradius
        if length / side + 2 <= cap:
            return polygon_path(domain, length, sides, rotation=restart * 0.37)
    verts = int(min(max(3, math.ceil(length / (0.25 * domain.diameter)) + 1), cap // 2))
    return random_polyline(domain, length, verts, seed=_chain_seed(seed, 1000 + restart))


# ---------------------------------------------------------------------------
# restarts and sweeps


InitFactory = Callable[[ConvexDomain, float, int], Configuration]


def optimize(domain: ConvexDomain, length: float, schedule: AnnealSchedule = AnnealSchedule(),
             restarts: int = 4, init: InitFactory | None = None) -> tuple[AnnealResult, list]:
    """Best of ``restarts`` independent chains sharing one panel (selected on the 10x panel)."""
    if length < 0:
        raise ValueError("length must be nonnegative")
    if length == 0:
        r = _empty_result(schedule.seed)
        return r, [r]
    if init is None:
        def init(d, L, r):
            return default_init(d, L, r, schedule.seed, schedule.maxVertices)
    panel = Panel.draw(domain, schedule.panelSize, schedule.seed)
    eval_panel = Panel.draw(domain, 10 * schedule.panelSize, _eval_seed(schedule.seed))
    starts = [init(domain, length, r) for r in range(restarts)]

    def job(r):
        return anneal(domain, length, starts[r], schedule, panel, eval_panel, restart=r)

    with ThreadPoolExecutor(max_workers=min(worker_count(), restarts)) as pool:
        results = list(pool.map(job, range(restarts)))
    best = min(results, key=lambda res: (res.objective, res.panelObjective))
    return best, results


@dataclass(frozen=True)
class SweepRow:
    L: float
    bestObjective: float
    objectiveSE: float
    lowerBound: float  # sandwich lower bound in hitting-line variance units
    upperBound: float
    panelObjective: float

    @property
    def margin_in_se(self) -> float:
        """``(bestObjective - lowerBound) / SE``; negative values flag a bound violation."""
        if self.objectiveSE == 0:
            return math.inf if self.bestObjective >= self.lowerBound else -math.inf
        return (self.bestObjective - self.lowerBound) / self.objectiveSE


def nu_variance_bounds(domain: ConvexDomain, length: float) -> tuple[float, float]:
    f = frac(2.0 * length / domain.perimeter)
    return f - f * f, 0.5


def sweep(domain: ConvexDomain, grid: Sequence[float], schedule: AnnealSchedule = AnnealSchedule(),
          restarts: int = 4, progress: Callable[[SweepRow], None] | None = None) -> list[SweepRow]:
    rows = []
    for length in grid:
        best, _ = optimize(domain, float(length), schedule, restarts)
        lo, hi = nu_variance_bounds(domain, float(length))
        row = SweepRow(float(length), best.objective, best.objectiveSE, lo, hi, best.panelObjective)
        rows.append(row)
        if progress is not None:
            progress(row)
    return rows


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["L", "bestObjective", "objectiveSE", "lowerBound", "upperBound", "panelObjective"])
    for r in rows:
        w.writerow([repr(r.L), repr(r.bestObjective), repr(r.objectiveSE), repr(r.lowerBound),
                    repr(r.upperBound), repr(r.panelObjective)])
    return buf.getvalue()
