"""Self-projection energy of a set by adaptive quadrature of its singular kernel.

The kernel ``|<n(x), y-x><y-x, n(y)>| / |x-y|^3`` vanishes continuously on the diagonal of
a smooth piece and behaves like ``1/|x-y|`` near transversal crossings and corner contacts,
so plain recursive subdivision converges.  Diagonal cells of a self-pair are integrated with
a collapsed (Duffy) product rule over the triangle ``t < s``, which keeps the integrand
smooth there.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .estimators import IdentityCheck, estimate_moments, require_contained
from .geometry import Arc, ConvexDomain, CurvePiece, GeometryError, RectSet, Segment, \
    overlapping_pairs, segments_collinear

_GAUSS_ORDER = 5
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(_GAUSS_ORDER)
_NODES = 0.5 * (_NODES + 1.0)
_WEIGHTS = 0.5 * _WEIGHTS
# a cell whose estimate and error are below this fraction of relTol * running total is final
_NEGLIGIBLE = 1e-2


class SingularityError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    relTol: float = 1e-6
    maxDepth: int = 40
    # absolute radius; None means 1e-3 x the shorter piece length of each pair
    singularitySplitRadius: float | None = None

    def __post_init__(self):
        if not 0.0 < self.relTol < 1.0:
            raise ValueError("relTol must lie in (0, 1)")
        if self.maxDepth < 4:
            raise ValueError("maxDepth must be at least 4")
        if self.singularitySplitRadius is not None and self.singularitySplitRadius <= 0:
            raise ValueError("singularitySplitRadius must be positive")


def pair_kernel(x, nx, y, ny) -> float:
    d = np.subtract(y, x)
    r = math.hypot(d[0], d[1])
    if r <= 1e-14:
        raise SingularityError("kernel evaluated on the diagonal x = y")
    return abs(np.dot(nx, d) * np.dot(d, ny)) / r**3


def _kernel(x, nx, y, ny):
    d = y - x
    r2 = d[..., 0] ** 2 + d[..., 1] ** 2
    num = np.abs((nx[..., 0] * d[..., 0] + nx[..., 1] * d[..., 1])
                 * (d[..., 0] * ny[..., 0] + d[..., 1] * ny[..., 1]))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / (r2 * np.sqrt(r2))
    return np.where(r2 > 0.0, out, 0.0), r2


@dataclass
class _Cells:
    s0: np.ndarray
    s1: np.ndarray
    t0: np.ndarray
    t1: np.ndarray
    w: np.ndarray
    diag: np.ndarray

    def __len__(self):
        return len(self.s0)

    @staticmethod
    def concat(parts: list["_Cells"]) -> "_Cells":
        return _Cells(*(np.concatenate([getattr(p, f) for p in parts])
                        for f in ("s0", "s1", "t0", "t1", "w", "diag")))

    def take(self, idx) -> "_Cells":
        return _Cells(self.s0[idx], self.s1[idx], self.t0[idx], self.t1[idx], self.w[idx],
                      self.diag[idx])


def _evaluate(a: CurvePiece, b: CurvePiece, cells: _Cells):
    """Cell integrals and the smallest sampled point distance in each cell."""
    value = np.zeros(len(cells))
    mind = np.full(len(cells), np.inf)
    reg = ~cells.diag
    if reg.any():
        c = cells.take(reg)
        hs, ht = c.s1 - c.s0, c.t1 - c.t0
        s = c.s0[:, None] + hs[:, None] * _NODES
        t = c.t0[:, None] + ht[:, None] * _NODES
        x, nx = a.evaluate(s)
        y, ny = b.evaluate(t)
        k, r2 = _kernel(x[:, :, None], nx[:, :, None], y[:, None, :], ny[:, None, :])
        value[reg] = c.w * hs * ht * np.einsum("i,j,mij->m", _WEIGHTS, _WEIGHTS, k)
        mind[reg] = np.sqrt(r2.min(axis=(1, 2)))
    if cells.diag.any():
        c = cells.take(cells.diag)
        h = c.s1 - c.s0
        s = c.s0[:, None, None] + h[:, None, None] * _NODES[None, :, None]
        t = c.s0[:, None, None] + h[:, None, None] * (_NODES[:, None] * _NODES[None, :])[None]
        s = np.broadcast_to(s, t.shape)
        x, nx = a.evaluate(s)
        y, ny = a.evaluate(t)
        k, _ = _kernel(x, nx, y, ny)
        # two mirror triangles, Jacobian h^2 * xi
        wts = np.outer(_WEIGHTS * _NODES, _WEIGHTS)
        value[cells.diag] = 2.0 * c.w * h * h * np.einsum("ij,mij->m", wts, k)
        mind[cells.diag] = 0.0
    return value, mind


def _children(cells: _Cells) -> tuple[_Cells, np.ndarray]:
    """Children of every cell and the parent index of each child."""
    reg = np.flatnonzero(~cells.diag)
    dg = np.flatnonzero(cells.diag)
    parts, parents = [], []
    if reg.size:
        c = cells.take(reg)
        sm, tm = 0.5 * (c.s0 + c.s1), 0.5 * (c.t0 + c.t1)
        no = np.zeros(len(reg), dtype=bool)
        for s0, s1, t0, t1 in ((c.s0, sm, c.t0, tm), (sm, c.s1, c.t0, tm),
                               (c.s0, sm, tm, c.t1), (sm, c.s1, tm, c.t1)):
            parts.append(_Cells(s0, s1, t0, t1, c.w, no))
            parents.append(reg)
    if dg.size:
        c = cells.take(dg)
        m = 0.5 * (c.s0 + c.s1)
        yes = np.ones(len(dg), dtype=bool)
        parts.append(_Cells(c.s0, m, c.s0, m, c.w, yes))
        parts.append(_Cells(m, c.s1, m, c.s1, c.w, yes))
        parts.append(_Cells(c.s0, m, m, c.s1, 2.0 * c.w, ~yes))
        parents += [dg, dg, dg]
    return _Cells.concat(parts), np.concatenate(parents)


def _initial_divisions(piece: CurvePiece) -> int:
    if isinstance(piece, Arc):
        return max(2, math.ceil(abs(piece.sweep) / (math.pi / 4)))
    return 2


def _initial_cells(a: CurvePiece, b: CurvePiece, self_pair: bool) -> _Cells:
    na = _initial_divisions(a)
    ea = np.linspace(0.0, a.length, na + 1)
    if self_pair:
        rows = [(i, j) for i in range(na) for j in range(i, na)]
        i, j = np.array(rows).T
        return _Cells(ea[i], ea[i + 1], ea[j], ea[j + 1], np.where(i == j, 1.0, 2.0), i == j)
    nb = _initial_divisions(b)
    eb = np.linspace(0.0, b.length, nb + 1)
    i, j = (g.ravel() for g in np.meshgrid(np.arange(na), np.arange(nb), indexing="ij"))
    return _Cells(ea[i], ea[i + 1], eb[j], eb[j + 1], np.ones(i.size), np.zeros(i.size, bool))


@dataclass(frozen=True)
class PairEnergy:
    value: float
    converged: bool
    cells: int
    depth: int


def energy_pair(a: CurvePiece, b: CurvePiece, spec: QuadratureSpec = QuadratureSpec(),
                self_pair: bool | None = None) -> PairEnergy:
    """Double arclength integral of the kernel over ``a x b`` (multiplicities ignored)."""
    if self_pair is None:
        self_pair = a == b
    if isinstance(a, Segment) and isinstance(b, Segment):
        if self_pair or segments_collinear(a, b):
            return PairEnergy(0.0, True, 0, 0)
    split = spec.singularitySplitRadius
    if split is None:
        split = 1e-3 * min(a.length, b.length)
    total_area = a.length * b.length
    cells = _initial_cells(a, b, self_pair)
    values, _ = _evaluate(a, b, cells)
    accepted = 0.0
    n_cells = len(cells)
    depth = 0
    converged = True
    while len(cells):
        if depth >= spec.maxDepth:
            accepted += values.sum()
            converged = False
            break
        depth += 1
        kids, parent = _children(cells)
        kid_vals, kid_dist = _evaluate(a, b, kids)
        n_cells += len(kids)
        fine = np.bincount(parent, weights=kid_vals, minlength=len(cells))
        size = np.maximum(cells.s1 - cells.s0, cells.t1 - cells.t0)
        near = np.zeros(len(cells), dtype=bool)
        np.logical_or.at(near, parent, kid_dist < np.minimum(split, size[parent]))
        near &= ~cells.diag
        err = np.abs(fine - values)
        running = accepted + fine.sum()
        area = (cells.s1 - cells.s0) * (cells.t1 - cells.t0)
        ok = (err <= spec.relTol * np.abs(fine)) | (err <= spec.relTol * running * area / total_area)
        ok &= ~near
        ok |= (np.abs(fine) + err) <= _NEGLIGIBLE * spec.relTol * running
        accepted += fine[ok].sum()
        keep = np.flatnonzero(~ok[parent])
        cells = kids.take(keep)
        values = kid_vals[keep]
    return PairEnergy(float(accepted), converged, int(n_cells), depth)


@dataclass(frozen=True)
class EnergyResult:
    value: float
    converged: bool
    pairs: list = field(default_factory=list)  # (i, j, pair value, converged)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pairs"] = [{"i": i, "j": j, "value": v, "converged": c} for i, j, v, c in self.pairs]
        return d


def energy(rect: RectSet, spec: QuadratureSpec = QuadratureSpec()) -> EnergyResult:
    """Sum over ordered piece pairs of ``mult_i * mult_j * energy_pair(i, j)``."""
    dup = overlapping_pairs(rect)
    if dup:
        raise GeometryError(f"overlapping pieces {dup}; use the multiplicity field instead")
    total = []
    pairs = []
    converged = True
    pieces = rect.pieces
    for i in range(len(pieces)):
        for j in range(i, len(pieces)):
            res = energy_pair(pieces[i], pieces[j], spec, self_pair=(i == j))
            factor = pieces[i].mult * pieces[j].mult * (1 if i == j else 2)
            total.append(factor * res.value)
            pairs.append((i, j, res.value, res.converged))
            converged &= res.converged
    return EnergyResult(math.fsum(total), converged, pairs)


def energy_identity_check(rect: RectSet, domain: ConvexDomain, n: int = 10**6, seed: int = 42,
                          spec: QuadratureSpec = QuadratureSpec()) -> IdentityCheck:
    """``(1/4) int n^2 dmu - L`` (Monte Carlo) against half the quadrature energy."""
    require_contained(rect, domain)
    if any(q.mult != 1 for q in rect.pieces):
        raise GeometryError("identity check needs multiplicity-1 pieces (copies overlap)")
    report = estimate_moments(rect, domain, n, seed, check_containment=False)
    e = energy(rect, spec)
    lhs = report.quarterSecondMomentMu - rect.total_length
    rhs = 0.5 * e.value
    tol = max(3.0 * report.stdErrQuarter, 10.0 * spec.relTol * e.value, 1e-12)
    return IdentityCheck(lhs - rhs, tol, lhs, rhs)
