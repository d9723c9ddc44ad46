"""Acceptance criteria 1-10.  Each test prints one ``CRITERION n PASS/FAIL`` line.

Run ``python3 tests/test_acceptance.py`` for the summary alone, or through pytest.
"""
import math
import time

import numpy as np
import pytest

from crofton.bounds import alpha_thinned_boundary, lemma1_check, theorem3_bounds
from crofton.energy import QuadratureSpec, energy, energy_identity_check
from crofton.estimators import closed_form_copies_plus_segment, estimate_moments
from crofton.geometry import Arc, Disk, RectSet, Segment, unit_square
from crofton.kinematic import HittingLineSpace
from crofton.optimizer import AnnealSchedule, optimize, sweep
from crofton.scene import golden_scenes

N = 10**6
CROSS_VARIANCE = (16 + 32 * (1 - math.sqrt(2) / 2)) / (4 * math.pi) - (4 / math.pi) ** 2


def _warm_up():
    sc = golden_scenes()["circle_diameter"]
    estimate_moments(sc.set, sc.domain, 1000, seed=0)


def criterion_1():
    _warm_up()
    worst = []
    ok = True
    for name, sc in golden_scenes().items():
        t0 = time.perf_counter()
        rep = estimate_moments(sc.set, sc.domain, N, seed=42)
        dt = time.perf_counter() - t0
        length = sc.set.total_length
        err = abs(rep.croftonLength - length)
        good = err <= 0.01 * length and err <= max(3 * rep.stdErrCrofton, 1e-9 * length) and dt < 5
        ok &= good
        worst.append(f"{name} rel={err / length:.1e} t={dt:.2f}s")
    return ok, "; ".join(worst)


def criterion_2():
    disk = Disk()
    rep = estimate_moments(golden_scenes()["circle"].set, disk, N, seed=42)
    exact = rep.totalMeasure == 4 * math.pi and HittingLineSpace(disk).total_measure == 4 * math.pi
    details = [f"disk totalMeasure={rep.totalMeasure!r} acceptance={rep.acceptance_rate}"]
    ok = exact and rep.acceptance_rate == 1.0
    sq = unit_square()
    rep = estimate_moments(sq.boundary_pieces(1), sq, N, seed=42)
    space = HittingLineSpace(sq)
    q = space.total_measure / space.box_measure
    se = math.sqrt(q * (1 - q) / rep.attempts)
    ok &= abs(rep.acceptance_rate - q) <= 3 * se
    details.append(f"square acceptance={rep.acceptance_rate:.5f} expected={q:.5f} se={se:.1e}")
    return ok, "; ".join(details)


def criterion_3():
    sc = golden_scenes()["cross"]
    rep = estimate_moments(sc.set, sc.domain, N, seed=42)
    ok = abs(rep.variance - 0.398) <= 0.01 and abs(rep.variance - CROSS_VARIANCE) <= 3 * rep.stdErrVariance
    return ok, f"variance={rep.variance:.5f} exact={CROSS_VARIANCE:.5f} se={rep.stdErrVariance:.1e}"


def criterion_4():
    disk = Disk()
    ok = True
    worst_se = 0.0
    worst_gap = 0.0
    for k in (0, 1, 2):
        for seg_len in (0.0, 1.0, 2.0):
            pieces = disk.boundary_pieces(k).pieces if k else ()
            if seg_len:
                half = 0.5 * seg_len
                pieces += (Segment((-half, 0.0), (half, 0.0)),)
            rect = RectSet(pieces)
            rep = estimate_moments(rect, disk, N, seed=42 + 3 * k + int(seg_len))
            exact = closed_form_copies_plus_segment(disk, k, seg_len)
            tol = max(3 * rep.stdErrQuarter, 1e-9 * exact)
            err = abs(rep.quarterSecondMomentMu - exact)
            ok &= err <= tol
            if rep.stdErrQuarter:
                worst_se = max(worst_se, err / rep.stdErrQuarter)
            lower = theorem3_bounds(disk, k * disk.perimeter + seg_len).thm3Lower
            gap = abs(lower - exact)
            worst_gap = max(worst_gap, gap)
            ok &= gap <= 1e-10
    return ok, f"max |MC-exact|={worst_se:.2f} SE; max |closed form - thm3Lower|={worst_gap:.1e}"


def criterion_5():
    spec = QuadratureSpec(relTol=1e-6)
    t0 = time.perf_counter()
    circ = energy(RectSet((Arc((0.0, 0.0), 1.0, 0.0, 2 * math.pi),)), spec)
    dt = time.perf_counter() - t0
    seg = energy(golden_scenes()["segment"].set, spec)
    cross = energy(golden_scenes()["cross"].set, spec)
    cross_exact = 16 * (1 - math.sqrt(2) / 2)
    rel_c = abs(circ.value - 4 * math.pi) / (4 * math.pi)
    rel_x = abs(cross.value - cross_exact) / cross_exact
    ok = rel_c <= 5e-3 and dt < 10 and seg.value == 0.0 and rel_x <= 1e-2
    return ok, (f"circle rel={rel_c:.1e} t={dt:.2f}s; segment={seg.value}; "
                f"cross={cross.value:.5f} rel={rel_x:.1e}")


def criterion_6():
    ok = True
    parts = []
    for name, sc in golden_scenes().items():
        chk = energy_identity_check(sc.set, sc.domain, N, seed=42)
        ok &= chk.ok
        parts.append(f"{name} {abs(chk.residual):.1e}/{chk.tolerance:.1e}")
    return ok, "; ".join(parts)


def criterion_7():
    rng = np.random.default_rng(7)
    violations = mismatches = adjacent_cases = 0
    for i in range(10_000):
        if i % 2 == 0:
            lo = int(rng.integers(0, 12))
            support = np.array([lo, lo + 1])
        else:
            support = np.unique(rng.integers(0, 13, size=int(rng.integers(1, 6))))
        w = rng.random(len(support)) + 1e-3
        dist = dict(zip(support.tolist(), (w / w.sum()).tolist()))
        try:
            lhs, rhs, tight = lemma1_check(dist)
        except AssertionError:
            violations += 1
            continue
        adjacent = support[-1] - support[0] <= 1
        adjacent_cases += adjacent
        equal = abs(lhs - rhs) <= 1e-9
        mismatches += (tight != adjacent) or (equal != adjacent)
    ok = violations == 0 and mismatches == 0
    return ok, f"violations={violations} equality mismatches={mismatches} adjacent cases={adjacent_cases}"


def criterion_8():
    disk = Disk()
    grid = np.linspace(0.0, 2 * disk.perimeter, 31)
    t0 = time.perf_counter()
    rows = sweep(disk, grid, AnnealSchedule(), restarts=4)
    dt = time.perf_counter() - t0
    worst = min(rows, key=lambda r: r.margin_in_se)
    ok = all(r.margin_in_se >= -3 for r in rows) and dt < 600
    return ok, f"min margin={worst.margin_in_se:.2f} SE at L={worst.L:.3f}; time={dt:.0f}s"


def criterion_9():
    disk = Disk()
    chord_value = 2 / math.pi * (1 - 2 / math.pi)
    b2, _ = optimize(disk, 2.0)
    bc, _ = optimize(disk, 2 * math.pi)
    ok = abs(b2.objective - chord_value) <= 0.02 and bc.objective < 0.05
    return ok, f"L=2: {b2.objective:.4f} (chord {chord_value:.4f}); L=2pi: {bc.objective:.4f}"


def criterion_10():
    disk = Disk()
    length = 3 * math.pi
    vals = []
    for k in range(50):
        rect = alpha_thinned_boundary(disk, length, 256, seed=k)
        vals.append(estimate_moments(rect, disk, 10**5, seed=1000 + k).quarterSecondMomentMu)
    vals = np.array(vals)
    mean = vals.mean()
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    bound = 9 * math.pi + math.pi / 2
    return mean <= bound + 3 * se, f"mean={mean:.4f} bound={bound:.4f} se={se:.3f}"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}


def _line(i, ok, detail):
    return f"CRITERION {i} {'PASS' if ok else 'FAIL'}: {detail}"


@pytest.mark.parametrize("i", [1, 2, 3, 4, 5, 6, 7, 8, 9, 10])
def test_criterion(i, capsys):
    ok, detail = CRITERIA[i]()
    with capsys.disabled():
        print("\n" + _line(i, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    for i, fn in CRITERIA.items():
        print(_line(i, *fn()), flush=True)
