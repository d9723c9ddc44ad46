import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crofton.bounds import (RegimeError, alpha_thinned_boundary, alpha_thinning_expectation,
                            extremal_set, frac, lemma1_bound, lemma1_check, opacity_check,
                            theorem3_bounds)
from crofton.estimators import estimate_moments
from crofton.geometry import Arc, RectSet, Segment
from crofton.scene import golden_scenes


@pytest.mark.parametrize("mean, expected", [(1.5, 2.5), (3.0, 9.0), (4 / math.pi, 1.8197)])
def test_integer_bound_examples(mean, expected):
    assert lemma1_bound(mean) == pytest.approx(expected, abs=1e-4)


@pytest.mark.parametrize("dist, expected", [
    ({1: 0.5, 2: 0.5}, (2.5, 2.5, True)),
    ({0: 0.5, 3: 0.5}, (4.5, 2.5, False)),
    ({5: 1.0}, (25.0, 25.0, True)),
])
def test_integer_bound_check(dist, expected):
    lhs, rhs, tight = lemma1_check(dist)
    assert (lhs, rhs, tight) == pytest.approx(expected) and tight is expected[2]


def test_integer_bound_invalid():
    for bad in ({}, {-1: 1.0}, {1: 0.4, 2: 0.4}, {1: 1.2, 2: -0.2}):
        with pytest.raises(ValueError):
            lemma1_check(bad)
    with pytest.raises(ValueError):
        lemma1_bound(-0.1)


@settings(max_examples=200)
@given(st.dictionaries(st.integers(0, 12), st.floats(0.01, 1.0), min_size=1, max_size=6))
def test_integer_bound_property(weights):
    total = sum(weights.values())
    dist = {k: v / total for k, v in weights.items()}
    lhs, rhs, tight = lemma1_check(dist)
    keys = sorted(dist)
    adjacent = keys[-1] - keys[0] <= 1
    assert tight == adjacent
    if adjacent:
        assert lhs == pytest.approx(rhs, abs=1e-9)
    else:
        assert lhs > rhs + 1e-9


def test_sandwich_disk_L4(disk):
    rep = theorem3_bounds(disk, 4.0)
    assert rep.trivialLowerQuadratic == pytest.approx(16 / math.pi, abs=1e-4)
    assert rep.thm3Lower == pytest.approx(5.7169, abs=1e-4)
    assert rep.thm3Upper == pytest.approx(6.6638, abs=1e-4)
    assert not rep.inTheoremRegime and rep.extremalValue is None


def test_sandwich_in_regime(disk):
    rep = theorem3_bounds(disk, 2 * math.pi + 1)
    assert rep.inTheoremRegime and rep.copies == 1
    assert rep.extremalValue == pytest.approx(4 * math.pi + 5, abs=1e-12)
    assert rep.extremalValue == pytest.approx(rep.thm3Lower, abs=1e-10)


def test_sandwich_zero(square):
    rep = theorem3_bounds(square, 0.0)
    assert rep.thm3Lower == 0 and rep.trivialLowerQuadratic == 0 and rep.extremalValue == 0
    assert rep.thm3Upper == pytest.approx(square.perimeter / 4)


@pytest.mark.parametrize("name", ["disk", "square", "hexagon", "ellipse"])
def test_sandwich_grid(name, request):
    dom = request.getfixturevalue(name)
    per = dom.perimeter
    for j in range(31):
        rep = theorem3_bounds(dom, 0.1 * j * per)
        assert 0 <= rep.fractional < 1
        assert rep.thm3Lower <= rep.thm3Upper + 1e-12
        assert rep.trivialLowerQuadratic <= rep.thm3Lower + 1e-12
        if rep.inTheoremRegime:
            assert abs(rep.extremalValue - rep.thm3Lower) <= 1e-10 * max(1.0, rep.thm3Lower)


def test_extremal_examples(disk):
    seg = extremal_set(disk, 2.0)
    assert len(seg.pieces) == 1 and isinstance(seg.pieces[0], Segment)
    assert seg.total_length == pytest.approx(2.0, abs=1e-10)
    circ = extremal_set(disk, 2 * math.pi)
    assert len(circ.pieces) == 1 and isinstance(circ.pieces[0], Arc)
    with pytest.raises(RegimeError) as exc:
        extremal_set(disk, 5.0)
    assert exc.value.below == pytest.approx(2.0) and exc.value.above == pytest.approx(2 * math.pi)


@pytest.mark.parametrize("name, rel", [("disk", 1e-15), ("square", 1e-15), ("ellipse", 1e-5)])
def test_extremal_length(name, rel, request):
    # ellipse boundary copies are inscribed polygons, short of the true perimeter
    dom = request.getfixturevalue(name)
    for length in (0.3 * dom.diameter, dom.perimeter, 2 * dom.perimeter + 0.7 * dom.diameter):
        assert extremal_set(dom, length).total_length == pytest.approx(length, rel=rel, abs=1e-10)


def test_thinning_alpha_zero(disk):
    a = alpha_thinned_boundary(disk, 4 * math.pi, seed=1)
    b = alpha_thinned_boundary(disk, 4 * math.pi, seed=2)
    assert a == b and a.total_length == pytest.approx(4 * math.pi)


def test_thinning_piece_count(square):
    draws = [alpha_thinned_boundary(square, 0.5 * square.perimeter, 256, seed=s) for s in range(40)]
    lengths = np.array([d.total_length for d in draws])
    se = lengths.std(ddof=1) / math.sqrt(len(lengths))
    assert abs(lengths.mean() - 2.0) < 4 * se


def test_thinning_expectation(disk):
    assert alpha_thinning_expectation(disk, 3 * math.pi) == pytest.approx(9.5 * math.pi)
    assert alpha_thinning_expectation(disk, 2 * math.pi) == pytest.approx(4 * math.pi)
    for length in np.linspace(0, 4 * math.pi, 13):
        assert alpha_thinning_expectation(disk, length) <= theorem3_bounds(disk, length).thm3Upper + 1e-9


def test_opacity_examples(disk):
    circle = golden_scenes()["circle"].set
    rep = opacity_check(circle, disk, 100_000)
    assert rep.coverage == 1.0 and rep.lengthRatio == pytest.approx(2.0) and rep.opaque
    u_shape = RectSet((Arc((0, 0), 1, math.pi, math.pi), Segment((-1, 0), (-1, 1)), Segment((1, 0), (1, 1))))
    rep = opacity_check(u_shape, disk, 100_000)
    assert rep.coverage == 1.0
    assert rep.lengthRatio == pytest.approx((math.pi + 2) / math.pi)
    rep = opacity_check(golden_scenes()["segment"].set, disk, 100_000)
    se = math.sqrt(2 / math.pi * (1 - 2 / math.pi) / 100_000)
    assert abs(rep.coverage - 2 / math.pi) < 3 * se and not rep.opaque


def test_frac():
    assert frac(2.25) == 0.25 and frac(3.0) == 0.0
