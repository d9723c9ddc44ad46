import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crofton.geometry import (Arc, ConvexPolygon, Disk, Ellipse, GeometryError,
                              ParameterDomainError, RectSet, Segment, boundary_pieces,
                              domain_diameter, domain_perimeter, longest_chord, overlapping_pairs,
                              piece_length, point_and_normal, support_function, unit_square, width)

coord = st.floats(-5, 5, allow_nan=False)
angle = st.floats(-10, 10, allow_nan=False)


@pytest.mark.parametrize("piece, expected", [
    (Segment((0, 0), (3, 4)), 5.0),
    (Arc((0, 0), 1.0, 0.0, 2 * math.pi), 2 * math.pi),
    (Arc((0, 0), 2.0, 0.0, math.pi / 2), math.pi),
])
def test_piece_length(piece, expected):
    assert piece_length(piece) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("piece, s, point, normal", [
    (Segment((0, 0), (2, 0)), 1.0, (1, 0), (0, 1)),
    (Arc((0, 0), 1.0, 0.0, 2 * math.pi), math.pi / 2, (0, 1), (0, 1)),
    (Segment((0, 0), (0, 2)), 2.0, (0, 2), (-1, 0)),
])
def test_point_and_normal(piece, s, point, normal):
    x, n = point_and_normal(piece, s)
    np.testing.assert_allclose(x, point, atol=1e-15)
    np.testing.assert_allclose(n, normal, atol=1e-15)
    assert abs(np.hypot(*n) - 1) < 1e-12


def test_point_and_normal_out_of_range():
    with pytest.raises(ParameterDomainError):
        point_and_normal(Segment((0, 0), (1, 0)), 1.5)
    with pytest.raises(ParameterDomainError):
        point_and_normal(Arc((0, 0), 1, 0, 1), -0.1)


def test_invalid_pieces():
    with pytest.raises(GeometryError):
        Segment((1, 1), (1, 1))
    with pytest.raises(GeometryError):
        Arc((0, 0), 0.0, 0, 1)
    with pytest.raises(GeometryError):
        Arc((0, 0), 1.0, 0, 7.0)
    with pytest.raises(GeometryError):
        Segment((0, 0), (1, 0), mult=0)


def test_rectset_total_length():
    r = RectSet((Segment((0, 0), (3, 4), mult=2), Arc((0, 0), 1, 0, math.pi)))
    assert r.total_length == pytest.approx(10 + math.pi, rel=1e-12)
    assert RectSet(()).total_length == 0


def test_support_examples(square):
    assert support_function(Disk(), 0.7) == pytest.approx(1.0)
    assert support_function(square, 0.0) == pytest.approx(1.0)
    assert support_function(Disk((1, 0), 1), math.pi) == pytest.approx(0.0, abs=1e-15)


def test_perimeter_diameter_chord(disk, square):
    assert domain_perimeter(disk) == pytest.approx(2 * math.pi, rel=1e-15)
    assert domain_diameter(disk) == 2.0
    c = longest_chord(disk)
    assert {c.a, c.b} == {(-1.0, 0.0), (1.0, 0.0)}
    assert domain_perimeter(square) == 4.0
    assert domain_diameter(square) == pytest.approx(math.sqrt(2), rel=1e-15)
    c = longest_chord(square)
    assert {c.a, c.b} == {(0.0, 0.0), (1.0, 1.0)}
    assert domain_diameter(Ellipse((0, 0), (2, 1))) == 4.0


def test_ellipse_perimeter():
    # Ramanujan's second approximation is accurate to ~1e-10 at this eccentricity
    a, b = 2.0, 1.0
    h = ((a - b) / (a + b)) ** 2
    ram = math.pi * (a + b) * (1 + 3 * h / (10 + math.sqrt(4 - 3 * h)))
    assert Ellipse((0, 0), (a, b)).perimeter == pytest.approx(ram, rel=1e-9)
    assert Ellipse((0, 0), (1, 1)).perimeter == pytest.approx(2 * math.pi, rel=1e-14)


def test_boundary_pieces(disk, square, ellipse):
    b1 = boundary_pieces(disk, 1)
    assert len(b1) == 1 and b1.pieces[0].is_full_circle
    assert b1.total_length == pytest.approx(2 * math.pi, rel=1e-15)
    assert boundary_pieces(disk, 3).total_length == pytest.approx(6 * math.pi, rel=1e-15)
    sq = boundary_pieces(square, 1)
    assert len(sq) == 4 and sq.total_length == 4.0
    assert boundary_pieces(square, 2).total_length == 8.0
    eb = ellipse.boundary_pieces(1)
    # chord deviation 1e-4 costs a few parts per million of length
    assert eb.total_length == pytest.approx(ellipse.perimeter, rel=1e-5)
    assert eb.total_length < ellipse.perimeter
    with pytest.raises(GeometryError):
        boundary_pieces(disk, 0)


def test_polygon_validation():
    with pytest.raises(GeometryError):
        ConvexPolygon(((0, 0), (1, 0), (2, 0), (1, 1)))
    with pytest.raises(GeometryError):
        ConvexPolygon(((0, 0), (2, 0), (1, 0.2), (1, 2)))
    p = ConvexPolygon(((0, 1), (1, 1), (1, 0), (0, 0), (0, 0)))
    assert len(p.vertices) == 4
    assert p.support(0.0) == pytest.approx(1.0)


@given(st.sampled_from(["seg", "arc"]), coord, coord, coord, coord, angle, st.floats(0, 1))
def test_normal_orthogonal_to_tangent(kind, x0, y0, x1, y1, start, frac):
    if kind == "seg":
        if math.hypot(x1 - x0, y1 - y0) < 1e-3:
            return
        piece = Segment((x0, y0), (x1, y1))
    else:
        r = 0.1 + abs(x1)
        sweep = (0.05 + abs(y1)) * (1 if y1 >= 0 else -1)
        piece = Arc((x0, y0), r, start, max(min(sweep, 2 * math.pi), -2 * math.pi))
    # central difference: exact tangent direction for segments and circles up to rounding
    h = 1e-2 * piece.length
    s = h + frac * (piece.length - 2 * h)
    a, _ = point_and_normal(piece, s - h)
    b, _ = point_and_normal(piece, s + h)
    tangent = (b - a) / np.hypot(*(b - a))
    _, n = point_and_normal(piece, s)
    assert abs(np.dot(tangent, n)) < 1e-10
    assert abs(np.hypot(*n) - 1) < 1e-12


@pytest.mark.parametrize("name", ["disk", "square", "hexagon", "ellipse"])
def test_support_dominates_projections(name, request):
    dom = request.getfixturevalue(name)
    rng = np.random.default_rng(7)
    c = np.array(dom.reference_point)
    r = dom.circumradius
    pts = c + rng.uniform(-r, r, size=(4000, 2))
    pts = pts[dom.contains(pts)][:1000]
    assert len(pts) == 1000
    phi = rng.uniform(0, 2 * math.pi, 200)
    proj = pts @ np.vstack([np.cos(phi), np.sin(phi)])
    assert np.all(support_function(dom, phi) >= proj.max(axis=0) - 1e-12)
    assert np.all(width(dom, phi) > 0)


@pytest.mark.parametrize("name", ["disk", "square", "hexagon", "ellipse"])
def test_domain_invariants(name, request):
    dom = request.getfixturevalue(name)
    assert 0 < dom.diameter <= dom.perimeter / 2
    chord = dom.longest_chord()
    assert abs(chord.length - dom.diameter) <= 1e-12 * dom.diameter
    assert np.all(dom.contains(np.array([chord.a, chord.b])))


def test_project_returns_nearest_point(ellipse, hexagon):
    rng = np.random.default_rng(3)
    for dom in (ellipse, hexagon, Disk((1, 2), 0.5)):
        pts = rng.normal(scale=3, size=(50, 2))
        q = dom.project(pts)
        assert np.all(dom.contains(q, tol=1e-9))
        inside = dom.contains(pts, tol=0.0)
        np.testing.assert_allclose(q[inside], pts[inside])


def test_overlapping_pairs():
    r = RectSet((Segment((0, 0), (2, 0)), Segment((1, 0), (3, 0)), Segment((0, 1), (1, 1))))
    assert overlapping_pairs(r) == [(0, 1)]
    r = RectSet((Segment((0, 0), (1, 0)), Segment((1, 0), (2, 0))))
    assert overlapping_pairs(r) == []
    r = RectSet((Arc((0, 0), 1, 0, 1), Arc((0, 0), 1, 0.5, 1), Arc((0, 0), 1, 3, 1)))
    assert overlapping_pairs(r) == [(0, 1)]
