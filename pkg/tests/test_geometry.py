import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from curvker.errors import DegenerateTripleError, ParameterError
from curvker.geometry import (
    Line,
    Triple,
    angle_predicates,
    as_points,
    menger_curvature,
    sample_triples,
    triangle_stats,
)
from curvker.verify import circumradius

from .strategies import triples

RIGHT = Triple.of((0, 0), (1, 0), (0, 1))
ISO = Triple.of((0, 0), (-1, 1), (1, 1))


def test_right_triangle_stats():
    st_ = triangle_stats(RIGHT)
    assert sorted(st_.sides) == pytest.approx([1, 1, math.sqrt(2)], rel=1e-15)
    assert st_.area == 0.5
    # third side-line runs through (1,0) and (0,1)
    assert st_.theta_h[2] == pytest.approx(math.pi / 4, rel=1e-15)


def test_collinear_area_zero():
    assert triangle_stats(Triple.of((0, 0), (1, 0), (2, 0))).area == 0
    assert menger_curvature(Triple.of((0, 0), (1, 0), (2, 0))) == 0


def test_isosceles_stats():
    st_ = triangle_stats(ISO)
    assert sorted(st_.sides) == pytest.approx([math.sqrt(2), math.sqrt(2), 2], rel=1e-15)
    assert st_.area == 1


def test_curvature_values():
    assert menger_curvature(RIGHT) == pytest.approx(math.sqrt(2), rel=1e-14)
    assert menger_curvature(ISO) == pytest.approx(1.0, rel=1e-14)
    assert circumradius(RIGHT) == pytest.approx(1 / math.sqrt(2), rel=1e-12)


def test_coincident_points_rejected():
    with pytest.raises(DegenerateTripleError):
        Triple.of((0, 0), (0, 0), (1, 1))
    with pytest.raises(DegenerateTripleError):
        menger_curvature(Triple(0j, 1 + 0j, 1 + 0j))


def test_predicate_examples():
    assert angle_predicates(Triple.of((0, 0), (1, 0), (0.5, 0.9)), math.pi / 3, 2).in_otau
    # near-horizontal side-lines sit at ~pi/2 from the vertical, ~0 from the horizontal
    sliver = angle_predicates(Triple.of((0, 0), (1, 0), (2, 0.001)), math.pi / 3, 2)
    assert sliver.delta1 and not sliver.delta2
    right = angle_predicates(RIGHT, math.pi / 3, 2)
    assert right.delta1 and right.delta2


def test_predicate_parameter_checks():
    with pytest.raises(ParameterError):
        angle_predicates(RIGHT, 2.0, 2)
    with pytest.raises(ParameterError):
        angle_predicates(RIGHT, 0.5, 0.5)


def test_as_points_forms():
    np.testing.assert_array_equal(as_points([[1, 2], [3, 4]]), [1 + 2j, 3 + 4j])
    with pytest.raises(ParameterError):
        as_points([[1, 2, 3]])
    with pytest.raises(ParameterError):
        as_points([[math.nan, 0]])


def test_line_normalisation_and_distance():
    line = Line(math.pi + 0.25, 1.0)
    assert line.angle == pytest.approx(0.25)
    assert line.offset == -1.0
    horizontal = Line.through((0, 2), 0.0)
    assert horizontal.distance([0j, 5 + 3j]) == pytest.approx([2.0, 1.0])


def test_sample_triples_law(rng):
    tri = sample_triples(500, rng)
    u, v = tri.to_origin()
    a, b, c = np.abs(u), np.abs(v), np.abs(u - v)
    area = 0.5 * np.abs(u.real * v.imag - u.imag * v.real)
    assert np.all(area >= 1e-6 * (a + b + c) ** 2)
    sides = np.stack([a, b, c])
    assert np.all(sides.max(0) <= 1e3 * sides.min(0))
    assert np.all(np.abs(np.stack(tri).real) <= 1)


@given(triples(), st.floats(-5, 5), st.floats(-5, 5), st.floats(0, 2 * math.pi),
       st.floats(0.01, 100))
def test_curvature_similarity(tri, dx, dy, angle, s):
    base = menger_curvature(tri)
    moved = tri.scaled(complex(math.cos(angle), math.sin(angle))).translated(complex(dx, dy))
    assert menger_curvature(moved) == pytest.approx(base, rel=1e-10)
    assert menger_curvature(tri.conjugate()) == pytest.approx(base, rel=1e-10)
    assert menger_curvature(tri.scaled(s)) == pytest.approx(base / s, rel=1e-10)


@given(triples(min_shape=1e-4))
def test_curvature_is_reciprocal_circumradius(tri):
    assert menger_curvature(tri) == pytest.approx(1 / circumradius(tri), rel=1e-9)


@given(triples())
def test_angle_complement(tri):
    st_ = triangle_stats(tri)
    for v, h in zip(st_.theta_v, st_.theta_h):
        assert 0 <= v <= math.pi / 2 and 0 <= h <= math.pi / 2
        assert abs(v + h - math.pi / 2) <= 1e-12


@given(triples(), st.floats(0.01, math.pi / 2 - 0.01))
def test_delta1_reformulation(tri, alpha0):
    st_ = triangle_stats(tri)
    # skip draws sitting on the boundary within rounding
    if abs(sum(st_.theta_v) - alpha0) < 1e-12:
        return
    pred = angle_predicates(tri, alpha0, 2.0)
    assert pred.delta1 == (sum(st_.theta_h) <= 1.5 * math.pi - alpha0)
