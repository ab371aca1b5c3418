import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from h1geo.errors import NonHorizontal
from h1geo.heisenberg import (
    E0,
    E1,
    E2,
    IDENTITY,
    FrameCovector,
    FrameVector,
    Point,
    bch,
    coframe_at,
    coordinate_to_frame,
    frame_to_coordinate,
    group_inv,
    group_mul,
    is_horizontal,
    j_rotate,
    pair,
    scalar_product,
    volume_form,
)

coord = st.floats(-10, 10, allow_nan=False)
points = st.builds(Point, coord, coord, coord)
horizontal = st.builds(lambda a, b: FrameVector(0.0, a, b), coord, coord)
vectors = st.builds(FrameVector, coord, coord, coord)


def close(p, q, tol=1e-14):
    return all(abs(a - b) <= tol * max(1.0, abs(a), abs(b)) for a, b in zip(p, q))


def test_group_law_examples():
    assert group_mul(Point(1, 0, 0), Point(0, 1, 0)) == (1, 1, 0.5)
    assert group_mul(IDENTITY, Point(2.0, -3.0, 4.5)) == (2.0, -3.0, 4.5)
    assert group_mul(Point(1, 2, 3), Point(-1, -2, -3)) == (0, 0, 0)
    assert group_inv(Point(1, 2, 3)) == (-1, -2, -3)
    assert group_inv(IDENTITY) == (0, 0, 0)


@given(points, points, points)
def test_associative(p, q, r):
    left = group_mul(group_mul(p, q), r)
    right = group_mul(p, group_mul(q, r))
    assert close(left, right, 1e-13)


@given(points)
def test_inverse_both_sides(p):
    assert close(group_mul(p, group_inv(p)), IDENTITY)
    assert close(group_mul(group_inv(p), p), IDENTITY)


def test_bch_matches_group_law_on_batch(rng):
    X = Point(*rng.uniform(-10, 10, (3, 10_000)))
    Y = Point(*rng.uniform(-10, 10, (3, 10_000)))
    a, b = group_mul(X, Y), bch(X, Y)
    assert max(float(np.max(np.abs(s - t))) for s, t in zip(a, b)) <= 1e-12


def test_frame_examples():
    assert frame_to_coordinate(E1, IDENTITY) == (1, 0, 0)
    assert frame_to_coordinate(E1, Point(0, 2, 0)) == (1, 0, -1)
    assert coordinate_to_frame((0, 0, 1), Point(3, -1, 2)) == (1, 0, 0)
    assert coordinate_to_frame((1, 0, 0), Point(0, 2, 0)) == (1, 1, 0)


@given(vectors, points)
def test_frame_coordinate_round_trip(v, p):
    back = coordinate_to_frame(frame_to_coordinate(v, p), p)
    assert close(back, v, 1e-12)


@given(st.tuples(coord, coord, coord), points)
def test_contact_form_matches_coordinate_expression(w, p):
    # e^0 = dz + (y dx - x dy)/2
    expected = w[2] + 0.5 * (p.y * w[0] - p.x * w[1])
    assert coordinate_to_frame(w, p).a0 == pytest.approx(expected, abs=1e-12)


def test_coframe_duality(rng):
    p = Point(*rng.uniform(-10, 10, (3, 1000)))
    rows = coframe_at(p)
    for i, row in enumerate(rows):
        for j, e in enumerate((E0, E1, E2)):
            col = frame_to_coordinate(e, p)
            val = row[0] * col[0] + row[1] * col[1] + row[2] * col[2]
            assert np.max(np.abs(val - (i == j))) <= 1e-14


def test_covector_pairing():
    assert pair(FrameCovector(1, 2, 3), FrameVector(4, 5, 6)) == 32


def test_j_examples():
    assert j_rotate(E1) == (0, 0, 1)
    with pytest.raises(NonHorizontal):
        j_rotate(FrameVector(1e-3, 1.0, 0.0))
    # the threshold scales with the horizontal part
    assert is_horizontal(FrameVector(5e-9, 10.0, 0.0))
    assert not is_horizontal(FrameVector(2e-9, 1.0, 0.0))


@given(horizontal)
def test_j_squared_is_minus_one(v):
    jj = j_rotate(j_rotate(v))
    assert close(jj, FrameVector(0.0, -v.a1, -v.a2))
    assert scalar_product(j_rotate(v), v) == 0


@given(horizontal, horizontal)
def test_j_is_isometry(v, w):
    assert scalar_product(j_rotate(v), j_rotate(w)) == pytest.approx(scalar_product(v, w), rel=1e-14, abs=1e-14)
    assert is_horizontal(j_rotate(v))


def test_volume_examples():
    assert volume_form(E0, E1, E2) == 1
    assert volume_form(E1, E1, E2) == 0


@given(vectors, vectors, vectors)
def test_volume_antisymmetric(u, v, w):
    a = volume_form(u, v, w)
    assert volume_form(v, u, w) == pytest.approx(-a, abs=1e-9)
    assert volume_form(u, w, v) == pytest.approx(-a, abs=1e-9)
    assert volume_form(u, v, v) == pytest.approx(0.0, abs=1e-9)
