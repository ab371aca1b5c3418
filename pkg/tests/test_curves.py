import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from h1geo import _kernels
from h1geo.catalog import make_surface
from h1geo.curves import (
    BoundaryCurve,
    corner_area,
    corner_area_ratio,
    curve_curvature,
    curve_curvature_projected,
    curve_state,
    line_integral_k,
    scan_transverse,
    segment,
    unit_tangent,
)
from h1geo.errors import NonTransverse
from h1geo.jets import CurveJet2, sin
from h1geo.surface import SurfaceTangent, evaluate_frame

from conftest import SURFACES, random_points

TORUS = make_surface("torus_revolution")


def wavy(patch, a=0.25, b=0.3, du=0.7, dv=0.8, amp=0.2):
    return BoundaryCurve(patch, lambda t: (a + du * t, b + dv * t + amp * sin(3.0 * t)), 0.0, 1.0, "wavy")


def test_cylinder_height_circle():
    for r in (1.0, 2.0):
        cyl = make_surface("vertical_cylinder", {"r": r})
        c = segment(cyl, (0.0, 0.4), (2 * np.pi, 0.4))
        t = np.linspace(0, 1, 9)
        s = curve_state(c, t)
        assert np.allclose(s.f2g.v, -r * r / 2 * 2 * np.pi)
        assert np.allclose(s.f1g.v / s.f2g.v, -2 / r)
        T, eps = unit_tangent(c, t)
        assert np.all(eps == 1) and np.all(eps * T.c2 < 0)
        assert np.max(np.abs(curve_curvature(c, t))) <= 1e-14


def test_vertical_line_and_helix_are_geodesics():
    cyl = make_surface("vertical_cylinder")
    for c in (segment(cyl, (1.0, 0.0), (1.0, 1.0)), segment(cyl, (0.0, 0.0), (2.0, 0.9))):
        t = np.linspace(0, 1, 11)
        assert np.max(np.abs(curve_curvature(c, t))) <= 1e-13
        assert np.max(np.abs(curve_curvature_projected(c, t))) <= 1e-13


def test_parabola_in_plane():
    # on the plane f1 = d/du, f2 = d/dv; u = v^2/2 has ratio t, eps = -sigma, so k = -sigma
    for sigma in (1, -1):
        plane = make_surface("vertical_plane", {"sigma": sigma})
        c = BoundaryCurve(plane, lambda t: (0.5 * t * t, t), -0.9, 0.9, "parabola")
        t = np.linspace(-0.9, 0.9, 13)
        assert np.allclose(curve_curvature(c, t), -sigma, atol=1e-14)
        assert np.allclose(curve_curvature_projected(c, t), -sigma, atol=1e-14)
        assert abs(line_integral_k(c).value - (-sigma * 1.8)) <= 1e-12


def test_characteristic_curve_is_rejected():
    plane = make_surface("vertical_plane")
    c = segment(plane, (-0.5, 0.2), (0.5, 0.2))
    with pytest.raises(NonTransverse):
        curve_state(c, [0.5])
    with pytest.raises(NonTransverse):
        line_integral_k(c)


def test_sign_change_between_samples_is_found():
    # the theta-direction is characteristic on the torus at theta = pi/2 only approximately;
    # a segment crossing a zero of e^0(gamma') must be caught even if no node hits it
    c = segment(TORUS, (0.5, 1.0), (0.5, 2.0))
    with pytest.raises(NonTransverse) as info:
        scan_transverse(c, samples=5)
    tz = info.value.where
    s = curve_state(c, [tz], check=False)
    assert abs(s.f2g.v[0]) <= 1e-12


# -- corners --------------------------------------------------------------------------


def test_corner_examples():
    vin, vout = SurfaceTangent(1.0, 1.0), SurfaceTangent(-1.0, 1.0)
    assert corner_area_ratio(vin, vout) == 2.0
    assert corner_area_ratio(vin, vin) == 0.0
    assert corner_area_ratio(vout, vin) == -2.0
    fp = evaluate_frame(TORUS, 0.4, 0.6)
    assert abs(corner_area(fp[0], vin, vout) - 2.0) <= 1e-14


@pytest.mark.parametrize("name", SURFACES)
def test_corner_volume_route(name, surfaces, rng):
    patch = surfaces[name]
    n = 10_000
    fp = evaluate_frame(patch, *random_points(patch, n, rng))

    def tangent():
        c2 = rng.uniform(0.1, 2.0, n) * rng.choice([-1.0, 1.0], n)
        return SurfaceTangent(rng.normal(size=n), c2)

    vin, vout = tangent(), tangent()
    a, b = corner_area(fp, vin, vout), corner_area_ratio(vin, vout)
    assert np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))) <= 1e-12


# -- curvature along curves --------------------------------------------------------------


def _fd_curvature(curve, t, h=1e-5):
    """Project the difference quotient of the frame coefficients of T onto eps f1."""

    def T(tt):
        s = curve_state(curve, tt, check=False)
        raw = s.fp.raw[:, :, 0]
        coeff = np.stack([raw[:, a] * s.up + raw[:, b] * s.vp for a, b in
                          ((_kernels.Q_A0, _kernels.Q_B0), (_kernels.Q_A1, _kernels.Q_B1),
                           (_kernels.Q_A2, _kernels.Q_B2))])
        return coeff / np.abs(s.f2g.v), s

    (Tp, _), (Tm, _), (_, s) = T(t + h), T(t - h), T(t)
    W = (Tp - Tm) / (2 * h) / np.abs(s.f2g.v)
    c, si = s.fp.cos_alpha, s.fp.sin_alpha
    _, eps = unit_tangent(curve, t)
    return eps * (-si * W[1] + c * W[2])


@pytest.mark.parametrize("curve", [
    wavy(TORUS),
    wavy(TORUS.with_sigma(-1)),
    wavy(make_surface("perturbed_torus"), a=2.0, b=0.4, du=0.5, dv=0.6),
    BoundaryCurve(make_surface("vertical_cylinder", {"r": 1.5}),
                  lambda t: (t + 0.3 * t * t, 0.2 + 0.5 * sin(2.0 * t)), 0.0, 1.0, "cyl"),
    BoundaryCurve(make_surface("graph_xy"), lambda t: (-0.8 + 1.5 * t, 0.6 + 0.8 * t * t), 0.0, 1.0, "g"),
], ids=["torus", "torus-", "perturbed", "cylinder", "graph"])
def test_projected_matches_formula(curve):
    scan_transverse(curve)
    t = np.linspace(0.0, 1.0, 100)
    k1 = curve_curvature(curve, t)
    k2, resid = curve_curvature_projected(curve, t, return_residual=True)
    assert np.max(np.abs(k1 - k2)) <= 1e-8
    assert np.max(resid) <= 1e-12
    k3 = _fd_curvature(curve, t[5:-5])
    assert np.max(np.abs(k3 - k1[5:-5]) / np.maximum(1.0, np.abs(k1[5:-5]))) <= 1e-6


def test_reversal():
    c = wavy(TORUS)
    r = c.reversed()
    t = np.linspace(0.0, 1.0, 21)
    T1, e1 = unit_tangent(c, t)
    T2, e2 = unit_tangent(r, 1.0 - t)
    assert np.allclose(T1.c1, -T2.c1) and np.allclose(T1.c2, -T2.c2)
    assert np.all(e1 == -e2)
    assert np.allclose(curve_curvature(c, t), -curve_curvature(r, 1.0 - t))
    assert abs(line_integral_k(c).value + line_integral_k(r).value) <= 1e-12


@settings(max_examples=25)
@given(st.floats(0.05, 0.95))
def test_split_additivity(tm):
    c = wavy(TORUS)
    a, b = c.split(tm)
    whole = line_integral_k(c).value
    assert abs(line_integral_k(a).value + line_integral_k(b).value - whole) <= 1e-12


def test_reparametrisation_invariance():
    c = wavy(TORUS)
    base = line_integral_k(c).value
    # regular increasing maps of [0, 1] onto itself
    for phi in (lambda s: s + 0.4 * s * (1.0 - s), lambda s: s + 0.1 * sin(2.0 * np.pi * s)):
        d = c.reparametrized(phi, 0.0, 1.0)
        assert abs(line_integral_k(d, atol=1e-13).value - base) <= 1e-9
    stretched = c.reparametrized(lambda s: (s - 2.0) / 3.0, 2.0, 5.0)
    assert abs(line_integral_k(stretched).value - base) <= 1e-12


@settings(max_examples=40)
@given(st.floats(0.2, 1.0), st.floats(0.3, 1.1), st.floats(-0.8, 0.8), st.floats(-0.8, 0.8))
def test_orientation_convention(u, v, du, dv):
    c = segment(TORUS, (u, v), (u + du, v + dv))
    assume(abs(du) + abs(dv) > 1e-3)
    try:
        scan_transverse(c, samples=33)
    except NonTransverse:
        assume(False)
    T, eps = unit_tangent(c, np.linspace(0.0, 1.0, 33))
    assert np.all(eps * T.c2 < 0)
    assert np.allclose(np.abs(T.c2), 1.0)
