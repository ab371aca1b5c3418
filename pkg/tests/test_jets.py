import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from h1geo.catalog import make_surface
from h1geo.errors import DivisionByZero, DomainError, EvaluationError
from h1geo.jets import (
    CurveJet2,
    Jet2,
    atan2,
    cos,
    fd_partials,
    jet_arith,
    jet_elementary,
    sin,
    sqrt,
)

val = st.floats(-2, 2, allow_nan=False)


def jet_of(f, u, v):
    return f(Jet2.variable_u(u), Jet2.variable_v(v))


def assert_matches_fd(f, u, v, rel=1e-6):
    j = jet_of(f, u, v)
    fd = fd_partials(lambda a, b: f(Jet2.constant(a), Jet2.constant(b)).v, (u, v), h=1e-4)
    for name in ("du", "dv", "duu", "duv", "dvv"):
        got, want = float(getattr(j, name)), float(getattr(fd, name))
        assert abs(got - want) <= rel * max(1.0, abs(want)), name


def test_arith_examples():
    x = Jet2(3.0, 1.0)
    m = jet_arith(Jet2.constant(2.0), x, "mul")
    assert (m.v, m.du, m.dv, m.duu) == (6.0, 2.0, 0.0, 0.0)
    q = jet_arith(Jet2.variable_u(5.0), Jet2.variable_u(5.0), "div")
    assert q.v == 1.0
    assert max(abs(x) for x in q.fields()[1:]) <= 1e-15


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        jet_arith(Jet2.variable_u(1.0), Jet2.variable_v(0.0), "div")
    with pytest.raises(DivisionByZero):
        Jet2.variable_u(1.0) / 0.0


def test_constant_jet_has_no_derivatives():
    c = Jet2.constant(4.2)
    assert c.fields()[1:] == (0.0,) * 5
    cc = CurveJet2.constant(1.5)
    assert (cc.dt, cc.dtt) == (0.0, 0.0)


@given(val, val)
def test_rules_against_fd(u, v):
    assert_matches_fd(lambda a, b: a * b * b - a / (2.5 + b) + 3 * a, u, v)
    assert_matches_fd(lambda a, b: sin(a * b) + cos(a - b) * sqrt(3.0 + a * a), u, v)


def test_elementary_examples():
    s = jet_elementary(Jet2.variable_u(0.0), "sin")
    assert (s.v, s.du, s.duu) == (0.0, 1.0, -0.0)
    with pytest.raises(DomainError):
        jet_elementary(Jet2.variable_u(-1.0), "sqrt")
    with pytest.raises(DomainError):
        atan2(Jet2.constant(0.0), Jet2.constant(0.0))


@given(val, val)
def test_pythagoras(u, v):
    a = Jet2.variable_u(u) * Jet2.variable_v(v) + Jet2.variable_u(u)
    one = sin(a) * sin(a) + cos(a) * cos(a)
    assert abs(one.v - 1) <= 1e-12
    assert max(abs(x) for x in one.fields()[1:]) <= 1e-12


def test_atan2_against_fd(rng):
    # angle of a rotating horizontal unit vector; crosses the branch cut freely
    for u, v in rng.uniform(-4, 4, (1000, 2)):
        def f(a, b):
            th = 3.0 * a + b * b
            return atan2(sin(th), cos(th))

        j = jet_of(f, u, v)
        assert j.du == pytest.approx(3.0, abs=1e-6)
        assert j.dv == pytest.approx(2 * v, abs=1e-6)
        assert max(abs(j.duu), abs(j.duv)) <= 1e-6 and j.dvv == pytest.approx(2.0, abs=1e-6)
    for phi in rng.uniform(-np.pi, np.pi, 1000):
        x, y = np.cos(phi), np.sin(phi)

        def g(a, b):
            return atan2(y + 0.3 * a - b * b, x + a * b)

        j = jet_of(g, 0.0, 0.0)
        fd = fd_partials(lambda a, b: np.arctan2(y + 0.3 * a - b * b, x + a * b), (0.0, 0.0))
        for name in ("du", "dv", "duu", "duv", "dvv"):
            want = getattr(fd, name)
            assert abs(getattr(j, name) - want) <= 1e-6 * max(1.0, abs(want)), name


def test_curve_atan2_derivatives():
    t = CurveJet2.variable(np.linspace(-3, 3, 13))
    th = t * t
    a = atan2(sin(th), cos(th))
    assert np.allclose(a.dt, 2 * t.v) and np.allclose(a.dtt, 2.0)


def test_fd_examples():
    fd = fd_partials(lambda u, v: u * u, (3.0, 0.0), h=1e-4)
    assert fd.du == pytest.approx(6.0, abs=1e-7)
    assert fd.duu == pytest.approx(2.0, abs=1e-4)
    assert fd.stencil.shape == (3, 3)
    zero = fd_partials(lambda u, v: 7.0, (0.3, -0.2))
    assert max(abs(x) for x in zero[:5]) <= 1e-9
    j = jet_of(lambda a, b: sin(a) * cos(b), 0.7, 0.3)
    fd = fd_partials(lambda u, v: np.sin(u) * np.cos(v), (0.7, 0.3))
    for name in ("du", "dv", "duu", "duv", "dvv"):
        assert getattr(j, name) == pytest.approx(getattr(fd, name), abs=1e-6)


def test_fd_wraps_errors():
    def boom(u, v):
        raise RuntimeError("no")

    with pytest.raises(EvaluationError):
        fd_partials(boom, (0.0, 0.0))
    with pytest.raises(DomainError):
        fd_partials(lambda u, v: u, (0.0, 0.0), h=0.0)


def test_compose_chain_rule():
    f = Jet2.variable_u(0.4) * Jet2.variable_v(0.9) * Jet2.variable_u(0.4)  # u^2 v
    t = CurveJet2.variable(0.5)
    u, v = 0.4 + 0.0 * t, 0.9 + 0.0 * t
    c = f.compose(u + (t - 0.5), v + 2.0 * (t - 0.5))
    # d/dt (u + s)^2 (v + 2 s) at s = 0
    assert c.dt == pytest.approx(2 * 0.4 * 0.9 + 0.16 * 2)
    assert c.dtt == pytest.approx(2 * 0.9 + 2 * 2 * 0.4 * 2)


@pytest.mark.parametrize("name", ["torus_revolution", "perturbed_torus", "graph_xy"])
def test_taylor2_of_immersion_has_cubic_remainder(name, rng):
    """Second-order jets of the immersion coordinates leave an O(r^3) remainder."""
    patch = make_surface(name)
    u0, u1, v0, v1 = patch.domain
    for _ in range(5):
        u, v = rng.uniform(u0 + 0.1, u1 - 0.1), rng.uniform(v0 + 0.1, v1 - 0.1)
        d = rng.normal(size=2)
        d /= np.linalg.norm(d)
        jets = patch.evaluator(Jet2.variable_u(u), Jet2.variable_v(v))
        hs = np.array([1e-2, 1e-3, 1e-4])
        for k in range(3):
            err = []
            for h in hs:
                exact = patch.immersion_jets([u + h * d[0]], [v + h * d[1]])[0, k, 0]
                err.append(abs(exact - jets[k].taylor2(h * d[0], h * d[1])))
            err = np.maximum(err, 1e-300)
            if err[0] < 1e-14:  # coordinate is locally quadratic
                continue
            slope = np.polyfit(np.log(hs[:2]), np.log(err[:2]), 1)[0]
            assert 2.7 <= slope <= 3.3
            assert err[2] <= 1e-11


def test_frame_scalars_have_quadratic_first_order_remainder(torus, rng):
    """Frame quantities carry exact first partials: the Taylor-1 remainder is O(r^2)."""
    from h1geo import _kernels as K_
    from h1geo.surface import evaluate_frame

    for _ in range(5):
        u, v = rng.uniform(0, 6), rng.uniform(0, 6)
        d = rng.normal(size=2)
        d /= np.linalg.norm(d)
        fp = evaluate_frame(torus, u, v)
        for q in (K_.Q_COS, K_.Q_SIN, K_.Q_A):
            j = fp.raw[0, q] if fp.raw.ndim == 3 else fp.raw[q]
            errs = []
            for h in (1e-2, 1e-3):
                g = evaluate_frame(torus, u + h * d[0], v + h * d[1])
                val = {K_.Q_COS: g.cos_alpha, K_.Q_SIN: g.sin_alpha, K_.Q_A: g.A}[q]
                errs.append(abs(float(val) - (j[0] + h * (j[1] * d[0] + j[2] * d[1]))))
            slope = np.log(errs[0] / errs[1]) / np.log(10.0)
            assert 1.8 <= slope <= 2.2
