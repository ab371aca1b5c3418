"""Transverse curves on a surface patch.

A :class:`BoundaryCurve` is a parameter-space path ``t -> (u(t), v(t))`` written
with :class:`~h1geo.jets.CurveJet2` arithmetic, so that ``gamma'`` and
``gamma''`` come out of the jets.  Curvature is available two ways: the
closed expression in ``f^1(gamma')/f^2(gamma')`` and ``A d alpha``
(:func:`curve_curvature`) and the projection of the flat adapted derivative
of the unit tangent (:func:`curve_curvature_projected`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels as K_
from .errors import InconsistentFrame, NonTransverse
from .heisenberg import FrameVector, volume_form
from .jets import CurveJet2
from .quadrature import ATOL, MAX_DEPTH, QuadratureReport, integrate_1d
from .surface import (
    FramePacket,
    SurfacePatch,
    SurfaceTangent,
    adapted_connection_ambient,
    evaluate_frame,
    tangent_to_frame,
)

TRANSVERSE_TOL = 1e-9

Path = Callable[[CurveJet2], tuple[CurveJet2, CurveJet2]]


@dataclass(frozen=True)
class BoundaryCurve:
    patch: SurfacePatch
    path: Path
    t0: float = 0.0
    t1: float = 1.0
    name: str = "curve"

    def param_jets(self, t) -> tuple[CurveJet2, CurveJet2]:
        tj = CurveJet2.variable(np.asarray(t, dtype=float))
        u, v = self.path(tj)
        return _broadcast(u, tj), _broadcast(v, tj)

    def uv(self, t) -> tuple[np.ndarray, np.ndarray]:
        u, v = self.param_jets(t)
        return u.v, v.v

    @property
    def start(self) -> tuple[float, float]:
        u, v = self.uv(np.array([self.t0]))
        return float(u[0]), float(v[0])

    @property
    def end(self) -> tuple[float, float]:
        u, v = self.uv(np.array([self.t1]))
        return float(u[0]), float(v[0])

    def reversed(self) -> "BoundaryCurve":
        a, b, path = self.t0, self.t1, self.path
        return BoundaryCurve(self.patch, lambda t: path((a + b) - t), a, b, self.name + "~")

    def reparametrized(self, phi: Callable[[CurveJet2], CurveJet2], s0: float, s1: float) -> "BoundaryCurve":
        """``s -> gamma(phi(s))``; ``phi`` maps ``[s0, s1]`` onto ``[t0, t1]``."""
        path = self.path
        return BoundaryCurve(self.patch, lambda s: path(phi(s)), s0, s1, self.name + "'")

    def split(self, tm: float) -> tuple["BoundaryCurve", "BoundaryCurve"]:
        if not self.t0 < tm < self.t1:
            raise ValueError(f"split point {tm} outside ({self.t0}, {self.t1})")
        return (
            BoundaryCurve(self.patch, self.path, self.t0, tm, self.name + "[0]"),
            BoundaryCurve(self.patch, self.path, tm, self.t1, self.name + "[1]"),
        )

    def on(self, patch: SurfacePatch) -> "BoundaryCurve":
        return BoundaryCurve(patch, self.path, self.t0, self.t1, self.name)


def _broadcast(j: CurveJet2, tj: CurveJet2) -> CurveJet2:
    # constant components (e.g. v = 0.3) come back as plain floats
    if not isinstance(j, CurveJet2):
        j = CurveJet2.constant(j)
    z = np.zeros_like(tj.v)
    return CurveJet2(j.v + z, j.dt + z, j.dtt + z)


def segment(patch: SurfacePatch, a, b, name: str = "segment") -> BoundaryCurve:
    """Straight parameter-space segment from ``a`` to ``b`` over ``t in [0, 1]``."""
    (ua, va), (ub, vb) = (tuple(map(float, a)), tuple(map(float, b)))
    return BoundaryCurve(patch, lambda t: (ua + (ub - ua) * t, va + (vb - va) * t), 0.0, 1.0, name)


# -- pointwise evaluation ------------------------------------------------------


@dataclass
class CurveState:
    """Frame data along a curve at an array of parameters ``t``."""

    t: np.ndarray
    fp: FramePacket
    u: CurveJet2
    v: CurveJet2
    f1g: CurveJet2  # f^1(gamma') with its t-derivative
    f2g: CurveJet2  # f^2(gamma') = e^0(gamma')
    speed: np.ndarray  # Euclidean norm of the frame coefficients of gamma'

    @property
    def up(self):
        return self.u.dt

    @property
    def vp(self):
        return self.v.dt

    def velocity(self) -> SurfaceTangent:
        return SurfaceTangent(self.f1g.v, self.f2g.v)


def curve_state(curve: BoundaryCurve, t, check: bool = True) -> CurveState:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    u, v = curve.param_jets(t)
    fp = evaluate_frame(curve.patch, u.v, v.v)
    up, vp = u.d_t(), v.d_t()

    def along(index):
        return fp.jet(index).compose(u, v)

    f1g = along(K_.Q_P11) * up + along(K_.Q_P12) * vp
    f2g = along(K_.Q_A0) * up + along(K_.Q_B0) * vp
    comps = [fp.raw[:, a, 0] * u.dt + fp.raw[:, b, 0] * v.dt for a, b in
             ((K_.Q_A0, K_.Q_B0), (K_.Q_A1, K_.Q_B1), (K_.Q_A2, K_.Q_B2))]
    speed = np.sqrt(sum(c * c for c in comps))
    state = CurveState(t, fp, u, v, f1g, f2g, speed)
    if check:
        _check_transverse(curve, state)
    return state


def _check_transverse(curve, state):
    bad = ~(np.abs(state.f2g.v) >= TRANSVERSE_TOL * state.speed)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise NonTransverse(
            f"{curve.name}: e^0(gamma') = {state.f2g.v[i]:.3e} at t = {float(state.t[i])!r} "
            f"(u, v) = ({float(state.u.v[i])!r}, {float(state.v.v[i])!r})",
            where=float(state.t[i]),
        )


def scan_transverse(curve: BoundaryCurve, samples: int = 257) -> float:
    """Check transversality on a uniform sample, including sign changes between samples.

    A sign change of ``e^0(gamma')`` is located by bisection and reported as
    :class:`NonTransverse` at the zero.  Returns the smallest relative margin
    ``|e^0(gamma')| / |gamma'|`` seen.
    """
    t = np.linspace(curve.t0, curve.t1, samples)
    st = curve_state(curve, t)
    e = st.f2g.v
    flips = np.flatnonzero(np.sign(e[:-1]) != np.sign(e[1:]))
    if flips.size:
        a, b = t[flips[0]], t[flips[0] + 1]
        ea = e[flips[0]]
        for _ in range(60):
            m = 0.5 * (a + b)
            em = curve_state(curve, np.array([m]), check=False).f2g.v[0]
            if np.sign(em) == np.sign(ea):
                a, ea = m, em
            else:
                b = m
        tz = 0.5 * (a + b)
        u, v = curve.uv(np.array([tz]))
        raise NonTransverse(
            f"{curve.name}: e^0(gamma') changes sign near t = {float(tz)!r} "
            f"(u, v) = ({float(u[0])!r}, {float(v[0])!r})",
            where=float(tz),
        )
    return float(np.min(np.abs(e) / st.speed))


def transversality_margin(curve: BoundaryCurve, t) -> float:
    """Smallest ``|e^0(gamma')|`` over the given parameters (no error raised)."""
    return float(np.min(np.abs(curve_state(curve, t, check=False).f2g.v)))


def _epsilon(state: CurveState) -> np.ndarray:
    # sign of det(T, f1) on (d/du, d/dv), times sigma
    Pi = state.fp.P_inv
    f1u, f1v = Pi[:, 0, 0], Pi[:, 1, 0]
    det = state.up * f1v - state.vp * f1u
    return np.sign(det) * state.fp.sigma


def unit_tangent(curve: BoundaryCurve, t) -> tuple[SurfaceTangent, np.ndarray]:
    """``T = gamma'/|f^2(gamma')|`` on ``(f1, f2)`` and the orientation sign ``eps``."""
    st = curve_state(curve, t)
    n = np.abs(st.f2g.v)
    T = SurfaceTangent(st.f1g.v / n, st.f2g.v / n)
    eps = _epsilon(st)
    if np.any(eps * T.c2 >= 0):
        raise InconsistentFrame(f"{curve.name}: eps f^2(T) >= 0; orientation convention violated")
    return T, eps


def curve_curvature(curve: BoundaryCurve, t, state: CurveState | None = None) -> np.ndarray:
    """``k = eps/f^2(gamma') (d/dt[f^1(gamma')/f^2(gamma')] + A d alpha(gamma'))``."""
    st = state if state is not None else curve_state(curve, t)
    ratio = st.f1g / st.f2g
    dalpha = st.fp.dalpha_uv[:, 0] * st.up + st.fp.dalpha_uv[:, 1] * st.vp
    return _epsilon(st) / st.f2g.v * (ratio.dt + st.fp.A * dalpha)


def curve_curvature_projected(curve: BoundaryCurve, t, return_residual: bool = False):
    """``<nabla_T T, eps f1>`` with ``nabla`` the projection of the flat adapted derivative.

    With ``return_residual`` also returns the part of ``nabla_T T`` not along
    ``f1`` (its ``e^0`` and ``eta`` components), which should vanish.
    """
    st = curve_state(curve, t)
    fp, u, v = st.fp, st.u, st.v
    up, vp = u.d_t(), v.d_t()
    n = abs_jet(st.f2g)
    T = FrameVector(*(
        (fp.jet(a).compose(u, v) * up + fp.jet(b).compose(u, v) * vp) / n
        for a, b in ((K_.Q_A0, K_.Q_B0), (K_.Q_A1, K_.Q_B1), (K_.Q_A2, K_.Q_B2))
    ))
    W = adapted_connection_ambient(T)  # along gamma', i.e. |f^2(gamma')| nabla-bar_T T
    W = FrameVector(*(w / n.v for w in W))
    c, s, A = fp.cos_alpha, fp.sin_alpha, fp.A
    eta_star_W = -A * W.a0 + c * W.a1 + s * W.a2
    R = FrameVector(W.a0, W.a1 - eta_star_W * c, W.a2 - eta_star_W * s)
    k = _epsilon(st) * (-s * R.a1 + c * R.a2)
    if return_residual:
        return k, np.maximum(np.abs(R.a0), np.abs(c * R.a1 + s * R.a2 - A * R.a0))
    return k


def abs_jet(j: CurveJet2) -> CurveJet2:
    sgn = np.sign(j.v)
    return CurveJet2(sgn * j.v, sgn * j.dt, sgn * j.dtt)


def velocity_at(curve: BoundaryCurve, t: float) -> tuple[FramePacket, SurfaceTangent]:
    st = curve_state(curve, np.array([t]))
    return st.fp[0], SurfaceTangent(st.f1g.v[0], st.f2g.v[0])


def corner_area(fp: FramePacket, vin: SurfaceTangent, vout: SurfaceTangent):
    """``dV(eta, vin, vout) / (e^0(vin) e^0(vout))``."""
    if np.any(vin.c2 == 0) or np.any(vout.c2 == 0):
        raise NonTransverse("corner area needs transverse tangents (nonzero f^2 component)")
    w_in, w_out = tangent_to_frame(fp, vin), tangent_to_frame(fp, vout)
    return volume_form(fp.eta, w_in, w_out) / (w_in.a0 * w_out.a0)


def corner_area_ratio(vin: SurfaceTangent, vout: SurfaceTangent):
    """Same quantity as ``f^1/f^2`` ratios: ``f^1(vin)/f^2(vin) - f^1(vout)/f^2(vout)``."""
    return vin.c1 / vin.c2 - vout.c1 / vout.c2


# -- line integrals --------------------------------------------------------------


def line_integral_k(curve: BoundaryCurve, *, atol=ATOL, rtol=0.0, max_depth=MAX_DEPTH,
                    fixed_depth=None) -> QuadratureReport:
    """``int_gamma k``, measured by ``|f^2(gamma')| dt``."""
    scan_transverse(curve)

    def integrand(t):
        st = curve_state(curve, t)
        return curve_curvature(curve, t, st) * np.abs(st.f2g.v)

    return integrate_1d(integrand, curve.t0, curve.t1, atol=atol, rtol=rtol,
                        max_depth=max_depth, fixed_depth=fixed_depth)


def line_integral_A_dalpha(curve: BoundaryCurve, *, atol=ATOL, rtol=0.0, max_depth=MAX_DEPTH,
                           fixed_depth=None) -> QuadratureReport:
    """``int_gamma A d alpha``; no transversality needed."""

    def integrand(t):
        st = curve_state(curve, t, check=False)
        da = st.fp.dalpha_uv[:, 0] * st.up + st.fp.dalpha_uv[:, 1] * st.vp
        return st.fp.A * da

    return integrate_1d(integrand, curve.t0, curve.t1, atol=atol, rtol=rtol,
                        max_depth=max_depth, fixed_depth=fixed_depth)
