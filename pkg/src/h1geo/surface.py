"""Pointwise geometry of parametrized surfaces in H^1.

A :class:`SurfacePatch` maps a parameter rectangle into H^1 through an
evaluator written with :class:`~h1geo.jets.Jet2` arithmetic.
:func:`evaluate_frame` turns the second-order jets of the immersion into a
:class:`FramePacket`: the characteristic direction ``f1``, the horizontal
normal ``eta = -J f1``, the angle ``alpha`` (stored only as its cosine and
sine), ``A = -eta*(e0)``, the special basis ``(f1, f2)``, the 1-forms
``d alpha`` and ``dA`` and the Gaussian curvature ``K``.

Sign of ``f1``.  ``f1`` is chosen pointwise so that ``(f1, f2)`` is positively
oriented with respect to ``sigma * (d/du, d/dv)``; equivalently ``det P`` has
the sign of ``sigma``.  ``f2`` does not depend on that choice, so this is the
only orientation-compatible one, and it is what makes ``eps f^2(T) < 0`` hold
for transverse curves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import _kernels as K_
from .errors import CharacteristicPoint, DegenerateImmersion, DomainError, InconsistentFrame
from .heisenberg import FrameCovector, FrameVector, Point, coordinate_to_frame
from .jets import Jet2

CHARACTERISTIC_TOL = 1e-9
DEGENERACY_TOL = 1e-12
A_MISMATCH_TOL = 1e-10

Evaluator = Callable[[Jet2, Jet2], tuple[Jet2, Jet2, Jet2]]


@dataclass(frozen=True)
class SurfacePatch:
    """Immutable parametrized immersion ``(u, v) -> (x, y, z)``."""

    evaluator: Evaluator
    domain: tuple[float, float, float, float]  # u0, u1, v0, v1
    sigma: int = 1
    name: str = "patch"
    params: dict = field(default_factory=dict)
    periods: tuple = (None, None)

    def __post_init__(self):
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        u0, u1, v0, v1 = self.domain
        if not (u1 > u0 and v1 > v0):
            raise ValueError(f"empty parameter domain {self.domain}")

    def with_sigma(self, sigma: int) -> "SurfacePatch":
        return SurfacePatch(self.evaluator, self.domain, sigma, self.name, self.params, self.periods)

    def restricted(self, domain) -> "SurfacePatch":
        return SurfacePatch(self.evaluator, tuple(domain), self.sigma, self.name, self.params, self.periods)

    @property
    def center(self) -> tuple[float, float]:
        u0, u1, v0, v1 = self.domain
        return 0.5 * (u0 + u1), 0.5 * (v0 + v1)

    def contains(self, u, v, slack: float = 1e-12):
        u0, u1, v0, v1 = self.domain
        su = slack * max(1.0, abs(u0), abs(u1))
        sv = slack * max(1.0, abs(v0), abs(v1))
        # a periodic direction wraps, so it never leaves the domain
        in_u = True if self.periods[0] else (u >= u0 - su) & (u <= u1 + su)
        in_v = True if self.periods[1] else (v >= v0 - sv) & (v <= v1 + sv)
        return np.logical_and(in_u, in_v) | np.zeros(np.broadcast(u, v).shape, dtype=bool)

    def immersion_jets(self, u, v) -> np.ndarray:
        """Array ``(N, 3, 6)`` of coordinate jets at flattened nodes."""
        u = np.asarray(u, dtype=float).ravel()
        v = np.asarray(v, dtype=float).ravel()
        coords = self.evaluator(Jet2.variable_u(u), Jet2.variable_v(v))
        out = np.empty((u.size, 3, 6))
        for k, c in enumerate(coords):
            for j, val in enumerate(c.fields()):
                out[:, k, j] = val
        return out

    def point(self, u, v) -> Point:
        imm = self.immersion_jets(u, v)
        shape = np.shape(np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))[0])
        return Point(*(imm[:, k, 0].reshape(shape) for k in range(3)))


class SurfaceTangent(NamedTuple):
    """Tangent vector ``c1 f1 + c2 f2``; ``e^0`` of it equals ``c2``."""

    c1: float
    c2: float


@dataclass
class FramePacket:
    """Geometric payload at one node or an array of nodes (fields broadcast together)."""

    u: np.ndarray
    v: np.ndarray
    sigma: int
    p: Point
    du_f: FrameVector
    dv_f: FrameVector
    cos_alpha: np.ndarray
    sin_alpha: np.ndarray
    A: np.ndarray
    P: np.ndarray  # (..., 2, 2): columns are du, dv written on (f1, f2)
    P_inv: np.ndarray
    dalpha: np.ndarray  # (..., 2) values on (f1, f2)
    dA_form: np.ndarray
    dalpha_uv: np.ndarray  # (..., 2) values on (du, dv)
    dA_uv: np.ndarray
    K: np.ndarray
    margin: np.ndarray
    cond_P: np.ndarray
    raw: np.ndarray = field(repr=False)  # (..., NQ, 3) kernel output

    @property
    def f1(self) -> FrameVector:
        return FrameVector(0.0 * self.A, -self.sin_alpha, self.cos_alpha)

    @property
    def eta(self) -> FrameVector:
        return FrameVector(0.0 * self.A, self.cos_alpha, self.sin_alpha)

    @property
    def f2(self) -> FrameVector:
        return FrameVector(1.0 + 0.0 * self.A, self.A * self.cos_alpha, self.A * self.sin_alpha)

    @property
    def det_P(self):
        return self.P[..., 0, 0] * self.P[..., 1, 1] - self.P[..., 0, 1] * self.P[..., 1, 0]

    def jet(self, index: int) -> Jet2:
        """First-order jet of kernel quantity ``index`` (see ``_kernels.Q_*``)."""
        r = self.raw[..., index, :]
        return Jet2.first_order(r[..., 0], r[..., 1], r[..., 2])

    def dP(self) -> np.ndarray:
        """``dP[..., i, j, k] = d P_ij / d(u, v)_k``."""
        r = self.raw
        out = np.empty(r.shape[:-2] + (2, 2, 2))
        out[..., 0, 0, :] = r[..., K_.Q_P11, 1:]
        out[..., 0, 1, :] = r[..., K_.Q_P12, 1:]
        out[..., 1, 0, :] = r[..., K_.Q_A0, 1:]
        out[..., 1, 1, :] = r[..., K_.Q_B0, 1:]
        return out

    def __getitem__(self, idx) -> "FramePacket":
        def take(x):
            return x[idx] if isinstance(x, np.ndarray) and x.ndim else x

        kw = {}
        for name in self.__dataclass_fields__:
            val = getattr(self, name)
            if isinstance(val, tuple):
                val = type(val)(*(take(np.asarray(c)) for c in val))
            elif isinstance(val, np.ndarray):
                val = take(val)
            kw[name] = val
        return FramePacket(**kw)


def evaluate_frame(patch: SurfacePatch, u, v, check_domain: bool = True) -> FramePacket:
    """Frame packet of ``patch`` at ``(u, v)``; scalars or broadcastable arrays."""
    u_arr, v_arr = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    shape = u_arr.shape
    uf, vf = u_arr.ravel(), v_arr.ravel()
    if check_domain:
        inside = patch.contains(uf, vf)
        if not np.all(inside):
            i = int(np.flatnonzero(~inside)[0])
            raise DomainError(f"({float(uf[i])!r}, {float(vf[i])!r}) outside the domain {patch.domain} of {patch.name}")

    imm = patch.immersion_jets(uf, vf)
    q, diag = K_.frame_kernel(imm, patch.sigma)
    _check_nodes(patch, uf, vf, diag)

    c, s, A = q[:, K_.Q_COS, 0], q[:, K_.Q_SIN, 0], q[:, K_.Q_A, 0]
    P = np.empty((uf.size, 2, 2))
    P[:, 0, 0] = q[:, K_.Q_P11, 0]
    P[:, 0, 1] = q[:, K_.Q_P12, 0]
    P[:, 1, 0] = q[:, K_.Q_A0, 0]
    P[:, 1, 1] = q[:, K_.Q_B0, 0]
    P_inv = np.linalg.inv(P)

    # d alpha = cos d(sin) - sin d(cos); never through an unwrapped angle
    dalpha_uv = c[:, None] * q[:, K_.Q_SIN, 1:] - s[:, None] * q[:, K_.Q_COS, 1:]
    dA_uv = q[:, K_.Q_A, 1:]
    # value on f_i = sum_j d(.)(d_j) (P^-1)_{ji}
    dalpha = np.einsum("nj,nji->ni", dalpha_uv, P_inv)
    dA = np.einsum("nj,nji->ni", dA_uv, P_inv)
    Kc = dA[:, 0] * dalpha[:, 1] - dA[:, 1] * dalpha[:, 0]
    cond = np.linalg.cond(P)

    def r(x):
        return x.reshape(shape + x.shape[1:])

    return FramePacket(
        u=u_arr.copy(),
        v=v_arr.copy(),
        sigma=patch.sigma,
        p=Point(*(r(imm[:, k, 0]) for k in range(3))),
        du_f=FrameVector(*(r(q[:, k, 0]) for k in (K_.Q_A0, K_.Q_A1, K_.Q_A2))),
        dv_f=FrameVector(*(r(q[:, k, 0]) for k in (K_.Q_B0, K_.Q_B1, K_.Q_B2))),
        cos_alpha=r(c),
        sin_alpha=r(s),
        A=r(A),
        P=r(P),
        P_inv=r(P_inv),
        dalpha=r(dalpha),
        dA_form=r(dA),
        dalpha_uv=r(dalpha_uv),
        dA_uv=r(dA_uv),
        K=r(Kc),
        margin=r(diag[:, K_.D_MARGIN]),
        cond_P=r(cond),
        raw=r(q),
    )


def _check_nodes(patch, uf, vf, diag):
    bad = ~(diag[:, K_.D_INDEP] >= DEGENERACY_TOL)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise DegenerateImmersion(
            f"{patch.name}: coordinate tangents are dependent at (u, v) = ({float(uf[i])!r}, {float(vf[i])!r})",
            where=(float(uf[i]), float(vf[i])),
        )
    bad = ~(diag[:, K_.D_MARGIN] >= CHARACTERISTIC_TOL)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise CharacteristicPoint(
            f"{patch.name}: characteristic point (TS = D) at (u, v) = ({float(uf[i])!r}, {float(vf[i])!r}), "
            f"margin {diag[i, K_.D_MARGIN]:.3e}",
            where=(float(uf[i]), float(vf[i])),
        )
    bad = diag[:, K_.D_AMISMATCH] > A_MISMATCH_TOL
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise InconsistentFrame(
            f"{patch.name}: A disagrees between coordinate tangents at ({float(uf[i])!r}, {float(vf[i])!r})",
            where=(float(uf[i]), float(vf[i])),
        )


def characteristic_margin(patch: SurfacePatch, u, v) -> np.ndarray:
    """Margin ``m`` without raising; used to scan for the characteristic locus."""
    u_arr, v_arr = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        _, diag = K_.frame_kernel(patch.immersion_jets(u_arr, v_arr), patch.sigma)
    return diag[:, K_.D_MARGIN].reshape(u_arr.shape)


def contact_components(patch: SurfacePatch, u, v) -> tuple[np.ndarray, np.ndarray]:
    """``(e^0(d/du), e^0(d/dv))``; both vanish exactly at characteristic points."""
    u_arr, v_arr = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    imm = patch.immersion_jets(u_arr, v_arr)
    x, y = imm[:, 0, 0], imm[:, 1, 0]
    e0 = [imm[:, 2, d] + 0.5 * (y * imm[:, 0, d] - x * imm[:, 1, d]) for d in (1, 2)]
    return e0[0].reshape(u_arr.shape), e0[1].reshape(u_arr.shape)


def characteristic_cells(patch: SurfacePatch, nu: int, nv: int) -> list[tuple[float, float, int]]:
    """Centres and indices of grid cells around which ``(e^0(d/du), e^0(d/dv))`` winds.

    Isolated characteristic points are zeros of this planar field, so a grid
    that misses them pointwise still sees a nonzero winding number.
    """
    u0, u1, v0, v1 = patch.domain
    us, vs = np.linspace(u0, u1, nu + 1), np.linspace(v0, v1, nv + 1)
    U, V = np.meshgrid(us, vs, indexing="ij")
    a, b = contact_components(patch, U, V)
    th = np.arctan2(b, a)

    def step(p, q):
        return np.angle(np.exp(1j * (q - p)))

    wind = (step(th[:-1, :-1], th[1:, :-1]) + step(th[1:, :-1], th[1:, 1:])
            + step(th[1:, 1:], th[:-1, 1:]) + step(th[:-1, 1:], th[:-1, :-1]))
    idx = np.argwhere(np.abs(wind) > np.pi)
    return [(float(0.5 * (us[i] + us[i + 1])), float(0.5 * (vs[j] + vs[j + 1])),
             int(np.rint(wind[i, j] / (2 * np.pi)))) for i, j in idx]


# -- tangent bookkeeping -----------------------------------------------------


def tangent_from_uv(fp: FramePacket, cu, cv) -> SurfaceTangent:
    """``cu d/du + cv d/dv`` written on ``(f1, f2)``."""
    P = fp.P
    return SurfaceTangent(P[..., 0, 0] * cu + P[..., 0, 1] * cv, P[..., 1, 0] * cu + P[..., 1, 1] * cv)


def tangent_to_uv(fp: FramePacket, X: SurfaceTangent) -> tuple:
    Pi = fp.P_inv
    return (Pi[..., 0, 0] * X.c1 + Pi[..., 0, 1] * X.c2, Pi[..., 1, 0] * X.c1 + Pi[..., 1, 1] * X.c2)


def tangent_to_frame(fp: FramePacket, X: SurfaceTangent) -> FrameVector:
    f1, f2 = fp.f1, fp.f2
    return FrameVector(*(X.c1 * a + X.c2 * b for a, b in zip(f1, f2)))


def tangent_inner(fp: FramePacket, X: SurfaceTangent, Y: SurfaceTangent):
    """Scalar product of the horizontal parts (``<f2, f1> = 0``, ``<f2, f2> = A^2``)."""
    return X.c1 * Y.c1 + fp.A**2 * X.c2 * Y.c2


def coframe_on_surface(fp: FramePacket) -> tuple[FrameCovector, FrameCovector, FrameCovector]:
    """``(eta*, f^1, f^2)``, the coframe dual to ``(eta, f1, f2)``."""
    c, s, A = fp.cos_alpha, fp.sin_alpha, fp.A
    zero = 0.0 * A
    return (
        FrameCovector(-A, c, s),
        FrameCovector(zero, -s, c),
        FrameCovector(1.0 + zero, zero, zero),
    )


def form_on(form: np.ndarray, X: SurfaceTangent):
    return form[..., 0] * X.c1 + form[..., 1] * X.c2


def wedge(a: np.ndarray, b: np.ndarray, X: SurfaceTangent, Y: SurfaceTangent):
    return form_on(a, X) * form_on(b, Y) - form_on(a, Y) * form_on(b, X)


def area_form(X: SurfaceTangent, Y: SurfaceTangent):
    """``f^1 ^ f^2 (X, Y)``."""
    return X.c1 * Y.c2 - X.c2 * Y.c1


# -- invariants --------------------------------------------------------------


def structure_residual(fp: FramePacket):
    """``d alpha(f2) + dA(f1) + A^2``, which vanishes on every surface."""
    return fp.dalpha[..., 1] + fp.dA_form[..., 0] + fp.A**2


def curvature_as_minus_dalpha_dA(fp: FramePacket):
    """``-d alpha ^ dA (f1, f2)``, the Gauss-map form of ``K``."""
    a, b = fp.dalpha, fp.dA_form
    return -(a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0])


def gauss_map(fp: FramePacket) -> Point:
    return Point(fp.cos_alpha, fp.sin_alpha, -fp.A)


def gauss_map_pushforward_density(fp: FramePacket):
    """``(f~^1 ^ f~^2)(g_* d/du, g_* d/dv)`` computed on the cylinder image.

    The pushed-forward tangents are taken in coordinates from the jets of
    ``(cos alpha, sin alpha, -A)`` and converted to the frame at ``g(p)``.
    """
    r = fp.raw
    g = gauss_map(fp)
    cols = []
    for k in (1, 2):
        w = (r[..., K_.Q_COS, k], r[..., K_.Q_SIN, k], -r[..., K_.Q_A, k])
        cols.append(coordinate_to_frame(w, g))
    x, y = g.x, g.y

    def f1_tilde(w):
        return -y * w.a1 + x * w.a2

    Gu, Gv = cols
    return f1_tilde(Gu) * Gv.a0 - f1_tilde(Gv) * Gu.a0


def second_fundamental_form(fp: FramePacket, X: SurfaceTangent, Y: SurfaceTangent):
    """``V(X, Y) = -d alpha(X) f^1(Y) + dA(X) f^2(Y)``."""
    return -form_on(fp.dalpha, X) * Y.c1 + form_on(fp.dA_form, X) * Y.c2


def curvature_tensor(fp: FramePacket, X, Y, Z) -> SurfaceTangent:
    """``R(X, Y) Z = dA ^ d alpha (X, Y) f^2(Z) f1``."""
    coeff = wedge(fp.dA_form, fp.dalpha, X, Y) * Z.c2
    return SurfaceTangent(coeff, 0.0 * coeff)


def torsion_eval(fp: FramePacket, X, Y) -> SurfaceTangent:
    """``T(X, Y) = A f^1 ^ f^2 (X, Y) f2``."""
    t = fp.A * area_form(X, Y)
    return SurfaceTangent(0.0 * t, t)


# -- connection on coordinate fields ------------------------------------------
#
# Coordinate fields X = xu d/du + xv d/dv with constant coefficients commute, so
# brackets vanish.  With X = x^1 f1 + x^2 f2 the projected connection reads
#     nabla_X Y = (X(y^1) + A d alpha(X) y^2) f1 + X(y^2) f2.


def _coord(X):
    return np.asarray(X[0], dtype=float), np.asarray(X[1], dtype=float)


def _derivative_of_components(fp, X, Y):
    """``X(y^i)`` for coordinate fields, from the first partials of ``P``."""
    xu, xv = _coord(X)
    yu, yv = _coord(Y)
    dP = fp.dP()
    along = dP[..., 0] * xu + dP[..., 1] * xv  # (..., 2, 2): X(P_ij)
    return along[..., :, 0] * yu + along[..., :, 1] * yv  # (..., 2)


def _dalpha_coord(fp, X):
    xu, xv = _coord(X)
    return fp.dalpha_uv[..., 0] * xu + fp.dalpha_uv[..., 1] * xv


def _dA_coord(fp, X):
    xu, xv = _coord(X)
    return fp.dA_uv[..., 0] * xu + fp.dA_uv[..., 1] * xv


def covariant_derivative_coord(fp: FramePacket, X, Y) -> SurfaceTangent:
    """``nabla_X Y`` for constant-coefficient coordinate fields ``X, Y = (cu, cv)``."""
    y = tangent_from_uv(fp, *_coord(Y))
    Xy = _derivative_of_components(fp, X, Y)
    return SurfaceTangent(Xy[..., 0] + fp.A * _dalpha_coord(fp, X) * y.c2, Xy[..., 1])


def torsion_from_connection(fp: FramePacket, X, Y) -> SurfaceTangent:
    a = covariant_derivative_coord(fp, X, Y)
    b = covariant_derivative_coord(fp, Y, X)
    return SurfaceTangent(a.c1 - b.c1, a.c2 - b.c2)


def _V_coord_part(fp, X, Y, Z):
    # X(V(Y, Z)) minus the Hessian terms of alpha and A, which are symmetric in
    # (X, Y) and drop out of every antisymmetrised combination used below
    z = tangent_from_uv(fp, *_coord(Z))
    Xz = _derivative_of_components(fp, X, Z)
    return -_dalpha_coord(fp, Y) * Xz[..., 0] + _dA_coord(fp, Y) * Xz[..., 1], z


def codazzi_residual(fp: FramePacket, X, Y, Z, hessians=None):
    """``(nabla_X V)(Y, Z) - (nabla_Y V)(X, Z) + V(T(X, Y), Z)`` for coordinate fields.

    ``hessians``, if given as ``(H_alpha, H_A)`` arrays of shape ``(..., 2, 2)``,
    restores the second-derivative terms explicitly (used with finite
    differences to cross-check the cancellation).
    """
    z = tangent_from_uv(fp, *_coord(Z))
    xt = tangent_from_uv(fp, *_coord(X))
    yt = tangent_from_uv(fp, *_coord(Y))

    def nabla_V(X_, Y_, Yt):
        part, _ = _V_coord_part(fp, X_, Y_, Z)
        if hessians is not None:
            Ha, HA = hessians
            xu, xv = _coord(X_)
            yu, yv = _coord(Y_)
            hxy_a = Ha[..., 0, 0] * xu * yu + Ha[..., 0, 1] * (xu * yv + xv * yu) + Ha[..., 1, 1] * xv * yv
            hxy_A = HA[..., 0, 0] * xu * yu + HA[..., 0, 1] * (xu * yv + xv * yu) + HA[..., 1, 1] * xv * yv
            part = part - hxy_a * z.c1 + hxy_A * z.c2
        nxy = covariant_derivative_coord(fp, X_, Y_)
        nxz = covariant_derivative_coord(fp, X_, Z)
        return part - second_fundamental_form(fp, nxy, z) - second_fundamental_form(fp, Yt, nxz)

    T = torsion_eval(fp, xt, yt)
    return nabla_V(X, Y, yt) - nabla_V(Y, X, xt) + second_fundamental_form(fp, T, z)


def gauss_residual(fp: FramePacket, X, Y, Z) -> SurfaceTangent:
    """``R(X, Y) Z - (-d alpha(X) V(Y, Z) + d alpha(Y) V(X, Z)) f1`` (tangents on (f1, f2))."""
    R = curvature_tensor(fp, X, Y, Z)
    rhs = -form_on(fp.dalpha, X) * second_fundamental_form(fp, Y, Z) + form_on(
        fp.dalpha, Y
    ) * second_fundamental_form(fp, X, Z)
    return SurfaceTangent(R.c1 - rhs, R.c2)


def gauss_codazzi_residuals(patch: SurfacePatch, u, v, X, Y, Z):
    """Gauss and Codazzi residuals for coordinate fields ``X, Y, Z = (cu, cv)``."""
    fp = evaluate_frame(patch, u, v)
    xt, yt, zt = (tangent_from_uv(fp, *_coord(W)) for W in (X, Y, Z))
    return gauss_residual(fp, xt, yt, zt), codazzi_residual(fp, X, Y, Z)


def adapted_connection_ambient(Y: FrameVector) -> FrameVector:
    """Flat adapted derivative along a curve: differentiate frame coefficients.

    ``Y`` holds :class:`~h1geo.jets.CurveJet2` coefficients ``(b0, b1, b2)``
    of a field along a curve; the result is ``sum_j (d b_j/dt) e_j``.
    """
    return FrameVector(Y.a0.dt, Y.a1.dt, Y.a2.dt)
