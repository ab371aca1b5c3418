"""Per-node frame kernel with two interchangeable backends.

Input is an array ``imm`` of shape ``(N, 3, 6)`` holding, for each node, the
second-order jets of the immersion coordinates ``x, y, z`` in the field order
``(v, du, dv, duu, duv, dvv)``.  Output is

* ``q`` of shape ``(N, NQ, 3)``: value, ``d/du`` and ``d/dv`` of the
  quantities indexed by the ``Q_*`` constants below;
* ``diag`` of shape ``(N, ND)``: characteristic margin, ``|det P|``, the
  cross-check of ``A`` between the two coordinate tangents, and the
  immersion degeneracy measure.

The numpy backend runs the :class:`~h1geo.jets.Jet2` arithmetic vectorised over
nodes.  The numba backend is a hand-expanded scalar loop of the same
formulas.  ``H1GEO_BACKEND=numpy`` forces the numpy path; by default numba is
used when it imports.
"""

from __future__ import annotations

import os

import numpy as np

from .jets import Jet2

Q_A0, Q_A1, Q_A2, Q_B0, Q_B1, Q_B2, Q_COS, Q_SIN, Q_A, Q_P11, Q_P12 = range(11)
NQ = 11
D_MARGIN, D_DETP, D_AMISMATCH, D_INDEP = range(4)
ND = 4

# other tangent must carry at least this fraction of the chosen tangent's e^0
_A_CHECK_RATIO = 1e-3


def _pack(quantities, diag_cols):
    n = np.asarray(quantities[0].v).shape[0]
    q = np.empty((n, NQ, 3))
    for i, jet in enumerate(quantities):
        q[:, i, 0] = jet.v
        q[:, i, 1] = jet.du
        q[:, i, 2] = jet.dv
    return q, np.stack(diag_cols, axis=1)


def frame_kernel_numpy(imm: np.ndarray, sigma: float):
    imm = np.asarray(imm, dtype=float)
    x, y, z = (Jet2(*imm[:, k, :].T) for k in range(3))
    xu, yu, zu = x.d_u(), y.d_u(), z.d_u()
    xv, yv, zv = x.d_v(), y.d_v(), z.d_v()

    # frame coefficients of the coordinate tangents
    a0 = zu + 0.5 * (y * xu - x * yu)
    b0 = zv + 0.5 * (y * xv - x * yv)
    a1, a2, b1, b2 = xu, yu, xv, yv

    with np.errstate(divide="ignore", invalid="ignore"):
        # horizontal tangent direction e0(dv) du - e0(du) dv
        h1 = b0 * a1 - a0 * b1
        h2 = b0 * a2 - a0 * b2
        nh2 = h1 * h1 + h2 * h2
        r = np.sqrt(nh2.v)
        norm = nh2.chain(r, 0.5 / r, -0.25 / (r * nh2.v))
        cos_a = sigma * h2 / _safe(norm)
        sin_a = -sigma * h1 / _safe(norm)

        use_u = np.abs(a0.v) >= np.abs(b0.v)
        A_u = (cos_a * a1 + sin_a * a2) / _safe(a0)
        A_v = (cos_a * b1 + sin_a * b2) / _safe(b0)
        A = Jet2(*(np.where(use_u, p, q) for p, q in zip(A_u.fields(), A_v.fields())))

        p11 = -sin_a * a1 + cos_a * a2
        p12 = -sin_a * b1 + cos_a * b2

        e_main = np.where(use_u, np.abs(a0.v), np.abs(b0.v))
        e_other = np.where(use_u, np.abs(b0.v), np.abs(a0.v))
        h_other = np.where(use_u, np.hypot(b1.v, b2.v), np.hypot(a1.v, a2.v))
        A_other = np.where(use_u, A_v.v, A_u.v)
        checked = e_other >= _A_CHECK_RATIO * e_main
        mismatch = np.where(
            checked,
            np.abs(A.v - A_other) / (1.0 + np.abs(A.v) + h_other / e_other),
            0.0,
        )

        na = np.sqrt(a0.v**2 + a1.v**2 + a2.v**2)
        nb = np.sqrt(b0.v**2 + b1.v**2 + b2.v**2)
        margin = np.maximum(np.abs(a0.v), np.abs(b0.v)) / (na + nb)
        cx = a1.v * b2.v - a2.v * b1.v
        cy = a2.v * b0.v - a0.v * b2.v
        cz = a0.v * b1.v - a1.v * b0.v
        indep = np.sqrt(cx * cx + cy * cy + cz * cz) / (na * nb)

    return _pack(
        (a0, a1, a2, b0, b1, b2, cos_a, sin_a, A, p11, p12),
        (margin, r, mismatch, indep),
    )


def _safe(j):
    # zero values only occur at rejected (characteristic/degenerate) nodes
    if isinstance(j, Jet2):
        v = np.where(j.v == 0, np.nan, j.v)
        return Jet2(v, j.du, j.dv, j.duu, j.duv, j.dvv)
    return j


# -- numba backend -----------------------------------------------------------

try:  # pragma: no cover - exercised implicitly when numba is present
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


if HAVE_NUMBA:

    @njit(cache=True, inline="always")
    def _mul(a, b):
        return (a[0] * b[0], a[1] * b[0] + a[0] * b[1], a[2] * b[0] + a[0] * b[2])

    @njit(cache=True, inline="always")
    def _div(a, b):
        q = a[0] / b[0]
        return (q, (a[1] - q * b[1]) / b[0], (a[2] - q * b[2]) / b[0])

    @njit(cache=True, inline="always")
    def _add(a, b):
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2])

    @njit(cache=True, inline="always")
    def _sub(a, b):
        return (a[0] - b[0], a[1] - b[1], a[2] - b[2])

    @njit(cache=True, inline="always")
    def _scale(s, a):
        return (s * a[0], s * a[1], s * a[2])

    @njit(cache=True)
    def _frame_loop(imm, sigma, q, diag):
        n = imm.shape[0]
        for i in range(n):
            x = (imm[i, 0, 0], imm[i, 0, 1], imm[i, 0, 2])
            y = (imm[i, 1, 0], imm[i, 1, 1], imm[i, 1, 2])
            xu = (imm[i, 0, 1], imm[i, 0, 3], imm[i, 0, 4])
            yu = (imm[i, 1, 1], imm[i, 1, 3], imm[i, 1, 4])
            zu = (imm[i, 2, 1], imm[i, 2, 3], imm[i, 2, 4])
            xv = (imm[i, 0, 2], imm[i, 0, 4], imm[i, 0, 5])
            yv = (imm[i, 1, 2], imm[i, 1, 4], imm[i, 1, 5])
            zv = (imm[i, 2, 2], imm[i, 2, 4], imm[i, 2, 5])

            a0 = _add(zu, _scale(0.5, _sub(_mul(y, xu), _mul(x, yu))))
            b0 = _add(zv, _scale(0.5, _sub(_mul(y, xv), _mul(x, yv))))
            a1, a2, b1, b2 = xu, yu, xv, yv

            h1 = _sub(_mul(b0, a1), _mul(a0, b1))
            h2 = _sub(_mul(b0, a2), _mul(a0, b2))
            nh2 = _add(_mul(h1, h1), _mul(h2, h2))
            r = np.sqrt(nh2[0])
            if r > 0.0:
                norm = (r, 0.5 * nh2[1] / r, 0.5 * nh2[2] / r)
                cos_a = _scale(sigma, _div(h2, norm))
                sin_a = _scale(-sigma, _div(h1, norm))
            else:
                cos_a = (np.nan, np.nan, np.nan)
                sin_a = (np.nan, np.nan, np.nan)

            num_u = _add(_mul(cos_a, a1), _mul(sin_a, a2))
            num_v = _add(_mul(cos_a, b1), _mul(sin_a, b2))
            ea, eb = abs(a0[0]), abs(b0[0])
            if ea >= eb:
                A = _div(num_u, a0) if ea > 0.0 else (np.nan, np.nan, np.nan)
                e_main, e_other = ea, eb
                h_other = np.sqrt(b1[0] ** 2 + b2[0] ** 2)
                A_other = num_v[0] / b0[0] if eb > 0.0 else np.nan
            else:
                A = _div(num_v, b0)
                e_main, e_other = eb, ea
                h_other = np.sqrt(a1[0] ** 2 + a2[0] ** 2)
                A_other = num_u[0] / a0[0] if ea > 0.0 else np.nan
            if e_other >= 1e-3 * e_main and e_other > 0.0:
                mism = abs(A[0] - A_other) / (1.0 + abs(A[0]) + h_other / e_other)
            else:
                mism = 0.0

            p11 = _add(_scale(-1.0, _mul(sin_a, a1)), _mul(cos_a, a2))
            p12 = _add(_scale(-1.0, _mul(sin_a, b1)), _mul(cos_a, b2))

            vals = (a0, a1, a2, b0, b1, b2, cos_a, sin_a, A, p11, p12)
            for k in range(11):
                jk = vals[k]
                q[i, k, 0] = jk[0]
                q[i, k, 1] = jk[1]
                q[i, k, 2] = jk[2]

            na = np.sqrt(a0[0] ** 2 + a1[0] ** 2 + a2[0] ** 2)
            nb = np.sqrt(b0[0] ** 2 + b1[0] ** 2 + b2[0] ** 2)
            cx = a1[0] * b2[0] - a2[0] * b1[0]
            cy = a2[0] * b0[0] - a0[0] * b2[0]
            cz = a0[0] * b1[0] - a1[0] * b0[0]
            diag[i, 0] = max(ea, eb) / (na + nb)
            diag[i, 1] = r
            diag[i, 2] = mism
            diag[i, 3] = np.sqrt(cx * cx + cy * cy + cz * cz) / (na * nb)


def frame_kernel_numba(imm: np.ndarray, sigma: float):
    if not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    imm = np.ascontiguousarray(imm, dtype=np.float64)
    n = imm.shape[0]
    q = np.empty((n, NQ, 3))
    diag = np.empty((n, ND))
    _frame_loop(imm, float(sigma), q, diag)
    return q, diag


def _select_backend() -> str:
    requested = os.environ.get("H1GEO_BACKEND", "").strip().lower()
    if requested == "numpy":
        return "numpy"
    if requested == "numba" and not HAVE_NUMBA:
        raise RuntimeError("H1GEO_BACKEND=numba but numba is not installed")
    return "numba" if HAVE_NUMBA else "numpy"


BACKEND = _select_backend()


def frame_kernel(imm: np.ndarray, sigma: float):
    if BACKEND == "numba":
        return frame_kernel_numba(imm, sigma)
    return frame_kernel_numpy(imm, sigma)


__all__ = [
    "BACKEND",
    "HAVE_NUMBA",
    "NQ",
    "ND",
    "frame_kernel",
    "frame_kernel_numba",
    "frame_kernel_numpy",
]
