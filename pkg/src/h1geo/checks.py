"""Residual tables for the pointwise identities of a surface.

Every residual is evaluated on all eight triples of coordinate fields
``(X, Y, Z)`` drawn from ``{d/du, d/dv}`` and reduced to max/mean over nodes.
``jet_vs_fd`` compares jet partials of ``cos alpha``, ``sin alpha`` and ``A``
with central differences of their values, and ``K_vs_fd`` rebuilds ``K``
from those differences alone.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import _kernels as K_
from .jets import default_step
from .surface import (
    SurfacePatch,
    SurfaceTangent,
    area_form,
    codazzi_residual,
    curvature_tensor,
    evaluate_frame,
    gauss_residual,
    second_fundamental_form,
    structure_residual,
    tangent_from_uv,
    torsion_eval,
    torsion_from_connection,
)

DEFAULT_TOLERANCES = {
    "structure_identity": 1e-8,
    "V_antisymmetry": 1e-8,
    "gauss": 1e-7,
    "codazzi": 1e-7,
    "torsion": 1e-8,
    "curvature_tensor": 1e-8,
    "jet_vs_fd": 1e-6,
    "K_vs_fd": 1e-6,
}

_FIELDS = ((1.0, 0.0), (0.0, 1.0))


def _stat(x) -> dict:
    x = np.abs(np.asarray(x, dtype=float))
    return {"max": float(np.max(x)), "mean": float(np.mean(x))}


def _max_over(values) -> np.ndarray:
    return np.max(np.abs(np.stack([np.asarray(v, dtype=float) for v in values])), axis=0)


def fd_first_partials(patch: SurfacePatch, u, v):
    """Central differences of ``cos alpha``, ``sin alpha``, ``A`` and the entries of ``P``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    h = np.vectorize(default_step)(u, v)

    def values(uu, vv):
        fp = evaluate_frame(patch, uu, vv, check_domain=False)
        return np.stack([fp.cos_alpha, fp.sin_alpha, fp.A])

    du = (values(u + h, v) - values(u - h, v)) / (2 * h)
    dv = (values(u, v + h) - values(u, v - h)) / (2 * h)
    return du, dv


def residual_table(patch: SurfacePatch, u, v) -> dict:
    """Max/mean of every residual at the nodes ``(u, v)`` (flat arrays)."""
    fp = evaluate_frame(patch, u, v)
    tan = [tangent_from_uv(fp, *X) for X in _FIELDS]

    struct = structure_residual(fp)

    antisym = []
    for (i, X), (j, Y) in itertools.product(enumerate(tan), repeat=2):
        d = second_fundamental_form(fp, X, Y) - second_fundamental_form(fp, Y, X)
        antisym.append(d + fp.A**2 * area_form(X, Y))

    gauss, codazzi, torsion = [], [], []
    for a, b, c in itertools.product(range(2), repeat=3):
        g = gauss_residual(fp, tan[a], tan[b], tan[c])
        gauss += [g.c1, g.c2]
        codazzi.append(codazzi_residual(fp, _FIELDS[a], _FIELDS[b], _FIELDS[c]))
    for a, b in itertools.product(range(2), repeat=2):
        t1 = torsion_from_connection(fp, _FIELDS[a], _FIELDS[b])
        t2 = torsion_eval(fp, tan[a], tan[b])
        torsion += [t1.c1 - t2.c1, t1.c2 - t2.c2]

    one = 1.0 + 0.0 * fp.A
    zero = 0.0 * fp.A
    f1, f2 = SurfaceTangent(one, zero), SurfaceTangent(zero, one)
    Rf1 = curvature_tensor(fp, f1, f2, f1)
    Rf2 = curvature_tensor(fp, f1, f2, f2)
    tensor = [Rf1.c1, Rf1.c2, Rf2.c1 - fp.K]

    # jets against finite differences of values
    du_fd, dv_fd = fd_first_partials(patch, fp.u, fp.v)
    qs = (K_.Q_COS, K_.Q_SIN, K_.Q_A)
    jet = np.stack([fp.raw[:, q, 1] for q in qs]), np.stack([fp.raw[:, q, 2] for q in qs])
    fd_delta = np.max(np.concatenate([
        np.abs(jet[0] - du_fd) / np.maximum(1.0, np.abs(jet[0])),
        np.abs(jet[1] - dv_fd) / np.maximum(1.0, np.abs(jet[1])),
    ]), axis=0)

    c, s = fp.cos_alpha, fp.sin_alpha
    dalpha_uv = np.stack([c * du_fd[1] - s * du_fd[0], c * dv_fd[1] - s * dv_fd[0]], axis=-1)
    dA_uv = np.stack([du_fd[2], dv_fd[2]], axis=-1)
    K_fd = (dA_uv[:, 0] * dalpha_uv[:, 1] - dA_uv[:, 1] * dalpha_uv[:, 0]) / fp.det_P
    K_delta = np.abs(K_fd - fp.K) / np.maximum(1.0, np.abs(fp.K))

    return {
        "structure_identity": _stat(struct),
        "V_antisymmetry": _stat(_max_over(antisym)),
        "gauss": _stat(_max_over(gauss)),
        "codazzi": _stat(_max_over(codazzi)),
        "torsion": _stat(_max_over(torsion)),
        "curvature_tensor": _stat(_max_over(tensor)),
        "jet_vs_fd": _stat(fd_delta),
        "K_vs_fd": _stat(K_delta),
    }


def grid(patch: SurfacePatch, nu: int, nv: int):
    u0, u1, v0, v1 = patch.domain
    U, V = np.meshgrid(np.linspace(u0, u1, nu), np.linspace(v0, v1, nv), indexing="ij")
    return U.ravel(), V.ravel()
