"""Adaptive Gauss-Legendre quadrature on intervals and on the unit square.

Panels carry a degree-8 rule (tensor rule in 2D).  A panel is split
dyadically; the split is accepted once the parent estimate and the sum of its
children differ by less than ``max(atol, rtol * |children|)``, and the more
accurate children sum is kept.  Whole refinement levels are evaluated in one
vectorised integrand call.

Integrands may be vector valued: they receive flat node arrays and return an
array of shape ``(N,)`` or ``(m, N)``; acceptance uses the worst component.
Accepted contributions are summed with ``math.fsum`` so the result does not
depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonConvergence

DEGREE = 8
ATOL = 1e-10
MAX_DEPTH = 12


@dataclass(frozen=True)
class QuadratureReport:
    value: float | np.ndarray
    error_estimate: float
    nodes_used: int
    refinement_depth: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.value)):
            raise NonConvergence(f"quadrature produced a non-finite value {self.value!r}")

    def combine(self, other: "QuadratureReport") -> "QuadratureReport":
        return QuadratureReport(
            _fsum_rows(
                [np.atleast_1d(self.value)[:, None], np.atleast_1d(other.value)[:, None]],
                np.ndim(self.value) == 0,
            ),
            self.error_estimate + other.error_estimate,
            self.nodes_used + other.nodes_used,
            max(self.refinement_depth, other.refinement_depth),
        )


@lru_cache(maxsize=None)
def gauss_legendre(degree: int = DEGREE) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(degree)
    return 0.5 * (x + 1.0), 0.5 * w


def _as_rows(vals, npts):
    vals = np.asarray(vals, dtype=float)
    if vals.ndim == 1:
        return vals[None, :], True
    return vals.reshape(vals.shape[0], npts), False


def _fsum_rows(parts, scalar):
    stacked = np.concatenate([np.atleast_2d(p).T for p in parts], axis=0) if parts else np.zeros((0, 1))
    out = np.array([math.fsum(stacked[:, j]) for j in range(stacked.shape[1])])
    return float(out[0]) if scalar else out


def _accept_mask(parent, children, atol, rtol):
    diff = np.max(np.abs(parent - children), axis=0)
    scale = np.max(np.abs(children), axis=0)
    return diff <= np.maximum(atol, rtol * scale), diff


def integrate_1d(f, a: float, b: float, *, atol=ATOL, rtol=0.0, max_depth=MAX_DEPTH,
                 min_depth=0, fixed_depth=None, degree=DEGREE) -> QuadratureReport:
    """Integrate ``f`` over ``[a, b]``."""
    x, w = gauss_legendre(degree)
    scalar = None
    nodes = 0

    def estimate(lo, hi):
        nonlocal scalar, nodes
        t = lo[:, None] + (hi - lo)[:, None] * x[None, :]
        rows, is_scalar = _as_rows(f(t.ravel()), t.size)
        scalar = is_scalar if scalar is None else scalar
        nodes += t.size
        return (rows.reshape(rows.shape[0], *t.shape) * w).sum(-1) * (hi - lo)

    if fixed_depth is not None:
        edges = np.linspace(a, b, 2**fixed_depth + 1)
        fine = estimate(edges[:-1], edges[1:])
        if fixed_depth > 0:
            coarse_edges = edges[::2]
            coarse = estimate(coarse_edges[:-1], coarse_edges[1:])
        else:
            coarse_edges = np.array([a, 0.5 * (a + b), b])
            coarse = estimate(coarse_edges[:-1], coarse_edges[1:])
        err = float(np.max(np.abs(coarse.sum(-1) - fine.sum(-1))))
        return QuadratureReport(_fsum_rows([fine], scalar), err, nodes, fixed_depth)

    lo, hi = np.array([a], float), np.array([b], float)
    parent = estimate(lo, hi)
    accepted, err, depth = [], 0.0, 0
    while lo.size:
        if depth >= max_depth:
            raise NonConvergence(
                f"1D quadrature did not converge by depth {max_depth} on [{a}, {b}]; "
                f"{lo.size} panels unresolved near t={lo[0]!r}"
            )
        mid = 0.5 * (lo + hi)
        clo = np.stack([lo, mid], axis=1).ravel()
        chi = np.stack([mid, hi], axis=1).ravel()
        child = estimate(clo, chi)
        csum = child[:, 0::2] + child[:, 1::2]
        ok, diff = _accept_mask(parent, csum, atol, rtol)
        depth += 1
        if depth < min_depth:
            ok[:] = False
        accepted.append(csum[:, ok])
        err += float(diff[ok].sum())
        keep = np.repeat(~ok, 2)
        lo, hi, parent = clo[keep], chi[keep], child[:, keep]
    return QuadratureReport(_fsum_rows(accepted, scalar), err, nodes, depth)


def integrate_square(g, *, atol=ATOL, rtol=0.0, max_depth=MAX_DEPTH, min_depth=0,
                     fixed_depth=None, degree=DEGREE) -> QuadratureReport:
    """Integrate ``g(s, t)`` over the unit square ``[0, 1]^2``."""
    x, w = gauss_legendre(degree)
    X, Y = np.meshgrid(x, x, indexing="ij")
    X, Y, W = X.ravel(), Y.ravel(), np.outer(w, w).ravel()
    scalar = None
    nodes = 0

    def estimate(x0, x1, y0, y1):
        nonlocal scalar, nodes
        s = x0[:, None] + (x1 - x0)[:, None] * X[None, :]
        t = y0[:, None] + (y1 - y0)[:, None] * Y[None, :]
        rows, is_scalar = _as_rows(g(s.ravel(), t.ravel()), s.size)
        scalar = is_scalar if scalar is None else scalar
        nodes += s.size
        return (rows.reshape(rows.shape[0], *s.shape) * W).sum(-1) * ((x1 - x0) * (y1 - y0))

    def split(x0, x1, y0, y1):
        xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        cx0 = np.stack([x0, xm, x0, xm], axis=1).ravel()
        cx1 = np.stack([xm, x1, xm, x1], axis=1).ravel()
        cy0 = np.stack([y0, y0, ym, ym], axis=1).ravel()
        cy1 = np.stack([ym, ym, y1, y1], axis=1).ravel()
        return cx0, cx1, cy0, cy1

    if fixed_depth is not None:
        e = np.linspace(0.0, 1.0, 2**fixed_depth + 1)
        gx0, gy0 = np.meshgrid(e[:-1], e[:-1], indexing="ij")
        gx1, gy1 = np.meshgrid(e[1:], e[1:], indexing="ij")
        fine = estimate(gx0.ravel(), gx1.ravel(), gy0.ravel(), gy1.ravel())
        # compare with the next coarser level (or the next finer one at depth 0)
        other = fixed_depth - 1 if fixed_depth > 0 else 1
        e2 = np.linspace(0.0, 1.0, 2**other + 1)
        hx0, hy0 = np.meshgrid(e2[:-1], e2[:-1], indexing="ij")
        hx1, hy1 = np.meshgrid(e2[1:], e2[1:], indexing="ij")
        ref = estimate(hx0.ravel(), hx1.ravel(), hy0.ravel(), hy1.ravel())
        err = float(np.max(np.abs(ref.sum(-1) - fine.sum(-1))))
        return QuadratureReport(_fsum_rows([fine], scalar), err, nodes, fixed_depth)

    panels = tuple(np.array([v], float) for v in (0.0, 1.0, 0.0, 1.0))
    parent = estimate(*panels)
    accepted, err, depth = [], 0.0, 0
    while panels[0].size:
        if depth >= max_depth:
            raise NonConvergence(
                f"2D quadrature did not converge by depth {max_depth}; "
                f"{panels[0].size} panels unresolved near (s, t)=({panels[0][0]!r}, {panels[2][0]!r})"
            )
        children = split(*panels)
        child = estimate(*children)
        csum = child.reshape(child.shape[0], -1, 4).sum(-1)
        ok, diff = _accept_mask(parent, csum, atol, rtol)
        depth += 1
        if depth < min_depth:
            ok[:] = False
        accepted.append(csum[:, ok])
        err += float(diff[ok].sum())
        keep = np.repeat(~ok, 4)
        panels = tuple(c[keep] for c in children)
        parent = child[:, keep]
    return QuadratureReport(_fsum_rows(accepted, scalar), err, nodes, depth)
