"""Algebra of the first Heisenberg group in exponential coordinates.

Points are ``(x, y, z)`` with ``(x, y, z) = exp(x e1 + y e2 + z e0)``.  Tangent
data lives in the left-invariant frame ``(e0, e1, e2)``; covectors in the dual
coframe ``(e^0, e^1, e^2)``.  Every function broadcasts over numpy arrays in the
tuple fields, so the same code serves single points and batches.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NonHorizontal

HORIZONTAL_TOL = 1e-9


class Point(NamedTuple):
    x: float
    y: float
    z: float


class FrameVector(NamedTuple):
    """Tangent vector ``a0 e0 + a1 e1 + a2 e2``."""

    a0: float
    a1: float
    a2: float


class FrameCovector(NamedTuple):
    """Covector ``c0 e^0 + c1 e^1 + c2 e^2``."""

    c0: float
    c1: float
    c2: float


IDENTITY = Point(0.0, 0.0, 0.0)
E0 = FrameVector(1.0, 0.0, 0.0)
E1 = FrameVector(0.0, 1.0, 0.0)
E2 = FrameVector(0.0, 0.0, 1.0)


def group_mul(p: Point, q: Point) -> Point:
    return Point(
        p.x + q.x,
        p.y + q.y,
        p.z + q.z + 0.5 * (p.x * q.y - q.x * p.y),
    )


def group_inv(p: Point) -> Point:
    return Point(-p.x, -p.y, -p.z)


def left_translate(p: Point, q: Point) -> Point:
    return group_mul(p, q)


def lie_bracket(X: Point, Y: Point) -> Point:
    """Bracket of two Lie algebra elements given by their ``(e1, e2, e0)`` coefficients.

    Only ``[e1, e2] = e0`` is nonzero.
    """
    zero = 0.0 * X.x
    return Point(zero, zero, X.x * Y.y - X.y * Y.x)


def bch(X: Point, Y: Point) -> Point:
    """``log(exp X exp Y) = X + Y + [X, Y]/2`` (the series stops at order two)."""
    br = lie_bracket(X, Y)
    return Point(X.x + Y.x + 0.5 * br.x, X.y + Y.y + 0.5 * br.y, X.z + Y.z + 0.5 * br.z)


def frame_to_coordinate(v: FrameVector, at: Point) -> tuple:
    """Components of ``v`` on ``(d/dx, d/dy, d/dz)`` at the point ``at``."""
    return (v.a1, v.a2, v.a0 - 0.5 * at.y * v.a1 + 0.5 * at.x * v.a2)


def coordinate_to_frame(w, at: Point) -> FrameVector:
    wx, wy, wz = w
    return FrameVector(wz + 0.5 * (at.y * wx - at.x * wy), wx, wy)


def coframe_at(at: Point) -> tuple[tuple, tuple, tuple]:
    """Rows ``e^0, e^1, e^2`` written on ``(dx, dy, dz)``."""
    one = 1.0 + 0.0 * at.x
    zero = 0.0 * at.x
    return (
        (0.5 * at.y, -0.5 * at.x, one),
        (one, zero, zero),
        (zero, one, zero),
    )


def pair(c: FrameCovector, v: FrameVector):
    return c.c0 * v.a0 + c.c1 * v.a1 + c.c2 * v.a2


def contact_form(v: FrameVector):
    """``e^0(v)``; zero exactly on the horizontal distribution."""
    return v.a0


def is_horizontal(v: FrameVector, tol: float = HORIZONTAL_TOL):
    scale = np.maximum(1.0, np.maximum(np.abs(v.a1), np.abs(v.a2)))
    return np.abs(v.a0) <= tol * scale


def scalar_product(v: FrameVector, w: FrameVector):
    """Sub-Riemannian scalar product; only horizontal parts contribute."""
    return v.a1 * w.a1 + v.a2 * w.a2


def j_rotate(v: FrameVector) -> FrameVector:
    """``J(a e1 + b e2) = -b e1 + a e2``."""
    if not np.all(is_horizontal(v)):
        raise NonHorizontal(f"J is defined on the horizontal distribution only (a0={v.a0!r})")
    return FrameVector(0.0 * v.a0, -v.a2, v.a1)


def volume_form(u: FrameVector, v: FrameVector, w: FrameVector):
    """``dV = e^0 ^ e^1 ^ e^2`` evaluated on three frame vectors."""
    return (
        u.a0 * (v.a1 * w.a2 - v.a2 * w.a1)
        - u.a1 * (v.a0 * w.a2 - v.a2 * w.a0)
        + u.a2 * (v.a0 * w.a1 - v.a1 * w.a0)
    )
