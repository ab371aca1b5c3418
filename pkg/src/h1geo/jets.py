"""Second-order forward-mode jets and a central-difference oracle.

``Jet2`` carries a value with its first and second partials in two surface
parameters ``(u, v)``; ``CurveJet2`` does the same for one curve parameter
``t``.  Fields may be floats or numpy arrays of a common shape, so a single
jet can represent a whole batch of quadrature nodes.

A jet obtained by differentiating another jet (``Jet2.d_u`` and friends) no
longer knows its second derivatives.  Those fields are set to NaN so that any
accidental use shows up in the result instead of silently returning garbage.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .errors import DivisionByZero, DomainError, EvaluationError, H1GeoError

_NAN = float("nan")


def _nan_like(x):
    return np.full_like(x, np.nan, dtype=float) if isinstance(x, np.ndarray) else _NAN


class _JetBase:
    __slots__ = ()
    __array_ufunc__ = None  # keep ndarray (op) jet from broadcasting over the object
    _fields: tuple[str, ...] = ()

    def _coerce(self, other):
        if isinstance(other, type(self)):
            return other
        if isinstance(other, _JetBase):
            raise TypeError(f"cannot mix {type(self).__name__} and {type(other).__name__}")
        return type(self).constant(other)

    @classmethod
    def constant(cls, value):
        zero = 0.0 * np.asarray(value, dtype=float) if isinstance(value, np.ndarray) else 0.0
        return cls(value, *([zero] * (len(cls._fields) - 1)))

    def fields(self):
        return tuple(getattr(self, f) for f in self._fields)

    def _map(self, fn):
        return type(self)(*(fn(x) for x in self.fields()))

    def __add__(self, other):
        other = self._coerce(other)
        return type(self)(*(a + b for a, b in zip(self.fields(), other.fields())))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return type(self)(*(a - b for a, b in zip(self.fields(), other.fields())))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return self._map(lambda x: -x)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, _JetBase):
            return self._map(lambda x: x * other)
        return self._mul(self._coerce(other))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if not isinstance(other, _JetBase):
            if np.any(np.asarray(other) == 0):
                raise DivisionByZero("jet divided by zero")
            return self._map(lambda x: x / other)
        return self * reciprocal(self._coerce(other))

    def __rtruediv__(self, other):
        return self._coerce(other) * reciprocal(self)

    def __pow__(self, n):
        if n == 2:
            return self * self
        if not isinstance(n, int) or n < 0:
            raise DomainError("only non-negative integer powers are supported")
        out = type(self).constant(1.0 + 0.0 * np.asarray(self.v))
        for _ in range(n):
            out = out * self
        return out

    def __getitem__(self, idx):
        return type(self)(*(np.asarray(x)[idx] for x in self.fields()))

    def __repr__(self):
        body = ", ".join(f"{f}={getattr(self, f)!r}" for f in self._fields)
        return f"{type(self).__name__}({body})"


class Jet2(_JetBase):
    """Value with partials ``du, dv, duu, duv, dvv``; the mixed partial is stored once."""

    __slots__ = ("v", "du", "dv", "duu", "duv", "dvv")
    _fields = ("v", "du", "dv", "duu", "duv", "dvv")

    def __init__(self, v, du=0.0, dv=0.0, duu=0.0, duv=0.0, dvv=0.0):
        self.v, self.du, self.dv = v, du, dv
        self.duu, self.duv, self.dvv = duu, duv, dvv

    @classmethod
    def variable_u(cls, u):
        u = np.asarray(u, dtype=float)
        z = np.zeros_like(u)
        return cls(u, z + 1.0, z, z, z, z)

    @classmethod
    def variable_v(cls, v):
        v = np.asarray(v, dtype=float)
        z = np.zeros_like(v)
        return cls(v, z, z + 1.0, z, z, z)

    @classmethod
    def first_order(cls, v, du, dv):
        """Jet whose second partials are unknown."""
        return cls(v, du, dv, _nan_like(v), _nan_like(v), _nan_like(v))

    def _mul(self, b: "Jet2") -> "Jet2":
        a = self
        return Jet2(
            a.v * b.v,
            a.du * b.v + a.v * b.du,
            a.dv * b.v + a.v * b.dv,
            a.duu * b.v + 2.0 * a.du * b.du + a.v * b.duu,
            a.duv * b.v + a.du * b.dv + a.dv * b.du + a.v * b.duv,
            a.dvv * b.v + 2.0 * a.dv * b.dv + a.v * b.dvv,
        )

    def chain(self, f0, f1, f2) -> "Jet2":
        """Compose with a scalar function given its value and first two derivatives at ``self.v``."""
        return Jet2(
            f0,
            f1 * self.du,
            f1 * self.dv,
            f1 * self.duu + f2 * self.du * self.du,
            f1 * self.duv + f2 * self.du * self.dv,
            f1 * self.dvv + f2 * self.dv * self.dv,
        )

    def d_u(self) -> "Jet2":
        return Jet2.first_order(self.du, self.duu, self.duv)

    def d_v(self) -> "Jet2":
        return Jet2.first_order(self.dv, self.duv, self.dvv)

    def gradient(self):
        return np.stack([np.asarray(self.du), np.asarray(self.dv)], axis=-1)

    def compose(self, u: "CurveJet2", v: "CurveJet2") -> "CurveJet2":
        """Restrict to a curve ``t -> (u(t), v(t))`` by the chain rule."""
        up, vp = u.dt, v.dt
        dtt = (
            self.duu * up * up
            + 2.0 * self.duv * up * vp
            + self.dvv * vp * vp
            + self.du * u.dtt
            + self.dv * v.dtt
        )
        return CurveJet2(self.v, self.du * up + self.dv * vp, dtt)

    def taylor2(self, h, k):
        return (
            self.v
            + self.du * h
            + self.dv * k
            + 0.5 * (self.duu * h * h + 2.0 * self.duv * h * k + self.dvv * k * k)
        )


class CurveJet2(_JetBase):
    """Value with first and second derivatives in one parameter ``t``."""

    __slots__ = ("v", "dt", "dtt")
    _fields = ("v", "dt", "dtt")

    def __init__(self, v, dt=0.0, dtt=0.0):
        self.v, self.dt, self.dtt = v, dt, dtt

    @classmethod
    def variable(cls, t):
        t = np.asarray(t, dtype=float)
        z = np.zeros_like(t)
        return cls(t, z + 1.0, z)

    def _mul(self, b: "CurveJet2") -> "CurveJet2":
        a = self
        return CurveJet2(
            a.v * b.v,
            a.dt * b.v + a.v * b.dt,
            a.dtt * b.v + 2.0 * a.dt * b.dt + a.v * b.dtt,
        )

    def chain(self, f0, f1, f2) -> "CurveJet2":
        return CurveJet2(f0, f1 * self.dt, f1 * self.dtt + f2 * self.dt * self.dt)

    def d_t(self) -> "CurveJet2":
        return CurveJet2(self.dt, self.dtt, _nan_like(self.v))


# -- elementary functions ------------------------------------------------------


def reciprocal(a):
    if np.any(np.asarray(a.v) == 0):
        raise DivisionByZero("jet divided by a jet with zero value")
    r = 1.0 / a.v
    return a.chain(r, -r * r, 2.0 * r * r * r)


def sin(a):
    s, c = np.sin(a.v), np.cos(a.v)
    return a.chain(s, c, -s)


def cos(a):
    s, c = np.sin(a.v), np.cos(a.v)
    return a.chain(c, -s, -c)


def sqrt(a):
    if np.any(np.asarray(a.v) <= 0):
        raise DomainError("sqrt of a jet needs a positive value")
    r = np.sqrt(a.v)
    return a.chain(r, 0.5 / r, -0.25 / (r * a.v))


def atan2(s, c):
    """Angle jet of the pair ``(c, s) ~ (cos, sin)``.

    The value comes from ``arctan2``; derivatives come from
    ``(c ds - s dc) / (c^2 + s^2)`` so they are continuous across the branch cut.
    """
    if type(s) is not type(c):
        raise TypeError("atan2 needs two jets of the same kind")
    r2 = c * c + s * s
    if np.any(np.asarray(r2.v) == 0):
        raise DomainError("atan2 of the zero pair")
    value = np.arctan2(s.v, c.v)
    if isinstance(s, Jet2):
        # numerators are first-order jets: their partials are exact, second ones NaN
        num_u = c * s.d_u() - s * c.d_u()
        num_v = c * s.d_v() - s * c.d_v()
        r4 = r2.v * r2.v
        return Jet2(
            value,
            num_u.v / r2.v,
            num_v.v / r2.v,
            (num_u.du * r2.v - num_u.v * r2.du) / r4,
            (num_u.dv * r2.v - num_u.v * r2.dv) / r4,
            (num_v.dv * r2.v - num_v.v * r2.dv) / r4,
        )
    num = c.v * s.dt - s.v * c.dt
    g = num / r2.v
    dnum = c.v * s.dtt - s.v * c.dtt  # c' s' - s' c' cancels
    gg = (dnum * r2.v - num * r2.dt) / r2.v**2
    return CurveJet2(value, g, gg)


_UNARY = {"sin": sin, "cos": cos, "sqrt": sqrt}


def jet_arith(a, b, op: str):
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown jet operation {op!r}")


def jet_elementary(a, f: str, b=None):
    """Apply ``sin``, ``cos``, ``sqrt`` to ``a``, or ``atan2`` to the pair ``(a, b) = (sin, cos)``."""
    if f == "atan2":
        return atan2(a, b)
    try:
        return _UNARY[f](a)
    except KeyError:
        raise ValueError(f"unknown elementary function {f!r}") from None


# -- finite-difference oracle --------------------------------------------------


class FDPartials(NamedTuple):
    du: np.ndarray
    dv: np.ndarray
    duu: np.ndarray
    duv: np.ndarray
    dvv: np.ndarray
    h: float
    stencil: np.ndarray  # stencil[i, j] = f(u + (i-1) h, v + (j-1) h)


def default_step(u: float, v: float) -> float:
    return 1e-4 * max(1.0, abs(u), abs(v))


def fd_partials(f: Callable, at: tuple[float, float], h: float | None = None) -> FDPartials:
    """Central-difference partials of ``f(u, v)`` on the 9-point stencil around ``at``.

    ``f`` may return a scalar or an array; all partials are O(h^2) accurate.
    """
    u, v = float(at[0]), float(at[1])
    if h is None:
        h = default_step(u, v)
    if not h > 0:
        raise DomainError("finite-difference step must be positive")
    rows = []
    for i in (-1, 0, 1):
        row = []
        for j in (-1, 0, 1):
            try:
                row.append(np.asarray(f(u + i * h, v + j * h), dtype=float))
            except H1GeoError:
                raise
            except Exception as exc:
                raise EvaluationError(f"evaluation failed at ({u + i * h}, {v + j * h}): {exc}") from exc
        rows.append(row)
    S = np.array(rows)
    du = (S[2, 1] - S[0, 1]) / (2 * h)
    dv = (S[1, 2] - S[1, 0]) / (2 * h)
    duu = (S[2, 1] - 2 * S[1, 1] + S[0, 1]) / (h * h)
    dvv = (S[1, 2] - 2 * S[1, 1] + S[1, 0]) / (h * h)
    duv = (S[2, 2] - S[2, 0] - S[0, 2] + S[0, 0]) / (4 * h * h)
    return FDPartials(du, dv, duu, duv, dvv, h, S)
