"""Integrals over parameter regions, Gauss-Bonnet, Gauss-map area and total curvature.

A :class:`Region` pairs a set of integration cells (rectangles, Duffy-mapped
triangles, polar disks) with the boundary loops that enclose them.  Cells
carry signed Jacobians, so a region and its reverse integrate to opposite
values; the boundary loops are checked against the cells by comparing the
enclosed signed parameter area.

Surface integrals are ``int int F det P du dv`` with ``det P = f^1 ^ f^2
(d/du, d/dv)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .curves import (
    BoundaryCurve,
    curve_state,
    line_integral_A_dalpha,
    line_integral_k,
    scan_transverse,
    segment,
    transversality_margin,
    velocity_at,
    corner_area_ratio,
)
from .errors import BadParams, NonTransverseBoundary, NotClosed, NonTransverse
from .jets import cos, sin
from .quadrature import ATOL, MAX_DEPTH, QuadratureReport, gauss_legendre, integrate_1d, integrate_square
from .surface import (
    FramePacket,
    SurfacePatch,
    SurfaceTangent,
    characteristic_margin,
    curvature_as_minus_dalpha_dA,
    evaluate_frame,
    gauss_map_pushforward_density,
)

CLOSURE_TOL = 1e-12
AREA_CONSISTENCY_TOL = 1e-9
SMOOTH_JOIN_TOL = 1e-12


# -- cells -----------------------------------------------------------------------


@dataclass(frozen=True)
class RectCell:
    u0: float
    u1: float
    v0: float
    v1: float
    sign: int = 1

    def map(self, s, t):
        u = self.u0 + (self.u1 - self.u0) * s
        v = self.v0 + (self.v1 - self.v0) * t
        return u, v, self.sign * (self.u1 - self.u0) * (self.v1 - self.v0) + 0.0 * s

    def flipped(self) -> "RectCell":
        return RectCell(self.u0, self.u1, self.v0, self.v1, -self.sign)

    def contains(self, u, v):
        return (u >= self.u0) & (u <= self.u1) & (v >= self.v0) & (v <= self.v1)

    @property
    def area(self) -> float:
        return self.sign * (self.u1 - self.u0) * (self.v1 - self.v0)


@dataclass(frozen=True)
class TriangleCell:
    """Triangle ``(a, b, c)`` pulled back to the unit square by the Duffy map."""

    a: tuple[float, float]
    b: tuple[float, float]
    c: tuple[float, float]
    sign: int = 1

    def _det(self):
        (ax, ay), (bx, by), (cx, cy) = self.a, self.b, self.c
        return (bx - ax) * (cy - by) - (by - ay) * (cx - bx)

    def map(self, s, t):
        (ax, ay), (bx, by), (cx, cy) = self.a, self.b, self.c
        u = ax + s * (bx - ax) + s * t * (cx - bx)
        v = ay + s * (by - ay) + s * t * (cy - by)
        # the triangle's own orientation is already in the determinant
        return u, v, self.sign * s * abs(self._det())

    def flipped(self) -> "TriangleCell":
        return TriangleCell(self.a, self.b, self.c, -self.sign)

    def contains(self, u, v):
        (ax, ay), (bx, by), (cx, cy) = self.a, self.b, self.c
        d1 = (bx - ax) * (v - ay) - (by - ay) * (u - ax)
        d2 = (cx - bx) * (v - by) - (cy - by) * (u - bx)
        d3 = (ax - cx) * (v - cy) - (ay - cy) * (u - cx)
        neg = (d1 < 0) | (d2 < 0) | (d3 < 0)
        pos = (d1 > 0) | (d2 > 0) | (d3 > 0)
        return ~(neg & pos)

    @property
    def area(self) -> float:
        return self.sign * 0.5 * abs(self._det())


@dataclass(frozen=True)
class DiskCell:
    """Parameter disk in polar coordinates ``(radius * s, 2 pi t)``."""

    center: tuple[float, float]
    radius: float
    sign: int = 1

    def map(self, s, t):
        r = self.radius * s
        th = 2.0 * np.pi * t
        u = self.center[0] + r * np.cos(th)
        v = self.center[1] + r * np.sin(th)
        return u, v, self.sign * 2.0 * np.pi * self.radius * r

    def flipped(self) -> "DiskCell":
        return DiskCell(self.center, self.radius, -self.sign)

    def contains(self, u, v):
        return np.hypot(u - self.center[0], v - self.center[1]) <= self.radius

    @property
    def area(self) -> float:
        return self.sign * np.pi * self.radius**2


Cell = RectCell | TriangleCell | DiskCell


# -- regions ---------------------------------------------------------------------


@dataclass(frozen=True)
class Corner:
    u: float
    v: float
    vin: SurfaceTangent
    vout: SurfaceTangent
    ca: float


@dataclass(frozen=True)
class Region:
    patch: SurfacePatch
    loops: tuple[tuple[BoundaryCurve, ...], ...]
    cells: tuple[Cell, ...]
    name: str = "region"
    check_transverse: bool = True
    transversality: float = field(default=float("nan"), compare=False)

    def __post_init__(self):
        if not self.cells:
            raise BadParams(f"{self.name}: region has no cells")
        area = self.cell_area
        if not abs(area) > 0:
            raise BadParams(f"{self.name}: region has zero area")
        for loop in self.loops:
            _check_closed(self.patch, loop, self.name)
        if self.loops:
            enclosed = boundary_area(self.patch, self.loops)
            if abs(enclosed - area) > AREA_CONSISTENCY_TOL * max(1.0, abs(area)):
                raise BadParams(
                    f"{self.name}: boundary encloses signed area {enclosed!r} "
                    f"but cells cover {area!r}"
                )
        if self.check_transverse and self.loops:
            object.__setattr__(self, "transversality", _boundary_margin(self))

    @property
    def cell_area(self) -> float:
        return math.fsum(c.area for c in self.cells)

    @property
    def orientation(self) -> int:
        """+1 when the boundary runs with the interior on its left in ``(u, v)``."""
        return 1 if self.cell_area > 0 else -1

    @property
    def curves(self) -> list[BoundaryCurve]:
        return [c for loop in self.loops for c in loop]

    def reversed(self) -> "Region":
        loops = tuple(tuple(c.reversed() for c in reversed(loop)) for loop in self.loops)
        return Region(self.patch, loops, tuple(c.flipped() for c in self.cells),
                      self.name + "~", self.check_transverse)

    def with_patch(self, patch: SurfacePatch) -> "Region":
        loops = tuple(tuple(c.on(patch) for c in loop) for loop in self.loops)
        return Region(patch, loops, self.cells, self.name, self.check_transverse)

    def contains(self, u, v):
        u, v = np.asarray(u, float), np.asarray(v, float)
        out = np.zeros(np.broadcast(u, v).shape, dtype=bool)
        for c in self.cells:
            out |= c.contains(u, v)
        return out

    def corners(self) -> list[Corner]:
        out = []
        for loop in self.loops:
            for j, cin in enumerate(loop):
                cout = loop[(j + 1) % len(loop)]
                fp, vin = velocity_at(cin, cin.t1)
                _, vout = velocity_at(cout, cout.t0)
                if _smooth_join(fp, vin, vout):
                    continue
                u, v = cin.end
                out.append(Corner(u, v, vin, vout, float(corner_area_ratio(vin, vout))))
        return out


def _smooth_join(fp, vin, vout) -> bool:
    # same direction in (u, v); corner area is then zero by construction
    a = np.array([vin.c1, vin.c2])
    b = np.array([vout.c1, vout.c2])
    cross = a[0] * b[1] - a[1] * b[0]
    return abs(cross) <= SMOOTH_JOIN_TOL * np.linalg.norm(a) * np.linalg.norm(b) and a @ b > 0


def _wrap_delta(patch, du, dv):
    pu, pv = patch.periods
    if pu:
        du = du - pu * np.round(du / pu)
    if pv:
        dv = dv - pv * np.round(dv / pv)
    return du, dv


def _check_closed(patch, loop, name):
    for j, c in enumerate(loop):
        nxt = loop[(j + 1) % len(loop)]
        (ua, va), (ub, vb) = c.end, nxt.start
        du, dv = _wrap_delta(patch, ub - ua, vb - va)
        scale = max(1.0, abs(ua), abs(va))
        if math.hypot(du, dv) > CLOSURE_TOL * scale:
            raise BadParams(
                f"{name}: boundary does not close between {c.name} and {nxt.name} "
                f"({ua!r}, {va!r}) -> ({ub!r}, {vb!r})"
            )


def _wraps(patch, loop, axis):
    period = patch.periods[axis]
    if not period:
        return False
    total = 0.0
    for c in loop:
        total += (c.end[axis] - c.start[axis])
    return abs(total) > 0.5 * period


def boundary_area(patch: SurfacePatch, loops) -> float:
    """Signed parameter area enclosed by the loops.

    Uses ``int u dv`` unless some loop winds around the ``u`` period, in which
    case ``-int v du`` is used (well defined for bands around a cylinder).
    """
    use_v_form = any(_wraps(patch, loop, 0) for loop in loops)
    if use_v_form and any(_wraps(patch, loop, 1) for loop in loops):
        raise BadParams("boundary winds around both periods; enclosed area is undefined")

    total = []
    for loop in loops:
        for c in loop:
            def f(t, c=c):
                u, v = c.param_jets(t)
                return -v.v * u.dt if use_v_form else u.v * v.dt

            total.append(integrate_1d(f, c.t0, c.t1, atol=1e-13).value)
    return math.fsum(total)


def _sample_nodes(curve: BoundaryCurve, depth: int = 4) -> np.ndarray:
    x, _ = gauss_legendre()
    edges = np.linspace(curve.t0, curve.t1, 2**depth + 1)
    t = (edges[:-1, None] + np.diff(edges)[:, None] * x[None, :]).ravel()
    return np.concatenate([[curve.t0], t, [curve.t1]])


def _boundary_margin(region: Region) -> float:
    margin = np.inf
    for c in region.curves:
        t = _sample_nodes(c)
        try:
            st = curve_state(c, t)
            margin = min(margin, scan_transverse(c))
        except NonTransverse as exc:
            raise NonTransverseBoundary(f"{region.name}: {exc}", where=exc.where) from exc
        margin = min(margin, float(np.min(np.abs(st.f2g.v) / st.speed)))
    return margin


# -- region constructors -------------------------------------------------------------


def rectangle_region(patch: SurfacePatch, u0, u1, v0, v1, name="rectangle", **kw) -> Region:
    """Counter-clockwise rectangle bounded by four straight edges."""
    if not (u1 > u0 and v1 > v0):
        raise BadParams(f"{name}: empty rectangle [{u0}, {u1}] x [{v0}, {v1}]")
    pts = [(u0, v0), (u1, v0), (u1, v1), (u0, v1)]
    loop = tuple(segment(patch, pts[i], pts[(i + 1) % 4], f"{name}.edge{i}") for i in range(4))
    return Region(patch, (loop,), (RectCell(u0, u1, v0, v1),), name, **kw)


def triangle_region(patch: SurfacePatch, a, b, c, name="triangle", **kw) -> Region:
    """Straight-edged triangle ``a -> b -> c``; clockwise order gives the reversed region."""
    return polygon_region(patch, (a, b, c), name, **kw)


def polygon_region(patch: SurfacePatch, vertices, name="polygon", **kw) -> Region:
    """Convex polygon with straight edges, fan-triangulated into Duffy cells.

    Vertices are taken counter-clockwise; a clockwise list gives the reversed region.
    """
    pts = [tuple(map(float, p)) for p in vertices]
    if len(pts) < 3:
        raise BadParams(f"{name}: a polygon needs at least 3 vertices")
    n = len(pts)
    signed = 0.5 * math.fsum(pts[i][0] * pts[(i + 1) % n][1] - pts[(i + 1) % n][0] * pts[i][1] for i in range(n))
    if signed == 0:
        raise BadParams(f"{name}: zero-area polygon")
    sign = 1 if signed > 0 else -1
    cells = tuple(TriangleCell(pts[0], pts[i], pts[i + 1], sign) for i in range(1, n - 1))
    loop = tuple(segment(patch, pts[i], pts[(i + 1) % n], f"{name}.edge{i}") for i in range(n))
    return Region(patch, (loop,), cells, name, **kw)


def disk_region(patch: SurfacePatch, center, radius, name="disk", check_transverse=False) -> Region:
    """Parameter disk; its boundary circle is rarely transverse, so no check by default."""
    if not radius > 0:
        raise BadParams(f"{name}: radius must be positive")
    cu, cv = map(float, center)
    def circle(t):
        th = 2.0 * np.pi * t
        return cu + radius * cos(th), cv + radius * sin(th)

    loop = (BoundaryCurve(patch, circle, 0.0, 1.0, f"{name}.circle"),)
    return Region(patch, (loop,), (DiskCell((cu, cv), float(radius)),), name, check_transverse)


# -- integrals -----------------------------------------------------------------------


def integrate_cells(cells: Sequence[Cell], fn: Callable, *, atol=ATOL, rtol=0.0,
                    max_depth=MAX_DEPTH, fixed_depth=None) -> QuadratureReport:
    """``sum over cells of int fn(u, v) * jac``; ``fn`` gets flat node arrays."""
    report = None
    for cell in cells:
        def g(s, t, cell=cell):
            u, v, jac = cell.map(s, t)
            return np.asarray(fn(u, v)) * jac

        r = integrate_square(g, atol=atol, rtol=rtol, max_depth=max_depth, fixed_depth=fixed_depth)
        report = r if report is None else report.combine(r)
    return report


def surface_integral(region: Region, integrand: Callable[[FramePacket], np.ndarray], **kw) -> QuadratureReport:
    """``int_R integrand dS``; ``integrand`` maps a frame packet to values."""

    def fn(u, v):
        fp = evaluate_frame(region.patch, u, v)
        return np.asarray(integrand(fp)) * fp.det_P

    return integrate_cells(region.cells, fn, **kw)


def area(region: Region, **kw) -> QuadratureReport:
    return surface_integral(region, lambda fp: 1.0 + 0.0 * fp.A, **kw)


def curvature_integral(region: Region, **kw) -> QuadratureReport:
    return surface_integral(region, lambda fp: fp.K, **kw)


@dataclass(frozen=True)
class GaussBonnetReport:
    curve_integral: float
    corner_sum: float
    curvature_integral: float
    residual: float
    error_estimate: float
    nodes: int
    refinement_depth: int
    corners: tuple[Corner, ...]
    transversality: float

    def as_dict(self) -> dict:
        return {
            "curve_integral": self.curve_integral,
            "corner_sum": self.corner_sum,
            "curvature_integral": self.curvature_integral,
            "residual": self.residual,
            "error_estimate": self.error_estimate,
            "nodes": self.nodes,
            "refinement_depth": self.refinement_depth,
            "corners": [{"u": c.u, "v": c.v, "ca": c.ca} for c in self.corners],
            "transversality_margin": self.transversality,
        }


def gauss_bonnet_residual(region: Region, *, atol=ATOL, max_depth=MAX_DEPTH,
                          fixed_depth=None) -> GaussBonnetReport:
    """``int_gamma k + sum ca_j + int_R K`` with its three parts."""
    kw = dict(atol=atol, max_depth=max_depth, fixed_depth=fixed_depth)
    line = None
    for c in region.curves:
        r = line_integral_k(c, **kw)
        line = r if line is None else line.combine(r)
    if line is None:
        line = QuadratureReport(0.0, 0.0, 0, 0)
    corners = region.corners()
    corner_sum = math.fsum(c.ca for c in corners)
    surf = curvature_integral(region, **kw)
    residual = math.fsum([line.value, corner_sum, surf.value])
    return GaussBonnetReport(
        curve_integral=float(line.value),
        corner_sum=corner_sum,
        curvature_integral=float(surf.value),
        residual=residual,
        error_estimate=line.error_estimate + surf.error_estimate,
        nodes=line.nodes_used + surf.nodes_used,
        refinement_depth=max(line.refinement_depth, surf.refinement_depth),
        corners=tuple(corners),
        transversality=region.transversality,
    )


def stokes_line_integral(region: Region, **kw) -> QuadratureReport:
    """``oint_{dR} A d alpha``; equals ``int_R K dS``."""
    out = None
    for c in region.curves:
        r = line_integral_A_dalpha(c, **kw)
        out = r if out is None else out.combine(r)
    return out if out is not None else QuadratureReport(0.0, 0.0, 0, 0)


@dataclass(frozen=True)
class GaussMapArea:
    signed: float
    minus_dalpha_dA: float
    pushforward_signed: float
    direct: float
    sign_constant: bool
    error_estimate: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def gauss_map_area(region: Region, **kw) -> GaussMapArea:
    """Signed and unsigned area of the Gauss-map image of ``region``.

    ``signed`` integrates ``K dS``; ``minus_dalpha_dA`` integrates
    ``-d alpha ^ dA (f1, f2) dS``; ``pushforward_signed`` and ``direct``
    integrate the image area form on the cylinder evaluated on the pushed
    tangents (signed, and in absolute value).
    """
    sgn = region.orientation

    def fn(u, v):
        fp = evaluate_frame(region.patch, u, v)
        dens = gauss_map_pushforward_density(fp)
        return np.stack([
            fp.K * fp.det_P,
            curvature_as_minus_dalpha_dA(fp) * fp.det_P,
            dens,
            sgn * np.abs(dens),  # cell Jacobians are signed; undo it for the unsigned area
        ])

    rep = integrate_cells(region.cells, fn, **kw)
    v = rep.value
    # sign constancy sampled on a coarse tensor grid of every cell
    x, _ = gauss_legendre()
    S, T = np.meshgrid(x, x, indexing="ij")
    signs = []
    for cell in region.cells:
        u, w, _ = cell.map(S.ravel(), T.ravel())
        signs.append(np.sign(evaluate_frame(region.patch, u, w).K))
    signs = np.concatenate(signs)
    constant = bool(np.all(signs == signs[0]) and signs[0] != 0)
    return GaussMapArea(float(v[0]), float(v[1]), float(v[2]), float(v[3]), constant, rep.error_estimate)


# -- limit of area ratios -------------------------------------------------------------


@dataclass(frozen=True)
class LimitEstimate:
    radii: tuple[float, ...]
    ratios: tuple[float, ...]
    K: float
    errors: tuple[float, ...]
    slope: float

    @property
    def monotone(self) -> bool:
        e = self.errors
        return all(b < a for a, b in zip(e, e[1:]))

    def as_dict(self) -> dict:
        return {
            "radii": list(self.radii),
            "ratios": list(self.ratios),
            "K": self.K,
            "errors": list(self.errors),
            "slope": self.slope,
            "monotone": self.monotone,
        }


def curvature_limit_estimate(patch: SurfacePatch, u: float, v: float, radii: Sequence[float]) -> LimitEstimate:
    """Ratios ``int_D K dS / int_D dS`` over parameter disks of decreasing radius."""
    radii = tuple(float(r) for r in radii)
    if any(b >= a for a, b in zip(radii, radii[1:])) or radii[-1] <= 0:
        raise BadParams("radii must be positive and strictly decreasing")
    K0 = float(evaluate_frame(patch, u, v).K)
    ratios = []
    for r in radii:
        if not np.all(patch.contains(u + r * np.array([1, -1, 0, 0]), v + r * np.array([0, 0, 1, -1]))):
            raise BadParams(f"disk of radius {r} around ({u}, {v}) leaves the domain")
        cell = DiskCell((u, v), r)

        def fn(uu, vv):
            fp = evaluate_frame(patch, uu, vv)
            return np.stack([fp.K * fp.det_P, fp.det_P])

        # tolerance relative to the disk area, which shrinks like r^2
        rep = integrate_cells([cell], fn, atol=1e-15 * r * r, rtol=1e-14)
        ratios.append(float(rep.value[0] / rep.value[1]))
    errors = tuple(abs(q - K0) for q in ratios)
    with np.errstate(divide="ignore"):
        le = np.log(np.maximum(errors, np.finfo(float).tiny))
    slope = float(np.polyfit(np.log(radii), le, 1)[0])
    return LimitEstimate(radii, tuple(ratios), K0, errors, slope)


# -- closed surfaces ---------------------------------------------------------------------

EDGES = ("u0", "u1", "v0", "v1")


def patch_edge(patch: SurfacePatch, edge: str) -> BoundaryCurve:
    """Edge of the parameter rectangle, oriented with the interior on the left."""
    u0, u1, v0, v1 = patch.domain
    ends = {
        "v0": ((u0, v0), (u1, v0)),
        "u1": ((u1, v0), (u1, v1)),
        "v1": ((u1, v1), (u0, v1)),
        "u0": ((u0, v1), (u0, v0)),
    }
    a, b = ends[edge]
    return segment(patch, a, b, f"{patch.name}.{edge}")


@dataclass(frozen=True)
class Gluing:
    """Edge ``(i, ei)`` is identified with edge ``(j, ej)`` traversed backwards."""

    i: int
    ei: str
    j: int
    ej: str


@dataclass(frozen=True)
class ClosedSurface:
    patches: tuple[SurfacePatch, ...]
    gluings: tuple[Gluing, ...]
    name: str = "closed"

    def check_closed(self, samples: int = 33, tol: float = 1e-10) -> None:
        seen: dict[tuple[int, str], int] = {}
        for g in self.gluings:
            for key in ((g.i, g.ei), (g.j, g.ej)):
                seen[key] = seen.get(key, 0) + 1
        for k, p in enumerate(self.patches):
            for e in EDGES:
                n = seen.get((k, e), 0)
                if n != 1:
                    raise NotClosed(f"{self.name}: edge {e} of patch {k} ({p.name}) is glued {n} times")
        t = np.linspace(0.0, 1.0, samples)
        for g in self.gluings:
            a = patch_edge(self.patches[g.i], g.ei)
            b = patch_edge(self.patches[g.j], g.ej).reversed()
            pa = self.patches[g.i].point(*a.uv(t))
            pb = self.patches[g.j].point(*b.uv(t))
            gap = max(float(np.max(np.abs(x - y))) for x, y in zip(pa, pb))
            if gap > tol:
                raise NotClosed(
                    f"{self.name}: patch {g.i} edge {g.ei} and patch {g.j} edge {g.ej} "
                    f"do not match (gap {gap:.3e})"
                )

    def margin(self, n: int = 100) -> float:
        out = np.inf
        for p in self.patches:
            u0, u1, v0, v1 = p.domain
            U, V = np.meshgrid(np.linspace(u0, u1, n), np.linspace(v0, v1, n), indexing="ij")
            out = min(out, float(np.min(characteristic_margin(p, U, V))))
        return out


@dataclass(frozen=True)
class TotalCurvatureReport:
    total: float
    error_estimate: float
    per_patch: tuple[float, ...]
    stokes_per_patch: tuple[float, ...]
    stokes_mismatch: float
    nodes: int

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "error_estimate": self.error_estimate,
            "per_patch": list(self.per_patch),
            "stokes_per_patch": list(self.stokes_per_patch),
            "stokes_mismatch": self.stokes_mismatch,
            "nodes": self.nodes,
        }


def total_curvature_closed(surface, **kw) -> TotalCurvatureReport:
    """``int_S K`` over a closed surface given as glued patches."""
    if not isinstance(surface, ClosedSurface):
        raise NotClosed(f"total curvature needs a closed surface, got {type(surface).__name__}")
    surface.check_closed()
    per, stokes, err, nodes = [], [], 0.0, 0
    for p in surface.patches:
        u0, u1, v0, v1 = p.domain
        region = rectangle_region(p, u0, u1, v0, v1, name=p.name, check_transverse=False)
        r = curvature_integral(region, **kw)
        s = stokes_line_integral(region, **kw)
        per.append(float(r.value))
        stokes.append(float(s.value))
        err += r.error_estimate
        nodes += r.nodes_used + s.nodes_used
    mismatch = max(abs(a - b) for a, b in zip(per, stokes))
    return TotalCurvatureReport(math.fsum(per), err, tuple(per), tuple(stokes), mismatch, nodes)


__all__ = [
    "ClosedSurface",
    "Corner",
    "DiskCell",
    "GaussBonnetReport",
    "GaussMapArea",
    "Gluing",
    "LimitEstimate",
    "RectCell",
    "Region",
    "TotalCurvatureReport",
    "TriangleCell",
    "area",
    "boundary_area",
    "curvature_integral",
    "curvature_limit_estimate",
    "disk_region",
    "gauss_bonnet_residual",
    "gauss_map_area",
    "integrate_cells",
    "patch_edge",
    "polygon_region",
    "rectangle_region",
    "stokes_line_integral",
    "surface_integral",
    "total_curvature_closed",
    "transversality_margin",
    "triangle_region",
]
