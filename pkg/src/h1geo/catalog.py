"""Built-in surfaces and regions with hand-derived geometry.

Closed forms (``sigma = +1`` unless the sign is written out):

vertical_plane ``(u, 0, v)``
    ``d/du = e1``, ``d/dv = e0``.  ``f1 = sigma e1``, ``cos alpha = 0``,
    ``sin alpha = -sigma``, ``A = 0``, ``K = 0``; the Gauss map is constant.

vertical_cylinder ``(r cos t, r sin t, s)``
    ``d/dt = r(-sin t e1 + cos t e2) - (r^2/2) e0``, ``d/ds = e0``.  Hence
    ``alpha = t`` (shifted by pi when ``sigma = -1``), ``A = 0``, ``K = 0`` and
    ``det P = sigma r``.  A circle ``s = const`` has ``f^1/f^2 = -2/r``.

graph_xy ``(u, v, uv/2)``
    ``d/du = e1 + v e0`` and ``d/dv = e2`` is horizontal.  ``f1 = -sigma sgn(v) e2``,
    ``cos alpha = -sigma sgn(v)``, ``sin alpha = 0``, ``A = -sigma / |v|`` and
    ``K = 0`` (``alpha`` is locally constant).  The characteristic locus is ``v = 0``.

torus_revolution ``((R + rho cos th) cos ph, (R + rho cos th) sin ph, rho sin th)``
    With ``r = R + rho cos th`` and ``N = sqrt(cos^2 th + r^2 sin^2 th / 4)``:
    ``e0(d/dph) = -r^2/2``, ``e0(d/dth) = rho cos th``, so no point is
    characteristic.  ``A = -sigma sin th / N``,
    ``cos alpha = sigma (cos th cos ph - (r/2) sin th sin ph) / N``,
    ``sin alpha = sigma (cos th sin ph + (r/2) sin th cos ph) / N`` and
    ``K = (cos th N^2 - sin th (N^2)'/2) / (rho r N^4)`` with ``' = d/dth``.

perturbed_torus
    Tube radius ``rho (1 + eps_p sin(k_p ph) cos 2th)``.  ``|e0(d/dph)| >= r^2/2 -
    rho |eps_p| k_p`` keeps the surface free of characteristic points for the
    default parameters.  No closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BadParams, CharacteristicPoint, ConstructionError, UnknownEntry
from .integration import (
    ClosedSurface,
    Gluing,
    RectCell,
    Region,
    disk_region,
    polygon_region,
    rectangle_region,
    triangle_region,
)
from .curves import segment
from .jets import cos, sin
from .surface import CHARACTERISTIC_TOL, SurfacePatch, characteristic_cells, characteristic_margin, evaluate_frame

TWO_PI = 2.0 * math.pi
KNOWN_VALUES_TOL = 1e-10
KNOWN_VALUES_POINTS = 100
MARGIN_SAMPLES = 10_000
WINDING_GRID = 200


def _known_plane(u, v, sigma, p):
    z = 0.0 * u
    return {"cos_alpha": z, "sin_alpha": z - sigma, "A": z, "K": z}


def _known_cylinder(u, v, sigma, p):
    z = 0.0 * v
    return {"cos_alpha": sigma * np.cos(u) + z, "sin_alpha": sigma * np.sin(u) + z, "A": z, "K": z,
            "det_P": sigma * p["r"] + 0.0 * u}


def _known_graph(u, v, sigma, p):
    z = 0.0 * u
    return {"cos_alpha": -sigma * np.sign(v) + z, "sin_alpha": z, "A": -sigma / np.abs(v) + z, "K": z}


def torus_closed_forms(phi, th, sigma, R, rho):
    c, s = np.cos(th), np.sin(th)
    r = R + rho * c
    n2 = c * c + r * r * s * s / 4.0
    n = np.sqrt(n2)
    dn2 = -2.0 * s * c + (-2.0 * rho * r * s**3 + 2.0 * r * r * s * c) / 4.0
    return {
        "cos_alpha": sigma * (c * np.cos(phi) - 0.5 * r * s * np.sin(phi)) / n,
        "sin_alpha": sigma * (c * np.sin(phi) + 0.5 * r * s * np.cos(phi)) / n,
        "A": -sigma * s / n,
        "K": (c * n2 - 0.5 * s * dn2) / (rho * r * n2 * n2),
    }


def _known_torus(u, v, sigma, p):
    return torus_closed_forms(u, v, sigma, p["R"], p["rho"])


# -- evaluators ---------------------------------------------------------------------


def _plane(p):
    return lambda u, v: (u, 0.0 * u, v)


def _cylinder(p):
    r = p["r"]
    return lambda t, s: (r * cos(t), r * sin(t), s + 0.0 * t)


def _graph(p):
    return lambda u, v: (u, v, 0.5 * u * v)


def _torus(p):
    R, rho = p["R"], p["rho"]

    def f(ph, th):
        r = R + rho * cos(th)
        return r * cos(ph), r * sin(ph), rho * sin(th)

    return f


def _perturbed_torus(p):
    R, rho, eps, k = p["R"], p["rho"], p["eps_p"], p["k_p"]

    def f(ph, th):
        tube = rho * (1.0 + eps * sin(k * ph) * cos(2.0 * th))
        r = R + tube * cos(th)
        return r * cos(ph), r * sin(ph), tube * sin(th)

    return f


# -- parameter checks ---------------------------------------------------------------------


def _positive(p, *names):
    for n in names:
        if not (isinstance(p[n], (int, float)) and math.isfinite(p[n]) and p[n] > 0):
            raise BadParams(f"parameter {n} must be a positive number, got {p[n]!r}")


def _check_domain(p):
    d = p.get("domain")
    if d is not None:
        if len(d) != 4 or not (d[1] > d[0] and d[3] > d[2]):
            raise BadParams(f"domain must be [u0, u1, v0, v1] with u1 > u0 and v1 > v0, got {d!r}")


def _check_cylinder(p):
    _positive(p, "r")
    h = p["height"]
    if len(h) != 2 or not h[1] > h[0]:
        raise BadParams(f"height must be [s0, s1] with s1 > s0, got {h!r}")


def _check_torus(p):
    _positive(p, "R", "rho")
    if p["rho"] >= p["R"]:
        raise BadParams(f"torus needs rho < R, got rho={p['rho']!r}, R={p['R']!r}")


def _check_perturbed(p):
    _check_torus(p)
    eps, k = p["eps_p"], p["k_p"]
    if not (isinstance(eps, (int, float)) and abs(eps) < 1):
        raise BadParams(f"eps_p must satisfy |eps_p| < 1, got {eps!r}")
    if not (isinstance(k, int) and not isinstance(k, bool) and k >= 0):
        raise BadParams(f"k_p must be a non-negative integer, got {k!r}")
    if p["rho"] * (1 + abs(eps)) >= p["R"]:
        raise BadParams("perturbed tube radius reaches the axis")


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    defaults: dict
    evaluator: Callable
    domain: Callable[[dict], tuple]
    periods: tuple
    check: Callable[[dict], None]
    known: Callable | None = None
    characteristic_locus: str = "empty"
    closed: bool = False
    regions: tuple[str, ...] = ()
    notes: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "defaults": dict(self.defaults),
            "periods": ["2pi" if p else None for p in self.periods],
            "characteristic_locus": self.characteristic_locus,
            "closed": self.closed,
            "known_values": sorted(self.known(np.zeros(1), np.ones(1), 1, self.defaults)) if self.known else [],
            "regions": list(self.regions),
        }


ENTRIES: dict[str, CatalogEntry] = {
    e.name: e
    for e in (
        CatalogEntry(
            "vertical_plane",
            "the plane y = 0, parametrized by (x, z)",
            {"domain": [-1.0, 1.0, -1.0, 1.0]},
            _plane,
            lambda p: tuple(p["domain"]),
            (None, None),
            _check_domain,
            _known_plane,
            regions=("rectangle", "disk", "triangle", "polygon"),
        ),
        CatalogEntry(
            "vertical_cylinder",
            "x^2 + y^2 = r^2, parametrized by angle and height",
            {"r": 1.0, "height": [0.0, 1.0]},
            _cylinder,
            lambda p: (0.0, TWO_PI, float(p["height"][0]), float(p["height"][1])),
            (TWO_PI, None),
            _check_cylinder,
            _known_cylinder,
            regions=("cylinder_band", "rectangle", "disk", "polygon"),
        ),
        CatalogEntry(
            "graph_xy",
            "the graph z = uv/2",
            {"domain": [-1.0, 1.0, 0.5, 1.5]},
            _graph,
            lambda p: tuple(p["domain"]),
            (None, None),
            _check_domain,
            _known_graph,
            characteristic_locus="v = 0",
            regions=("rectangle", "disk", "triangle", "polygon"),
        ),
        CatalogEntry(
            "torus_revolution",
            "torus of revolution about the z-axis",
            {"R": 2.0, "rho": 0.5},
            _torus,
            lambda p: (0.0, TWO_PI, 0.0, TWO_PI),
            (TWO_PI, TWO_PI),
            _check_torus,
            _known_torus,
            closed=True,
            regions=("torus_quad", "rectangle", "disk", "triangle", "polygon"),
        ),
        CatalogEntry(
            "perturbed_torus",
            "torus with tube radius rho (1 + eps_p sin(k_p phi) cos(2 theta))",
            {"R": 2.0, "rho": 0.5, "eps_p": 0.1, "k_p": 3},
            _perturbed_torus,
            lambda p: (0.0, TWO_PI, 0.0, TWO_PI),
            (TWO_PI, TWO_PI),
            _check_perturbed,
            None,
            closed=True,
            regions=("rectangle", "disk", "triangle", "polygon"),
        ),
    )
}


def entry(name: str) -> CatalogEntry:
    try:
        return ENTRIES[name]
    except KeyError:
        raise UnknownEntry(f"unknown surface {name!r}; known: {', '.join(sorted(ENTRIES))}") from None


def list_entries() -> list[dict]:
    return [ENTRIES[k].summary() for k in sorted(ENTRIES)]


def _merge(e: CatalogEntry, params: dict | None) -> tuple[dict, int]:
    params = dict(params or {})
    sigma = params.pop("sigma", 1)
    unknown = set(params) - set(e.defaults)
    if unknown:
        raise BadParams(f"{e.name}: unknown parameter(s) {', '.join(sorted(unknown))}")
    merged = {**e.defaults, **params}
    if sigma not in (1, -1):
        raise BadParams(f"sigma must be 1 or -1, got {sigma!r}")
    return merged, sigma


def make_surface(name: str, params: dict | None = None, *, validate: bool = True) -> SurfacePatch:
    """Patch for catalog entry ``name``; ``params`` may include ``sigma``."""
    e = entry(name)
    p, sigma = _merge(e, params)
    e.check(p)
    try:
        patch = SurfacePatch(e.evaluator(p), e.domain(p), sigma, name, p, e.periods)
    except ValueError as exc:
        raise BadParams(f"{name}: {exc}") from exc
    if validate:
        validate_entry(e, patch)
    return patch


def validate_entry(e: CatalogEntry, patch: SurfacePatch, seed: int = 0) -> dict:
    """Cross-check closed forms at random points and scan tori for characteristic points."""
    rng = np.random.default_rng(seed)
    u0, u1, v0, v1 = patch.domain
    out = {}
    if e.closed:
        n = int(math.isqrt(MARGIN_SAMPLES))
        U, V = np.meshgrid(np.linspace(u0, u1, n), np.linspace(v0, v1, n), indexing="ij")
        m = characteristic_margin(patch, U, V)
        out["min_margin"] = float(np.min(m))
        if not out["min_margin"] >= CHARACTERISTIC_TOL:
            i = np.unravel_index(np.argmin(m), m.shape)
            raise CharacteristicPoint(
                f"{e.name}: sampled characteristic point near ({U[i]!r}, {V[i]!r})",
                where=(float(U[i]), float(V[i])),
            )
        cells = characteristic_cells(patch, WINDING_GRID, WINDING_GRID)
        out["winding_cells"] = len(cells)
        if cells:
            cu, cv, _ = cells[0]
            raise CharacteristicPoint(
                f"{e.name}: {len(cells)} characteristic point(s), the first near ({cu!r}, {cv!r})",
                where=(cu, cv),
            )
    if e.known is not None:
        u = rng.uniform(u0, u1, KNOWN_VALUES_POINTS)
        v = rng.uniform(v0, v1, KNOWN_VALUES_POINTS)
        if "0" in e.characteristic_locus and v0 < 0 < v1:
            keep = np.abs(v) > 0.05 * (v1 - v0)  # stay clear of the characteristic line
            u, v = u[keep], v[keep]
        fp = evaluate_frame(patch, u, v)
        known = e.known(u, v, patch.sigma, patch.params)
        got = {"cos_alpha": fp.cos_alpha, "sin_alpha": fp.sin_alpha, "A": fp.A, "K": fp.K, "det_P": fp.det_P}
        worst = 0.0
        for key, want in known.items():
            err = float(np.max(np.abs(got[key] - want) / np.maximum(1.0, np.abs(want))))
            worst = max(worst, err)
            if err > KNOWN_VALUES_TOL:
                raise ConstructionError(f"{e.name}: closed form for {key} off by {err:.3e}")
        out["known_values_error"] = worst
    return out


# -- regions --------------------------------------------------------------------------------

TORUS_QUAD = ((0.25, 0.3), (1.0, 0.45), (0.9, 1.1), (0.2, 1.0))


def cylinder_band(patch: SurfacePatch, t0: float | None = None, t1: float | None = None) -> Region:
    """Annulus between two height circles; the circles are the whole boundary."""
    _, _, v0, v1 = patch.domain
    t0 = v0 if t0 is None else float(t0)
    t1 = v1 if t1 is None else float(t1)
    if not t1 > t0:
        raise BadParams(f"cylinder band needs t1 > t0, got [{t0}, {t1}]")
    bottom = segment(patch, (0.0, t0), (TWO_PI, t0), "band.bottom")
    top = segment(patch, (TWO_PI, t1), (0.0, t1), "band.top")
    return Region(patch, ((bottom,), (top,)), (RectCell(0.0, TWO_PI, t0, t1),), "cylinder_band")


REGION_SURFACE = {"cylinder_band": "vertical_cylinder", "torus_quad": "torus_revolution"}


def make_region(name: str, params: dict | None = None, patch: SurfacePatch | None = None) -> Region:
    """Named region; ``params`` may carry ``surface`` and ``surface_params``."""
    params = dict(params or {})
    surface = params.pop("surface", REGION_SURFACE.get(name))
    surface_params = params.pop("surface_params", {})
    if patch is None:
        if surface is None:
            raise BadParams(f"region {name!r} needs a 'surface'")
        patch = make_surface(surface, surface_params)
    try:
        if name == "cylinder_band":
            return cylinder_band(patch, params.pop("t0", None), params.pop("t1", None))
        if name == "torus_quad":
            return polygon_region(patch, params.pop("vertices", TORUS_QUAD), "torus_quad")
        if name == "rectangle":
            u0, u1, v0, v1 = params.pop("bounds")
            return rectangle_region(patch, u0, u1, v0, v1)
        if name == "polygon":
            return polygon_region(patch, params.pop("vertices"))
        if name == "triangle":
            return triangle_region(patch, *params.pop("vertices"))
        if name == "disk":
            return disk_region(patch, params.pop("center"), params.pop("radius"))
    except KeyError as exc:
        raise BadParams(f"region {name!r} is missing parameter {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, BadParams):
            raise
        raise BadParams(f"region {name!r}: {exc}") from exc
    finally:
        if params and name in ("cylinder_band", "torus_quad", "rectangle", "polygon", "triangle", "disk"):
            raise BadParams(f"region {name!r}: unknown parameter(s) {', '.join(sorted(params))}")
    raise UnknownEntry(f"unknown region {name!r}")


def closed_surface(name: str, params: dict | None = None, tiles: tuple[int, int] = (2, 2)) -> ClosedSurface:
    """Closed surface tiled by ``tiles[0] x tiles[1]`` parameter rectangles."""
    patch = make_surface(name, params)
    e = entry(name)
    if not e.closed:
        # still glue what the periods allow; the closedness check then reports the gap
        return ClosedSurface((patch,), _seam_gluings(patch), name)
    nu, nv = tiles
    if nu < 1 or nv < 1:
        raise BadParams("tiles must be positive")
    u0, u1, v0, v1 = patch.domain
    us = np.linspace(u0, u1, nu + 1)
    vs = np.linspace(v0, v1, nv + 1)
    patches, index = [], {}
    for i in range(nu):
        for j in range(nv):
            index[i, j] = len(patches)
            p = patch.restricted((us[i], us[i + 1], vs[j], vs[j + 1]))
            patches.append(SurfacePatch(p.evaluator, p.domain, p.sigma, f"{name}[{i},{j}]", p.params, (None, None)))
    glue = []
    for i in range(nu):
        for j in range(nv):
            glue.append(Gluing(index[i, j], "u1", index[(i + 1) % nu, j], "u0"))
            glue.append(Gluing(index[i, j], "v1", index[i, (j + 1) % nv], "v0"))
    return ClosedSurface(tuple(patches), tuple(glue), name)


def _seam_gluings(patch):
    pu, pv = patch.periods
    g = []
    if pu:
        g.append(Gluing(0, "u1", 0, "u0"))
    if pv:
        g.append(Gluing(0, "v1", 0, "v0"))
    return tuple(g)


__all__ = [
    "ENTRIES",
    "TORUS_QUAD",
    "CatalogEntry",
    "closed_surface",
    "cylinder_band",
    "entry",
    "list_entries",
    "make_region",
    "make_surface",
    "torus_closed_forms",
    "validate_entry",
]
