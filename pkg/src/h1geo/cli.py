"""``h1geo <command> --config <path> [--out <path>]``

Exit codes: 0 pass, 1 tolerance failure, 2 bad config, 3 construction error,
4 geometric precondition violated (characteristic point, non-transverse curve).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import ENTRIES, closed_surface, entry, list_entries, make_region, make_surface, validate_entry
from .checks import DEFAULT_TOLERANCES, grid, residual_table
from .errors import ConstructionError, GeometricPreconditionError, NonConvergence
from .integration import curvature_limit_estimate, gauss_bonnet_residual, gauss_map_area, total_curvature_closed
from .surface import CHARACTERISTIC_TOL, characteristic_margin, evaluate_frame

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_CONSTRUCTION, EXIT_GEOMETRY = range(5)

FRAME_COLUMNS = ("u", "v", "x", "y", "z", "cos_alpha", "sin_alpha", "A", "K", "margin", "flag")


class ConfigError(Exception):
    pass


# -- config ---------------------------------------------------------------------


def _reject_constant(name):
    raise ConfigError(f"non-decimal numeric literal {name} is not allowed")


def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        cfg = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _field(cfg, key, kind, default=..., where="config"):
    if key not in cfg:
        if default is ...:
            raise ConfigError(f"{where}.{key}: missing required field")
        return default
    val = cfg[key]
    ok = {
        "number": isinstance(val, (int, float)) and not isinstance(val, bool),
        "int": isinstance(val, int) and not isinstance(val, bool),
        "str": isinstance(val, str),
        "dict": isinstance(val, dict),
        "list": isinstance(val, list),
    }[kind]
    if not ok:
        raise ConfigError(f"{where}.{key}: expected {kind}, got {type(val).__name__}")
    return val


def _positive(cfg, key, default, where="config"):
    val = _field(cfg, key, "number", default, where)
    if not val > 0:
        raise ConfigError(f"{where}.{key}: must be > 0, got {val!r}")
    return float(val)


def _surface_spec(cfg):
    s = _field(cfg, "surface", "dict")
    name = _field(s, "name", "str", where="config.surface")
    params = _field(s, "params", "dict", {}, where="config.surface")
    return name, params


def _surface(cfg):
    return make_surface(*_surface_spec(cfg))


def _grid(cfg):
    g = _field(cfg, "grid", "dict")
    dims = []
    for key in ("nu", "nv"):
        n = _field(g, key, "int", where="config.grid")
        if n < 2:
            raise ConfigError(f"config.grid.{key}: must be >= 2, got {n}")
        dims.append(n)
    return tuple(dims)


def _region(cfg):
    r = _field(cfg, "region", "dict")
    name = _field(r, "name", "str", where="config.region")
    params = dict(_field(r, "params", "dict", {}, where="config.region"))
    if "surface" in cfg:
        sname, sparams = _surface_spec(cfg)
        params.setdefault("surface", sname)
        params.setdefault("surface_params", sparams)
    return make_region(name, params)


def _depth(cfg):
    d = _field(cfg, "max_depth", "int", 12)
    if not 1 <= d <= 16:
        raise ConfigError(f"config.max_depth: must lie in [1, 16], got {d}")
    return d


# -- output -----------------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dump_json(obj) -> str:
    """Canonical JSON: sorted keys, two-space indent, shortest round-trip floats."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def dump_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


# -- commands ---------------------------------------------------------------------


def cmd_frame(cfg):
    patch = _surface(cfg)
    nu, nv = _grid(cfg)
    u, v = grid(patch, nu, nv)
    margin = characteristic_margin(patch, u, v)
    good = margin >= CHARACTERISTIC_TOL
    pts = patch.point(u, v)
    cols = {k: np.full(u.size, np.nan) for k in ("cos_alpha", "sin_alpha", "A", "K")}
    if np.any(good):
        fp = evaluate_frame(patch, u[good], v[good])
        for k in cols:
            cols[k][good] = getattr(fp, k)
    rows = []
    for i in range(u.size):
        flag = "" if good[i] else "characteristic"
        rows.append((u[i], v[i], pts.x[i], pts.y[i], pts.z[i], cols["cos_alpha"][i], cols["sin_alpha"][i],
                     cols["A"][i], cols["K"][i], margin[i], flag))
    return EXIT_PASS, dump_csv(FRAME_COLUMNS, rows)


def cmd_gauss_bonnet(cfg):
    tol = _positive(cfg, "tolerance", 1e-6)
    region = _region(cfg)
    rep = gauss_bonnet_residual(region, max_depth=_depth(cfg))
    out = rep.as_dict()
    out.update(region=region.name, tolerance=tol, passed=abs(rep.residual) <= tol)
    return (EXIT_PASS if out["passed"] else EXIT_FAIL), dump_json(out)


def cmd_gauss_map(cfg):
    tol_same = _positive(cfg, "tolerance_signed", 1e-8)
    tol = _positive(cfg, "tolerance", 1e-6)
    region = _region(cfg)
    ga = gauss_map_area(region, max_depth=_depth(cfg))
    same = abs(ga.signed - ga.minus_dalpha_dA) <= tol_same
    direct = abs(abs(ga.signed) - ga.direct) <= tol if ga.sign_constant else None
    out = ga.as_dict()
    out.update(region=region.name, signed_matches_form=same, signed_matches_direct=direct,
               passed=same and direct is not False)
    return (EXIT_PASS if out["passed"] else EXIT_FAIL), dump_json(out)


def cmd_limit_check(cfg):
    patch = _surface(cfg)
    radii = _field(cfg, "radii", "list", [1e-1, 3e-2, 1e-2, 3e-3, 1e-3])
    if not radii or not all(isinstance(r, (int, float)) and not isinstance(r, bool) for r in radii):
        raise ConfigError("config.radii: expected a non-empty list of numbers")
    points = _field(cfg, "points", "list")
    min_slope = _field(cfg, "min_slope", "number", 0.9)
    rel = _positive(cfg, "tolerance", 1e-3)
    results, passed = [], True
    for i, p in enumerate(points):
        if not (isinstance(p, list) and len(p) == 2 and all(isinstance(x, (int, float)) for x in p)):
            raise ConfigError(f"config.points[{i}]: expected [u, v]")
        est = curvature_limit_estimate(patch, float(p[0]), float(p[1]), radii)
        d = est.as_dict()
        d["point"] = p
        exact = max(est.errors) <= 1e-12
        ok = exact or (est.monotone and est.slope >= min_slope and est.errors[-1] <= rel * max(1.0, abs(est.K)))
        d["passed"] = ok
        passed &= ok
        results.append(d)
    return (EXIT_PASS if passed else EXIT_FAIL), dump_json({"points": results, "passed": passed})


def cmd_structure_check(cfg):
    patch = _surface(cfg)
    nu, nv = _grid(cfg)
    tols = dict(DEFAULT_TOLERANCES)
    user = _field(cfg, "tolerances", "dict", {})
    for k, val in user.items():
        if k not in tols:
            raise ConfigError(f"config.tolerances.{k}: unknown residual")
        tols[k] = _positive(user, k, None, "config.tolerances")
    if "tolerance" in cfg:
        t = _positive(cfg, "tolerance", None)
        tols = {k: max(t, v) if k in ("jet_vs_fd", "K_vs_fd") else t for k, v in tols.items()}
    u, v = grid(patch, nu, nv)
    table = residual_table(patch, u, v)
    passed = all(table[k]["max"] <= tols[k] for k in table)
    return (EXIT_PASS if passed else EXIT_FAIL), dump_json({
        "surface": patch.name, "nodes": int(u.size), "residuals": table, "tolerances": tols, "passed": passed,
    })


def cmd_total_curvature(cfg):
    name, params = _surface_spec(cfg)
    tiles = _field(cfg, "tiles", "list", [2, 2])
    if len(tiles) != 2 or not all(isinstance(t, int) and t >= 1 for t in tiles):
        raise ConfigError("config.tiles: expected [nu, nv] of positive integers")
    tol = _positive(cfg, "tolerance", 1e-7)
    tol_stokes = _positive(cfg, "tolerance_stokes", 1e-8)
    surf = closed_surface(name, params, tuple(tiles))
    rep = total_curvature_closed(surf, max_depth=_depth(cfg))
    out = rep.as_dict()
    out.update(surface=name, tiles=tiles, min_margin=surf.margin(),
               passed=abs(rep.total) <= tol and rep.stokes_mismatch <= tol_stokes)
    return (EXIT_PASS if out["passed"] else EXIT_FAIL), dump_json(out)


def cmd_catalog(cfg):
    if cfg is None or "surface" not in cfg:
        return EXIT_PASS, dump_json({"entries": list_entries()})
    name, params = _surface_spec(cfg)
    patch = make_surface(name, params, validate=False)
    report = validate_entry(entry(name), patch)
    return EXIT_PASS, dump_json({"entry": ENTRIES[name].summary(), "validation": report})


COMMANDS = {
    "frame": cmd_frame,
    "gauss-bonnet": cmd_gauss_bonnet,
    "gauss-map": cmd_gauss_map,
    "limit-check": cmd_limit_check,
    "structure-check": cmd_structure_check,
    "total-curvature": cmd_total_curvature,
    "catalog": cmd_catalog,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="h1geo", description="Surface geometry checks in the Heisenberg group.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON run configuration (optional for 'catalog')")
    ap.add_argument("--out", help="write the report here instead of stdout")
    return ap


def run(command: str, cfg) -> tuple[int, str | None, str | None]:
    """Run one command on a parsed config; returns ``(exit_code, report, diagnostic)``."""
    try:
        code, report = COMMANDS[command](cfg)
    except ConfigError as exc:
        return EXIT_CONFIG, None, f"config error: {exc}"
    except ConstructionError as exc:
        return EXIT_CONSTRUCTION, None, f"construction error: {exc}"
    except GeometricPreconditionError as exc:
        where = f" at {exc.where!r}" if exc.where is not None else ""
        return EXIT_GEOMETRY, None, f"geometric precondition violated ({type(exc).__name__}){where}: {exc}"
    except NonConvergence as exc:
        return EXIT_FAIL, None, f"quadrature did not converge: {exc}"
    return code, report, ("tolerance check failed" if code == EXIT_FAIL else None)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else None
        if cfg is None and args.command != "catalog":
            raise ConfigError("--config is required for this command")
    except ConfigError as exc:
        print(f"h1geo: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, report, message = run(args.command, cfg)
    if report is not None:
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(report)
        else:
            sys.stdout.write(report)
    if message:
        print(f"h1geo: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
