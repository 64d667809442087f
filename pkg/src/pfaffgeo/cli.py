"""Command-line front end: invariant sweeps, the identity suite and curve reports.

Subcommands ``invariants``, ``check``, ``curve`` and ``catalog``.  Options may
also come from a flat ``key = value`` file (``--config``); command-line flags
override file values.  Exit codes: 0 success, 1 identity failure, 2 usage or
configuration error.

Grid syntax, one token per axis separated by commas: ``COUNT`` or
``COUNT@LO:HI``.  A single token applies to every axis.  Without a range the
axis spans the domain box shrunk by 5% at each end.

CSV column orders are fixed:

* invariants: ``point, u_1..u_M, K, Rstar, flat, two_minimal, H_1..H_N,
  h_1..h_N, hstar_1..hstar_N, Rstar_1..Rstar_M, R_1..R_N, flag``
* check: ``check_id, anchor, max_residual, tolerance, pass, points, skipped``
* curve: ``sample, t, s, u_1..u_M, inv_rho_star, inv_rho_star_direct, k,
  kstar, rho_norm, rho_antisymmetry, flag``
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .checks import check_ids, resolve_checks, run_checks
from .curves import (
    CurveOnSurface,
    arc_length,
    dnu_checks,
    great_circle,
    plane_circle,
    plane_line,
    polynomial_curve,
    rho_matrix,
    torus_outer_equator,
    vertical_curvature,
)
from .errors import ConfigError, GeometryError
from .operators import invariants_report
from .surface import CATALOG, SurfacePatch, catalog, sample_points

SCHEMA = "pfaffgeo-report/1"
FORMATS = ("json", "csv")
DEFAULT_FAULT = 1e-2
DEFAULT_SURFACE = "hypersphere"
DEFAULT_PARAMS = {"hypersphere": [3.0], "hyperplane": [3.0], "torus3": [2.0, 0.5], "graph": [3.0], "ellipsoid": [3.0, 1.0, 1.5, 2.0]}

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CURVE_FIXTURES: dict[str, Callable[[SurfacePatch], CurveOnSurface]] = {
    "great-circle": great_circle,
    "outer-equator": torus_outer_equator,
    "circle": plane_circle,
    "line": plane_line,
}


@dataclass
class RunConfig:
    surface: str = DEFAULT_SURFACE
    params: list[float] | None = None
    grid: list[str] = field(default_factory=list)
    tol: list[str] = field(default_factory=list)
    checks: list[str] = field(default_factory=list)
    seed: int = 0
    format: str = "json"
    out: str | None = None
    points: int = 5
    fault_inject: float = 0.0
    curve: str | None = None
    coeffs: str | None = None
    samples: int = 11
    t0: float | None = None
    t1: float | None = None

    def patch(self) -> SurfacePatch:
        params = self.params if self.params is not None else DEFAULT_PARAMS.get(self.surface, [])
        return catalog(self.surface, params)

    def validate(self) -> None:
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.points < 1 or self.samples < 1:
            raise ConfigError("point and sample counts must be at least 1")
        if self.fault_inject < 0:
            raise ConfigError("fault magnitude must be non-negative")

    def tolerances(self) -> dict[str, float]:
        """``--tol 1e-3`` sets every tolerance; ``--tol id=1e-3`` one check."""
        out = {}
        for item in self.tol:
            key, _, val = item.rpartition("=")
            out[key or "*"] = _float(val, "tolerance")
        return out


# -- config parsing -----------------------------------------------------------

REPEATABLE = {"grid", "tol", "checks"}
SCALAR_KEYS = {
    "surface": str,
    "params": None,
    "seed": int,
    "format": str,
    "out": str,
    "points": int,
    "fault_inject": float,
    "curve": str,
    "coeffs": str,
    "samples": int,
    "t0": float,
    "t1": float,
}


def _float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"bad {what} {text!r}") from None


def _split_list(text: str) -> list[str]:
    return [t for t in text.replace(",", " ").split() if t]


def read_config(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, grid/tol/checks repeat."""
    values: dict = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip().replace("-", "_"), val.strip()
        if not sep or not key:
            raise ConfigError(f"config line {n}: expected key = value")
        if key in REPEATABLE:
            items = [val] if key == "grid" else _split_list(val)
            values.setdefault(key, []).extend(items)
        elif key in SCALAR_KEYS:
            values[key] = _convert(key, val)
        else:
            raise ConfigError(f"config line {n}: unknown key {key!r}")
    return values


def _convert(key: str, val: str):
    if key == "params":
        return [_float(v, "parameter") for v in _split_list(val)]
    kind = SCALAR_KEYS[key]
    try:
        return kind(val)
    except ValueError:
        raise ConfigError(f"bad value {val!r} for {key}") from None


def build_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                values.update(read_config(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    for key in list(SCALAR_KEYS) + sorted(REPEATABLE):
        v = getattr(args, key, None)
        if v is None or v == []:
            continue
        if key == "params":
            v = [_float(p, "parameter") for p in _split_list(v)]
        elif key in ("checks", "tol"):
            v = [t for item in v for t in _split_list(item)]
        values[key] = v
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# -- grids --------------------------------------------------------------------

def parse_grid(items: Sequence[str], patch: SurfacePatch, default: int = 5) -> list[np.ndarray]:
    """Tensor grid of parameter points, rows in lexicographic order."""
    M = patch.intrinsic_dim
    tokens = [t for item in items for t in item.split(",") if t.strip()] or [str(default)]
    if len(tokens) == 1:
        tokens = tokens * M
    if len(tokens) != M:
        raise ConfigError(f"grid needs 1 or {M} axis specs, got {len(tokens)}")
    axes = []
    for tok, (lo, hi) in zip(tokens, patch.domain):
        count_s, _, rng = tok.strip().partition("@")
        try:
            count = int(count_s)
        except ValueError:
            raise ConfigError(f"bad grid count {count_s!r}") from None
        if count < 1:
            raise ConfigError("grid counts must be at least 1")
        if rng:
            a_s, sep, b_s = rng.partition(":")
            if not sep:
                raise ConfigError(f"grid range {rng!r} must read LO:HI")
            a, b = _float(a_s, "grid bound"), _float(b_s, "grid bound")
            if not (lo < a <= b < hi):
                raise ConfigError(f"grid range [{a}, {b}] not inside the domain ({lo}, {hi})")
        else:
            pad = 0.05 * (hi - lo)
            a, b = lo + pad, hi - pad
        axes.append(np.linspace(a, b, count) if count > 1 else np.array([0.5 * (a + b)]))
    return [np.array(p) for p in itertools.product(*axes)]


def worker_count() -> int:
    cap = os.environ.get("PFAFFGEO_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"PFAFFGEO_THREADS must be an integer, got {cap!r}") from None
    return n


def _ordered_map(fn, items: list) -> list:
    """Map preserving input order whatever the completion order."""
    workers = worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- commands -----------------------------------------------------------------

def _header(command: str, cfg: RunConfig, patch: SurfacePatch) -> dict:
    return {"schema": SCHEMA, "command": command, "surface": patch.name, "params": list(patch.params), "seed": cfg.seed}


def _invariant_row(patch: SurfacePatch, idx: int, u: np.ndarray) -> dict:
    row = {"point": idx, "u": u.tolist()}
    try:
        row.update(invariants_report(patch, u).as_dict())
        row["flag"] = ""
    except GeometryError as exc:
        row["flag"] = f"degenerate: {exc}"
    return row


def cmd_invariants(cfg: RunConfig) -> tuple[dict, int]:
    patch = cfg.patch()
    points = parse_grid(cfg.grid, patch)
    rows = _ordered_map(lambda a: _invariant_row(patch, *a), list(enumerate(points)))
    report = _header("invariants", cfg, patch)
    report["rows"] = rows
    report["summary"] = {"points": len(rows), "flagged": sum(1 for r in rows if r["flag"])}
    return report, EXIT_OK


def cmd_check(cfg: RunConfig) -> tuple[dict, int]:
    patch = cfg.patch()
    resolve_checks(cfg.checks)  # unknown ids fail before any work
    points = parse_grid(cfg.grid, patch) if cfg.grid else sample_points(patch, cfg.points, np.random.default_rng(cfg.seed))
    rep = run_checks(
        patch,
        points=points,
        checks=cfg.checks or None,
        tolerances=cfg.tolerances(),
        seed=cfg.seed,
        fault=cfg.fault_inject,
        workers=worker_count(),
    )
    report = _header("check", cfg, patch)
    body = rep.as_dict()
    report["fault_inject"] = cfg.fault_inject
    report["rows"] = body["results"]
    report["summary"] = body["summary"]
    return report, EXIT_OK if rep.ok else EXIT_FAIL


def parse_curve(cfg: RunConfig, patch: SurfacePatch) -> CurveOnSurface:
    if cfg.coeffs:
        rows = [[_float(v, "coefficient") for v in _split_list(r)] for r in cfg.coeffs.split(";") if r.strip()]
        t0 = 0.0 if cfg.t0 is None else cfg.t0
        t1 = 1.0 if cfg.t1 is None else cfg.t1
        try:
            return polynomial_curve(patch, rows, t0, t1)
        except GeometryError as exc:
            raise ConfigError(str(exc)) from None
    name = cfg.curve or {"hypersphere": "great-circle", "torus3": "outer-equator", "hyperplane": "line"}.get(patch.name)
    if name not in CURVE_FIXTURES:
        raise ConfigError(f"unknown curve {name!r}; choose from {sorted(CURVE_FIXTURES)} or give coeffs")
    curve = CURVE_FIXTURES[name](patch)
    if cfg.t0 is not None or cfg.t1 is not None:
        curve = CurveOnSurface(patch, curve.param, curve.t0 if cfg.t0 is None else cfg.t0, curve.t1 if cfg.t1 is None else cfg.t1, curve.name)
    return curve


def _curve_row(curve: CurveOnSurface, idx: int, t: float) -> dict:
    row = {"sample": idx, "t": float(t)}
    try:
        row["u"] = curve(t).tolist()
        quad, direct = vertical_curvature(curve, t)
        d = dnu_checks(curve, t)
        rho = rho_matrix(curve, None, t)
        row.update(
            s=arc_length(curve, t),
            inv_rho_star=quad,
            inv_rho_star_direct=direct,
            k=d.k,
            kstar=d.kstar,
            rho_norm=float(np.linalg.norm(rho)),
            rho_antisymmetry=float(np.abs(rho + rho.T).max()),
            flag="",
        )
    except GeometryError as exc:
        row["flag"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_curve(cfg: RunConfig) -> tuple[dict, int]:
    patch = cfg.patch()
    curve = parse_curve(cfg, patch)
    ts = np.linspace(curve.t0, curve.t1, cfg.samples) if cfg.samples > 1 else np.array([curve.t0])
    rows = _ordered_map(lambda a: _curve_row(curve, *a), list(enumerate(ts)))
    report = _header("curve", cfg, patch)
    report["curve"] = {"name": curve.name, "t0": curve.t0, "t1": curve.t1}
    report["rows"] = rows
    report["summary"] = {"samples": len(rows), "flagged": sum(1 for r in rows if r["flag"])}
    return report, EXIT_OK


def cmd_catalog(cfg: RunConfig) -> tuple[dict, int]:
    rows = []
    for name, entry in CATALOG.items():
        p = catalog(name, DEFAULT_PARAMS[name])
        rows.append({"name": name, "params": entry.usage, "example": DEFAULT_PARAMS[name], "domain": [list(d) for d in p.domain], "description": p.description})
    return {"schema": SCHEMA, "command": "catalog", "rows": rows, "curves": sorted(CURVE_FIXTURES), "checks": check_ids()}, EXIT_OK


COMMANDS = {"invariants": cmd_invariants, "check": cmd_check, "curve": cmd_curve, "catalog": cmd_catalog}


# -- output -------------------------------------------------------------------

def _vec(prefix: str, values, n: int) -> dict:
    values = list(values) if values is not None else [None] * n
    return {f"{prefix}_{i + 1}": v for i, v in enumerate(values)}


def _csv_rows(report: dict) -> tuple[list[str], list[dict]]:
    cmd = report["command"]
    if cmd == "check":
        cols = ["check_id", "anchor", "max_residual", "tolerance", "pass", "points", "skipped"]
        return cols, report["rows"]
    if cmd == "catalog":
        return ["name", "params", "description"], report["rows"]
    rows = report["rows"]
    M = max((len(r.get("u", [])) for r in rows), default=0)
    if cmd == "invariants":
        N = M + 1
        cols = ["point"] + [f"u_{i + 1}" for i in range(M)] + ["K", "Rstar", "flat", "two_minimal"]
        for p, n in (("H", N), ("h", N), ("hstar", N), ("Rstar", M), ("R", N)):
            cols += [f"{p}_{i + 1}" for i in range(n)]
        cols.append("flag")
        out = []
        for r in rows:
            flat = {k: r.get(k) for k in ("point", "K", "Rstar", "flat", "two_minimal", "flag")}
            flat.update(_vec("u", r["u"], M))
            for p, key, n in (("H", "H", N), ("h", "h", N), ("hstar", "hstar", N), ("Rstar", "Rstar_j", M), ("R", "R", N)):
                flat.update(_vec(p, r.get(key), n))
            out.append(flat)
        return cols, out
    cols = ["sample", "t", "s"] + [f"u_{i + 1}" for i in range(M)]
    cols += ["inv_rho_star", "inv_rho_star_direct", "k", "kstar", "rho_norm", "rho_antisymmetry", "flag"]
    out = []
    for r in rows:
        flat = {k: v for k, v in r.items() if k != "u"}
        flat.update(_vec("u", r.get("u"), M))
        out.append(flat)
    return cols, out


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, allow_nan=True) + "\n"
    cols, rows = _csv_rows(report)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in cols})
    return buf.getvalue()


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override its values")
    common.add_argument("--surface", help="catalog surface name")
    common.add_argument("--params", help="surface parameters, comma or space separated")
    common.add_argument("--grid", action="append", help="COUNT or COUNT@LO:HI per axis, comma separated")
    common.add_argument("--tol", action="append", help="global tolerance or CHECK=TOL (repeatable)")
    common.add_argument("--seed", type=int, help="seed for sampled points and random weights")
    common.add_argument("--format", choices=FORMATS, help="output format (default json)")
    common.add_argument("--out", help="output file (default stdout)")

    parser = argparse.ArgumentParser(prog="pfaffgeo", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("invariants", parents=[common], help="curvature invariants over a parameter grid")
    p = sub.add_parser("check", parents=[common], help="run the identity suite")
    p.add_argument("--checks", action="append", help="check ids or groups, comma separated (default all)")
    p.add_argument("--points", type=int, help="number of random points when no grid is given")
    p.add_argument("--fault-inject", dest="fault_inject", type=float, nargs="?", const=DEFAULT_FAULT,
                   help=f"corrupt the connection by this amount (default {DEFAULT_FAULT})")
    p = sub.add_parser("curve", parents=[common], help="vertical and ik-curvatures along a curve")
    p.add_argument("--curve", help=f"fixture name: {', '.join(sorted(CURVE_FIXTURES))}")
    p.add_argument("--coeffs", help="polynomial u(t): rows separated by ';', coefficients from t^0 up")
    p.add_argument("--samples", type=int, help="number of t samples")
    p.add_argument("--t0", type=float)
    p.add_argument("--t1", type=float)
    sub.add_parser("catalog", parents=[common], help="list fixture surfaces, curves and checks")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = build_config(args)
        report, code = COMMANDS[args.command](cfg)
        text = render(report, cfg.format)
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return code
    except ConfigError as exc:
        print(f"pfaffgeo: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"pfaffgeo: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
