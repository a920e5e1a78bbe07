"""Command-line front end.

Subcommands: weight, verify, series, continuum, szego-check.
Exit codes: 0 pass, 1 check failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import asymptotics, carmona, checks, continuum
from .params import ParameterModel, PotentialModel, model_from_config, parse_config
from .wkb import CSV_FIELDS, EdgeProfile

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


# ------------------------------------------------------------------ helpers


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in CSV_FIELDS])
    return buf.getvalue()


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.generic):
        return _json_safe(obj.item())
    return obj


def dump_json(payload: dict) -> str:
    return json.dumps(_json_safe(payload), ensure_ascii=False, indent=2) + "\n"


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------ grids


def edge_grid(x_min: float, x_max: float, points: int, log_delta: bool) -> list[float]:
    """x values strictly inside (-2, 2); log spacing is in delta = 2 - x."""
    if points < 1:
        raise ConfigError("points must be positive")
    if not (-2.0 < x_min <= x_max < 2.0):
        raise ConfigError(f"grid [{x_min}, {x_max}] must lie strictly inside (-2, 2)")
    if points == 1:
        return [x_max]
    if log_delta:
        if x_min <= 0:
            raise ConfigError("delta-log spacing needs 0 < x_min")
        d = np.geomspace(2.0 - x_min, 2.0 - x_max, points)
        return [float(2.0 - v) for v in d]
    return [float(v) for v in np.linspace(x_min, x_max, points)]


def _model_from_args(args) -> ParameterModel:
    if args.config:
        try:
            cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(str(exc)) from None
        return model_from_config(cfg)
    if args.model == "power-law-b":
        return ParameterModel.power_law_b(args.C, args.beta)
    if args.model == "log-law-a":
        return ParameterModel.log_law_a(alpha=args.alpha, depth=args.depth or None)
    if args.model == "free":
        return ParameterModel.free()
    raise ConfigError("custom models need --config")


# ------------------------------------------------------------------ weight


def _weight_row(task) -> dict:
    model, x, delta, n, width, with_carmona = task
    try:
        prof = carmona.edge_profile(model, x, delta=delta, n=n, width=width, carmona=with_carmona)
    except Exception as exc:  # row-level errors are recorded, the run continues
        prof = EdgeProfile(model.kind, x, delta if delta is not None else 2.0 - abs(x),
                           math.nan, math.nan, math.nan, None, None, f"{type(exc).__name__}: {exc}")
    return prof.row()


def cmd_weight(args) -> int:
    model = _model_from_args(args)
    if args.deltas:
        deltas = _floats(args.deltas)
        if any(not 0 < d < 2 for d in deltas):
            raise ConfigError("deltas must lie in (0, 2)")
        deltas = sorted(deltas, reverse=True)
        points = [(2.0 - d, d) for d in deltas]
    else:
        points = [(x, None) for x in edge_grid(args.x_min, args.x_max, args.points, not args.linear)]
    tasks = [(model, x, d, args.n, args.width, not args.no_carmona) for x, d in points]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as ex:
            rows = list(ex.map(_weight_row, tasks))
    else:
        rows = [_weight_row(t) for t in tasks]
    if args.format == "csv":
        text = rows_to_csv(rows)
    else:
        text = dump_json({"schema_version": SCHEMA_VERSION, "model": model.to_dict(), "rows": rows})
    _emit(text, args.output)
    bad = any(r["pass"] is False or r["error"] for r in rows)
    return EXIT_FAIL if bad else EXIT_OK


# ------------------------------------------------------------------ verify


def cmd_verify(args) -> int:
    rep = checks.run_verify(seed=args.seed, quick=args.quick,
                            perturb_monotonicity=args.perturb_monotonicity)
    _emit(dump_json(rep.to_dict()), args.output)
    return EXIT_OK if rep.ok else EXIT_FAIL


# ------------------------------------------------------------------ series


def cmd_series(args) -> int:
    if args.L < 0:
        raise ConfigError("L must be nonnegative")
    table = asymptotics.arccosh_coeffs(args.L)
    out = {"schema_version": SCHEMA_VERSION, "coefficients": table.as_strings()}
    if args.L >= 20:
        out["c20_comparison"] = asymptotics.c20_comparison()
    if args.beta is not None:
        series = []
        for d in _floats(args.deltas):
            q = asymptotics.q_series(args.beta, args.C, d)
            series.append(q.to_dict())
        out["q_series"] = series
        if args.residual:
            model = ParameterModel.power_law_b(args.C, args.beta)
            out["residual"] = asymptotics.g_minus_series_residual(model, _floats(args.deltas)).to_dict()
    _emit(dump_json(out), args.output)
    if args.residual and args.beta is not None and not out["residual"]["bounded"]:
        return EXIT_FAIL
    return EXIT_OK


# ------------------------------------------------------------------ continuum


def cmd_continuum(args) -> int:
    pot = PotentialModel.power_law(args.C0, args.beta, args.x0)
    if not math.isfinite(pot.V0):
        raise ConfigError("the continuum profile needs x0 > 0 (finite V(0))")
    if args.energies:
        energies = _floats(args.energies)
    else:
        energies = [float(v) for v in np.geomspace(args.e_min, args.e_max, args.points)]
    if any(not 0 < E < pot.V0 for E in energies):
        raise ConfigError("energies must lie in (0, V(0))")
    rows = [p.row() for p in continuum.continuum_edge_profile(pot, energies, args.x_max)]
    if args.format == "csv":
        text = rows_to_csv(rows)
    else:
        text = dump_json({"schema_version": SCHEMA_VERSION, "potential": pot.to_dict(), "rows": rows})
    _emit(text, args.output)
    bad = any(r["pass"] is False or r["error"] for r in rows)
    return EXIT_FAIL if bad else EXIT_OK


# ------------------------------------------------------------------ szego


def cmd_szego(args) -> int:
    model = _model_from_args(args)
    grid = _floats(args.deltas) if args.deltas else [float(v) for v in np.geomspace(0.1, 1e-6, 11)]
    diag = carmona.szego_diagnostic(model, grid, source=args.source)
    _emit(dump_json({"schema_version": SCHEMA_VERSION, "model": model.to_dict(), **diag.to_dict()}),
          args.output)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _add_model_args(p) -> None:
    p.add_argument("--model", choices=("power-law-b", "log-law-a", "free", "custom"),
                   default="power-law-b")
    p.add_argument("--C", type=float, default=1.0, help="b_n = -C n^-beta")
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=1.0, help="f(x) = (1+x)^-alpha")
    p.add_argument("--depth", type=int, default=0, help="iterated-log depth (0: power family)")
    p.add_argument("--config", help="key=value model file; overrides the model flags")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jacobi-edge", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    w = sub.add_parser("weight", help="edge profile rows: g, h and Carmona estimates")
    _add_model_args(w)
    w.add_argument("--x-min", type=float, default=1.9)
    w.add_argument("--x-max", type=float, default=1.99)
    w.add_argument("--points", type=int, default=3)
    w.add_argument("--linear", action="store_true", help="linear grid in x instead of log in delta")
    w.add_argument("--deltas", help="explicit delta values; overrides the x grid")
    w.add_argument("--n", type=int, default=None, help="Carmona index (default max(10N, 1000))")
    w.add_argument("--width", type=float, default=None, help="bump half-width")
    w.add_argument("--no-carmona", action="store_true")
    w.add_argument("--format", choices=("csv", "json"), default="csv")
    w.add_argument("--output")
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--seed", type=int, default=0)
    w.set_defaults(func=cmd_weight)

    v = sub.add_parser("verify", help="randomized inequality suites")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--quick", action="store_true")
    v.add_argument("--perturb-monotonicity", action="store_true",
                   help="negative control: break monotonicity of b")
    v.add_argument("--output")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("series", help="exact coefficients and the edge series")
    s.add_argument("--L", type=int, default=3)
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--C", type=float, default=1.0)
    s.add_argument("--deltas", default="1e-2 1e-3 1e-4")
    s.add_argument("--residual", action="store_true", help="also tabulate |g - Q| / log(1/delta)")
    s.add_argument("--output")
    s.set_defaults(func=cmd_series)

    c = sub.add_parser("continuum", help="half-line Schrodinger edge profile")
    c.add_argument("--C0", type=float, default=1.0)
    c.add_argument("--beta", type=float, default=1.0)
    c.add_argument("--x0", type=float, default=1.0)
    c.add_argument("--energies")
    c.add_argument("--e-min", type=float, default=0.05)
    c.add_argument("--e-max", type=float, default=0.2)
    c.add_argument("--points", type=int, default=3)
    c.add_argument("--x-max", type=float, default=None, help="Carmona evaluation point")
    c.add_argument("--format", choices=("csv", "json"), default="csv")
    c.add_argument("--output")
    c.set_defaults(func=cmd_continuum)

    z = sub.add_parser("szego-check", help="Szego and quasi-Szego divergence diagnostics")
    _add_model_args(z)
    z.add_argument("--deltas")
    z.add_argument("--source", choices=("auto", "series", "g"), default="auto")
    z.add_argument("--output")
    z.set_defaults(func=cmd_szego)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
