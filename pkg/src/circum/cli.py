"""Command-line front end.

Subcommands: julia, circlefit, exceptional, poincare, criterion, order,
render.  Every run writes its outputs plus a manifest with content hashes,
and identical invocations produce byte-identical files (see serialize).

Map specifications (the --map argument):

    spec     = "poly:" coeffs | "rat:" coeffs "|" coeffs | "@" path
    coeffs   = coeff { "," coeff }          (descending powers)
    coeff    = complex literal: "2", "-1.5", "3i", "1+2i", "1.2e-3-4i"
    path     = JSON file with {"num": [[re,im],...], "den": [[re,im],...]}
               (ascending powers, the library's JSON convention)

Function specifications (the order command) additionally allow

    "expsum:" coeff "@" freq { ";" coeff "@" freq }
    "exceptional:" c1 "," b1 "," c2 "," b2

The environment variable CIRCUM_THREADS caps internal parallelism; all
current computations are single-threaded, so any cap >= 1 is honored.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .algebra import Polynomial, RationalMap, is_inf
from .dynamics import (
    JuliaSampleConfig,
    NoRepellingFixedPointError,
    chebyshev_conjugacy_check,
    escape_render,
    interval_criterion,
    julia_sample,
    koenigs_chart,
    koenigs_coordinate,
    line_invariance_check,
    poincare_eval,
)
from .expsum import ExceptionalParams, ExpSum, circle_case_classifier
from .growth import order_estimate
from .serialize import (
    atomic_write_text,
    complex_pair,
    expsum_to_dict,
    fit_report_to_dict,
    format_float,
    growth_profile_to_dict,
    interval_report_to_dict,
    json_dumps,
    koenigs_chart_to_dict,
    rational_map_from_dict,
    read_point_cloud_csv,
    run_manifest,
    write_pgm,
    write_point_cloud_csv,
    zero_report_to_dict,
)
from .sphere import is_contained_in_circline

EXIT_OK = 0
EXIT_NOT_CONTAINED = 1
EXIT_BAD_INPUT = 2
EXIT_NO_REPELLING = 3


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fail(code: int, message: str) -> "_CliError":
    return _CliError(code, message)


def _parse_complex(text: str) -> complex:
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty complex literal")
    try:
        return complex(s.replace("i", "j"))
    except ValueError as exc:
        raise ValueError(f"bad complex literal {text!r}") from exc


def _parse_coeffs(text: str) -> Polynomial:
    if not text.strip():
        raise ValueError("empty coefficient list")
    # empty tokens are typos, not zeros; reject rather than guess
    descending = [_parse_complex(p) for p in text.split(",")]
    return Polynomial(list(reversed(descending)))


def parse_map_spec(spec: str) -> RationalMap:
    """poly:/rat:/@ map specification to a RationalMap (see module docstring)."""
    spec = spec.strip()
    if spec.startswith("poly:"):
        return RationalMap(_parse_coeffs(spec[5:]), Polynomial([1.0]))
    if spec.startswith("rat:"):
        body = spec[4:]
        if body.count("|") != 1:
            raise ValueError("rat: spec needs exactly one | between num and den")
        num_s, den_s = body.split("|")
        return RationalMap(_parse_coeffs(num_s), _parse_coeffs(den_s))
    if spec.startswith("@"):
        with open(spec[1:], "r", encoding="utf-8") as fh:
            return rational_map_from_dict(json.load(fh))
    raise ValueError(f"unrecognized map spec {spec!r} (want poly:, rat:, or @file)")


def parse_function_spec(spec: str):
    """Map spec, expsum: terms, or exceptional: parameters."""
    spec = spec.strip()
    if spec.startswith("expsum:"):
        terms = []
        for chunk in spec[7:].split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            if "@" not in chunk:
                raise ValueError(f"expsum term {chunk!r} needs coeff@freq")
            cs, fs = chunk.rsplit("@", 1)
            terms.append((_parse_complex(cs), float(fs)))
        g = ExpSum(terms)
        if g.is_zero:
            raise ValueError("expsum spec has no nonzero terms")
        return g
    if spec.startswith("exceptional:"):
        vals = [float(v) for v in spec[12:].split(",")]
        if len(vals) != 4:
            raise ValueError("exceptional: spec needs c1,b1,c2,b2")
        return ExceptionalParams(c1=vals[0], b1=vals[1], c2=vals[2], b2=vals[3])
    return parse_map_spec(spec)


def _parse_window(text: str, name: str) -> tuple[float, float, float, float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError(f"{name} needs four comma-separated numbers")
    x0, x1, y0, y1 = (float(p) for p in parts)
    if not (x0 < x1 and y0 < y1):
        raise ValueError(f"{name} must satisfy x0 < x1 and y0 < y1")
    return x0, x1, y0, y1


def _emit_manifest(path: str, command: str, parameters: dict, seed, outputs: list[str]):
    man = run_manifest(command, parameters, seed, outputs, __version__)
    atomic_write_text(path, json_dumps(man) + "\n")


def _print(doc: dict) -> None:
    sys.stdout.write(json_dumps(doc) + "\n")


# --- subcommands ------------------------------------------------------------


def _cmd_julia(args) -> int:
    try:
        f = parse_map_spec(args.map)
        if f.degree < 2:
            raise ValueError("julia needs a map of degree >= 2")
    except (ValueError, OSError, KeyError) as exc:
        raise _fail(EXIT_BAD_INPUT, str(exc))
    config = JuliaSampleConfig(
        n_points=args.n, burn_in=args.burn_in, seed=args.seed,
        branch_rule=args.branch_rule,
    )
    stats: dict = {}
    try:
        cloud = julia_sample(f, config, stats=stats)
    except NoRepellingFixedPointError as exc:
        raise _fail(EXIT_NO_REPELLING, str(exc))
    contained, rep = is_contained_in_circline(cloud, tol=args.tol)
    csv_path = args.out + ".csv"
    fit_path = args.out + ".fit.json"
    write_point_cloud_csv(csv_path, cloud)
    fit_doc = fit_report_to_dict(rep)
    fit_doc["contained"] = contained
    fit_doc["retries"] = int(stats.get("retries", 0))
    atomic_write_text(fit_path, json_dumps(fit_doc) + "\n")
    params = {
        "map": args.map, "n": args.n, "burn_in": args.burn_in,
        "branch_rule": args.branch_rule, "tol": args.tol,
    }
    _emit_manifest(args.out + ".manifest.json", "julia", params, args.seed,
                   [csv_path, fit_path])
    _print({"command": "julia", "points": len(cloud), "fit": fit_doc,
            "outputs": [csv_path, fit_path]})
    return EXIT_OK


def _cmd_circlefit(args) -> int:
    try:
        cloud = read_point_cloud_csv(args.csv)
        contained, rep = is_contained_in_circline(cloud, tol=args.tol)
    except (ValueError, OSError) as exc:
        raise _fail(EXIT_BAD_INPUT, str(exc))
    doc = fit_report_to_dict(rep)
    doc["contained"] = contained
    fit_path = args.out + ".fit.json"
    atomic_write_text(fit_path, json_dumps(doc) + "\n")
    _emit_manifest(args.out + ".manifest.json", "circlefit",
                   {"csv": os.path.basename(args.csv), "tol": args.tol}, None,
                   [fit_path])
    _print(doc)
    return EXIT_OK if contained else EXIT_NOT_CONTAINED


def _cmd_exceptional(args) -> int:
    try:
        a = _parse_complex(args.a)
        strip = _parse_window(args.strip, "--strip")
        verdict = circle_case_classifier(args.c, args.b, a, strip=strip)
    except ValueError as exc:
        raise _fail(EXIT_BAD_INPUT, str(exc))
    doc = {
        "schema": "v1",
        "verdict": verdict.kind,
        "matched_rule": verdict.matched_rule,
        "equation": expsum_to_dict(verdict.equation),
        "nonreal_evidence": [complex_pair(z) for z in verdict.nonreal_evidence],
        "reports": [zero_report_to_dict(r) for r in verdict.reports],
    }
    out_path = args.out + ".json"
    atomic_write_text(out_path, json_dumps(doc) + "\n")
    _emit_manifest(args.out + ".manifest.json", "exceptional",
                   {"c": args.c, "b": args.b, "a": args.a, "strip": args.strip},
                   None, [out_path])
    _print(doc)
    return EXIT_OK


def _cmd_poincare(args) -> int:
    try:
        f = parse_map_spec(args.map)
        if f.degree < 2:
            raise ValueError("poincare needs a map of degree >= 2")
        chart = koenigs_chart(f, max_depth=max(args.depth, 1))
    except NoRepellingFixedPointError as exc:
        raise _fail(EXIT_NO_REPELLING, str(exc))
    except (ValueError, OSError, KeyError) as exc:
        raise _fail(EXIT_BAD_INPUT, str(exc))
    n = args.grid
    zs = [0.0 + 0.0j]
    for k in range(1, n + 1):
        for j in range(n):
            zs.append((k / n) * np.exp(2j * np.pi * j / n))
    rows = []
    for z in zs:
        if args.depth == 0:
            val, gap = poincare_eval(chart, z, depth=0)
            fn_res = 0.0
        else:
            val, gap = poincare_eval(chart, z, depth=args.depth)
            lz_val, _ = poincare_eval(chart, chart.multiplier * z, depth=args.depth)
            from .algebra import chordal  # local to keep the import list short

            fn_res = chordal(lz_val, f(val))
        rows.append({
            "z": complex_pair(complex(z)),
            "value": None if is_inf(val) else complex_pair(val),
            "gap": float(gap),
            "fn_eq_residual": float(fn_res),
        })
    line_doc = None
    if args.julia is not None:
        try:
            cloud = read_point_cloud_csv(args.julia)
        except (ValueError, OSError) as exc:
            raise _fail(EXIT_BAD_INPUT, str(exc))
        is_line, direction, max_dev = line_invariance_check(chart, cloud)
        line_doc = {
            "is_line": bool(is_line),
            "direction": complex_pair(direction),
            "max_deviation": float(max_dev),
        }
    doc = {
        "schema": "v1",
        "chart": koenigs_chart_to_dict(chart),
        "depth": args.depth,
        "rows": rows,
        "line_invariance": line_doc,
    }
    out_path = args.out + ".json"
    atomic_write_text(out_path, json_dumps(doc) + "\n")
    _emit_manifest(args.out + ".manifest.json", "poincare",
                   {"map": args.map, "depth": args.depth, "grid": args.grid,
                    "julia": args.julia and os.path.basename(args.julia)},
                   None, [out_path])
    _print(doc)
    return EXIT_OK


def _cmd_criterion(args) -> int:
    try:
        f = parse_map_spec(args.map)
        rep = interval_criterion(f, args.a, args.b)
    except (ValueError, OSError, KeyError) as exc:
        raise _fail(EXIT_BAD_INPUT, str(exc))
    doc = interval_report_to_dict(rep)
    doc["chebyshev_conjugate"] = (
        bool(chebyshev_conjugacy_check(f, args.a, args.b)) if rep.verdict else None
    )
    out_path = args.out + ".json"
    atomic_write_text(out_path, json_dumps(doc) + "\n")
    _emit_manifest(args.out + ".manifest.json", "criterion",
                   {"map": args.map, "a": args.a, "b": args.b}, None, [out_path])
    _print(doc)
    return EXIT_OK


def _cmd_order(args) -> int:
    try:
        f = parse_function_spec(args.function)
        if args.n_radii < 4:
            raise ValueError("need at least 4 radii")
        radii = list(np.geomspace(args.r_min, args.r_max, args.n_radii))
        profile = order_estimate(f, radii)
    except (ValueError, OSError, KeyError) as exc:
        raise _fail(EXIT_BAD_INPUT, str(exc))
    doc = growth_profile_to_dict(profile)
    json_path = args.out + ".json"
    csv_path = args.out + ".csv"
    atomic_write_text(json_path, json_dumps(doc) + "\n")
    lines = [
        f"{format_float(r)},{format_float(t)}"
        for r, t in zip(profile.radii, profile.T_values)
    ]
    atomic_write_text(csv_path, "\n".join(lines) + "\n")
    _emit_manifest(args.out + ".manifest.json", "order",
                   {"function": args.function, "r_min": args.r_min,
                    "r_max": args.r_max, "n_radii": args.n_radii},
                   None, [json_path, csv_path])
    _print(doc)
    return EXIT_OK


def _cmd_render(args) -> int:
    try:
        f = parse_map_spec(args.map)
        window = _parse_window(args.window, "--window")
        if args.resolution < 1:
            raise ValueError("resolution must be positive")
        img = escape_render(f, window, args.resolution, max_iter=args.max_iter)
    except (ValueError, OSError, KeyError) as exc:
        raise _fail(EXIT_BAD_INPUT, str(exc))
    pgm_path = args.out + ".pgm"
    write_pgm(pgm_path, img)
    _emit_manifest(args.out + ".manifest.json", "render",
                   {"map": args.map, "window": args.window,
                    "resolution": args.resolution, "max_iter": args.max_iter},
                   None, [pgm_path])
    _print({"command": "render", "outputs": [pgm_path],
            "resolution": args.resolution})
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="circum",
        description="Julia sets on circles: sampling, fitting, and growth tools",
    )
    ap.add_argument("--version", action="version", version=f"circum {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("julia", help="backward-orbit Julia sample plus circline fit")
    p.add_argument("--map", required=True)
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", type=int, default=100, dest="burn_in")
    p.add_argument("--branch-rule", default="uniform-random", dest="branch_rule",
                   choices=["uniform-random", "cycling"])
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", default="circum_julia")
    p.set_defaults(func=_cmd_julia)

    p = sub.add_parser("circlefit", help="fit a circline to a point-cloud CSV")
    p.add_argument("csv")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", default="circum_circlefit")
    p.set_defaults(func=_cmd_circlefit)

    p = sub.add_parser("exceptional", help="classify the quotient family and "
                                           "locate preimage zeros in a strip")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--a", required=True, help="target value (complex literal)")
    p.add_argument("--strip", default="-20,20,0.05,5")
    p.add_argument("--out", default="circum_exceptional")
    p.set_defaults(func=_cmd_exceptional)

    p = sub.add_parser("poincare", help="linearizer values and residuals on a grid")
    p.add_argument("--map", required=True)
    p.add_argument("--depth", type=int, default=40)
    p.add_argument("--grid", type=int, default=4)
    p.add_argument("--julia", default=None, help="point-cloud CSV for the "
                                                 "line-invariance check")
    p.add_argument("--out", default="circum_poincare")
    p.set_defaults(func=_cmd_poincare)

    p = sub.add_parser("criterion", help="interval invariance test for polynomials")
    p.add_argument("--map", required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--out", default="circum_criterion")
    p.set_defaults(func=_cmd_criterion)

    p = sub.add_parser("order", help="growth characteristic and order estimate")
    p.add_argument("--function", required=True)
    p.add_argument("--r-min", type=float, required=True, dest="r_min")
    p.add_argument("--r-max", type=float, required=True, dest="r_max")
    p.add_argument("--n-radii", type=int, default=12, dest="n_radii")
    p.add_argument("--out", default="circum_order")
    p.set_defaults(func=_cmd_order)

    p = sub.add_parser("render", help="escape-time pixmap for a polynomial")
    p.add_argument("--map", required=True)
    p.add_argument("--window", default="-2,2,-2,2")
    p.add_argument("--resolution", type=int, required=True)
    p.add_argument("--max-iter", type=int, default=500, dest="max_iter")
    p.add_argument("--out", default="circum_render")
    p.set_defaults(func=_cmd_render)
    return ap


def main(argv: list[str] | None = None) -> int:
    threads = os.environ.get("CIRCUM_THREADS")
    if threads is not None:
        try:
            cap = int(threads)
            if cap < 1:
                raise ValueError
        except ValueError:
            sys.stderr.write(f"circum: CIRCUM_THREADS={threads!r} is not a "
                             "positive integer\n")
            return EXIT_BAD_INPUT
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        sys.stderr.write(f"circum: {exc}\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
