"""Command-line front end: ``qgrav <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys

import numpy as np

from . import __version__
from .fieldeq import FieldEquationFailure, PhysicalParams, field_equation_residual, load_si_constants, parse_key_values
from .frw import NoRadialComponent, classify_singularities, decompose, frw_metric
from .geometry import DegenerateMetric, Geometry
from .numeric import Axis, GridSpec, NonConvergent, grid_eval
from .qmetric import POLAR, WaveFunction, build_metric, line_element, metric_at, rank_at
from .symexpr import ParseError, evaluate, free_symbols, parse, to_str
from .symexpr.evaluate import EvaluationError

BUILTINS = {
    "hydrogen-1s": ("C*exp(-r/a0)*exp(-i*omega0*t)", {"C": 1.0, "a0": 1.0, "omega0": 1.0}),
    "hydrogenlike-2p": (
        "C1*r*sin(theta)*cos(phi)*exp(-r/(2*a0))*exp(-i*omega0*t)",
        {"C1": 1.0, "a0": 1.0, "omega0": 1.0},
    ),
    "plane-wave": ("C*exp(i*kw*r*cos(theta))*exp(-i*omega0*t)", {"C": 1.0, "kw": 1.0, "omega0": 1.0}),
    "gaussian": ("C*exp(-r^2/(2*sigma^2))*exp(-i*omega0*t)", {"C": 1.0, "sigma": 1.0, "omega0": 1.0}),
}

PHYSICAL = ("rho", "m", "hbar", "G", "c")
FORMATS = ("json", "csv", "text")


class UsageError(Exception):
    """Bad input from the user (exit code 2)."""


class DomainError(Exception):
    """The computation itself failed (exit code 1)."""


# ---------------------------------------------------------------------------
# wave functions


def parse_wavefunction_text(text, origin="<input>"):
    """Parse 'param NAME = NUMBER' lines and one 'psi = EXPRESSION' line."""
    params, psi = {}, None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"param\s+([^\W\d]\w*)\s*=\s*(\S+)", line)
        if m:
            try:
                params[m[1]] = float(m[2])
            except ValueError:
                raise UsageError(f"{origin}:{lineno}: bad number {m[2]!r}") from None
            continue
        m = re.fullmatch(r"psi\s*=\s*(.+)", line)
        if m:
            if psi is not None:
                raise UsageError(f"{origin}:{lineno}: psi given twice")
            col = raw.index(m[1]) + 1
            try:
                psi = parse(m[1])
            except ParseError as exc:
                raise UsageError(f"{origin}:{lineno}:{col + exc.offset}: {exc}") from None
            continue
        raise UsageError(f"{origin}:{lineno}: expected 'param NAME = NUMBER' or 'psi = EXPRESSION'")
    if psi is None:
        raise UsageError(f"{origin}: no 'psi = ...' line")
    return psi, params


def load_wavefunction(builtin=None, path=None, overrides=None, chart=POLAR):
    if (builtin is None) == (path is None):
        raise UsageError("give exactly one of --builtin or --psi")
    if builtin is not None:
        if builtin not in BUILTINS:
            raise UsageError(f"unknown builtin {builtin!r}; available: {', '.join(BUILTINS)}")
        text, params = BUILTINS[builtin]
        psi, params, name = parse(text), dict(params), builtin
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except FileNotFoundError:
            raise UsageError(f"{path}: file not found") from None
        except OSError as exc:
            raise UsageError(f"{path}: {exc.strerror}") from None
        psi, params = parse_wavefunction_text(text, path)
        name = path
    for k, v in (overrides or {}).items():
        if k in free_symbols(psi) or k in params:
            params[k] = v
    params = {k: v for k, v in params.items() if k in free_symbols(psi)}
    unbound = free_symbols(psi) - set(chart.coords) - set(params) - {chart.c_name}
    if unbound:
        raise UsageError("wave function has unbound parameters: " + ", ".join(sorted(unbound)))
    return WaveFunction(psi, chart, params, name)


# ---------------------------------------------------------------------------
# argument handling


def _assignments(items, flag):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"{flag} expects NAME=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        k = k.strip()
        try:
            out[k] = evaluate(parse(v)).real
        except (ParseError, EvaluationError):
            raise UsageError(f"{flag} {item!r}: value must be a number") from None
    return out


def _physical(args, params):
    base = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                base = parse_key_values(fh.read())
        except FileNotFoundError:
            raise UsageError(f"{args.config}: file not found") from None
        except ValueError as exc:
            raise UsageError(f"{args.config}: {exc}") from None
    if args.units == "SI":
        consts = load_si_constants()
        vals = {k: consts[k] for k in PHYSICAL}
    else:
        vals = {}
    vals.update({k: v for k, v in base.items() if k in PHYSICAL})
    vals.update({k: v for k, v in params.items() if k in PHYSICAL})
    try:
        return PhysicalParams(units=args.units, **vals)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _chart(params):
    c = params.get("c", 1.0)
    return POLAR if c == 1.0 else type(POLAR)(c_value=c)


def _template(args, chart, params):
    if args.frw_scale is None:
        return None
    try:
        S = parse(args.frw_scale)
        k = parse(args.frw_k)
    except ParseError as exc:
        raise UsageError(f"bad FRW template: {exc}") from None
    extra = {n: v for n, v in params.items() if n in (free_symbols(S) | free_symbols(k)) - set(chart.coords)}
    try:
        return frw_metric(S, k, chart, extra)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _sample_points(chart, seed, count):
    rng = np.random.default_rng(seed)
    return [{n: float(rng.uniform(*chart.domain(n))) for n in chart.coords} for _ in range(count)]


def _num(x):
    if x is None:
        return None
    if isinstance(x, complex):
        return {"re": _num(x.real), "im": _num(x.imag)}
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _matrix(a):
    return [[_num(v) for v in row] for row in np.asarray(a)]


def _tensor(tf, coords):
    out = {}
    for idx, v in tf.nonzero().items():
        out[",".join(coords[i] for i in idx)] = to_str(v)
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_builtins(args, ctx):
    return {name: {"psi": text, "params": params} for name, (text, params) in BUILTINS.items()}


def cmd_metric(args, ctx):
    w = ctx["wave"]()
    g = build_metric(w, args.convention)
    le = line_element(g)
    coords = g.chart.coords
    out = {
        "components": {f"{coords[m]},{coords[k]}": to_str(v) for (m, k), v in sorted(g.components().items())},
        "line_element": le.text,
        "line_element_diagonal": le.diagonal_text,
        "cross_terms": {d: to_str(c) for c, d in le.cross},
        "params": w.params,
    }
    if ctx["at"]:
        a = metric_at(g, ctx["at"])
        rr = rank_at(g, ctx["at"])
        out["at"] = {"point": ctx["at"], "matrix": _matrix(a), "rank": rr.rank, "nullspace": _matrix(rr.nullspace.T)}
    return out


def _metric_for(args, ctx):
    g = _template(args, ctx["chart"], ctx["params"])
    if g is None:
        g = build_metric(ctx["wave"](), args.convention)
    return g


def cmd_geometry(args, ctx):
    g = _metric_for(args, ctx)
    geo = Geometry(g, simplify_stages=not args.no_simplify)
    coords = g.chart.coords
    what = args.what
    if what == "christoffel":
        res = _tensor(geo.christoffel(), coords)
    elif what == "riemann":
        res = _tensor(geo.riemann(), coords)
    elif what == "ricci":
        res = _tensor(geo.ricci(), coords)
    elif what == "einstein":
        res = _tensor(geo.einstein(), coords)
    else:
        res = to_str(geo.scalar_curvature())
    out = {"what": what, "components": res}
    if ctx["at"]:
        b = g.binding(ctx["at"])
        if what == "scalar":
            out["value"] = _num(evaluate(geo.scalar_curvature(), b).real)
    return out


def cmd_frw(args, ctx):
    g = _metric_for(args, ctx)
    return decompose(g).as_strings()


def cmd_singularities(args, ctx):
    w = ctx["wave"]()
    k = decompose(build_metric(w, args.convention)).k_expr
    params = {n: v for n, v in w.params.items() if n in free_symbols(k)}
    rmax = args.r_max if args.r_max is not None else 5.0 * params.get("a0", 1.0)
    rep = classify_singularities(k, {"r": (0.0, rmax), "theta": (0.0, math.pi)}, params)
    loci = []
    for l in rep.loci:
        loci.append(
            {
                "label": l.label,
                "constraint": to_str(l.constraint),
                "coordinate": l.symbol,
                "values": [to_str(v) for v in l.values],
                "classification": l.classification,
                "witness": {n: _num(v) for n, v in sorted(l.witness.items())},
                "evidence": {side: [_num(v) for v in vals] for side, vals in l.evidence},
                "diverges": l.diverges,
                "numeric_position": _num(l.numeric_position),
            }
        )
    scan = [
        {"axis": c.axis, "position": _num(c.position), "at_edge": c.at_edge, "lines": c.lines} for c in rep.scan
    ]
    return {"k_expr": to_str(k), "loci": loci, "scan": scan}


def cmd_fieldeq(args, ctx):
    w = ctx["wave"]()
    g = _template(args, ctx["chart"], ctx["params"])
    if g is None:
        g = build_metric(w, args.convention)
    points = [ctx["at"]] if ctx["at"] else _sample_points(g.chart, ctx["seed"], args.points)
    p = ctx["physical"]()
    try:
        rep = field_equation_residual(g, w, p, points, order=args.order)
    except FieldEquationFailure as exc:
        raise DomainError(str(exc)) from None
    return {
        "params": rep.params,
        "psi_norm": _num(rep.psi_norm),
        "quadrature_errors": [_num(e) for e in rep.quadrature_errors],
        "points": [
            {
                "point": {n: _num(v) for n, v in sorted(pr.point.items())},
                "lhs": None if pr.lhs is None else _matrix(pr.lhs),
                "rhs": None if pr.rhs is None else _matrix(pr.rhs),
                "residual_max": _num(pr.residual_max),
                "flag": pr.flag,
            }
            for pr in rep.points
        ],
    }


def _target_expr(args, ctx):
    if args.expr is not None:
        try:
            return parse(args.expr), dict(ctx["params"])
        except ParseError as exc:
            raise UsageError(f"--expr: {exc}") from None
    w = ctx["wave"]()
    if args.field == "psi":
        e = w.psi
    elif args.field == "k":
        e = decompose(build_metric(w, args.convention)).k_expr
    else:
        g = build_metric(w, args.convention)
        names = g.chart.coords
        i, j = (names.index(s) for s in args.field[2:].split(","))
        e = g[i, j]
    b = w.binding()
    return e, b


def cmd_eval(args, ctx):
    e, binding = _target_expr(args, ctx)
    binding.update(ctx["at"])
    v = evaluate(e, binding)
    return {"expr": to_str(e), "point": {n: _num(x) for n, x in sorted(ctx["at"].items())}, "value": _num(v)}


def _axis(text):
    m = re.fullmatch(r"(\w+)=([^:]+):([^:]+):(\d+)(?::(linear|log))?", text)
    if not m:
        raise UsageError(f"--axis expects NAME=MIN:MAX:COUNT[:linear|log], got {text!r}")
    try:
        lo, hi = evaluate(parse(m[2])).real, evaluate(parse(m[3])).real
        return Axis(m[1], lo, hi, int(m[4]), m[5] or "linear")
    except (ParseError, EvaluationError):
        raise UsageError(f"--axis {text!r}: bounds must be numbers") from None


def cmd_grid(args, ctx):
    e, binding = _target_expr(args, ctx)
    if not args.axis:
        raise UsageError("grid needs at least one --axis")
    try:
        axes = [_axis(a) for a in args.axis]
        fixed = dict(binding)
        fixed.update(ctx["at"])
        spec = GridSpec(axes, {n: v for n, v in fixed.items() if n not in [a.name for a in axes]})
        table = grid_eval(e, spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return {"expr": to_str(e), "columns": table.columns, "rows": [[_num(v) for v in row] for row in table.rows], "_table": table}


COMMANDS = {
    "builtins": cmd_builtins,
    "metric": cmd_metric,
    "geometry": cmd_geometry,
    "frw": cmd_frw,
    "singularities": cmd_singularities,
    "fieldeq": cmd_fieldeq,
    "eval": cmd_eval,
    "grid": cmd_grid,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("input")
    src.add_argument("--psi", metavar="FILE", help="wave-function file")
    src.add_argument("--builtin", metavar="NAME", help="builtin wave function (see 'builtins')")
    common.add_argument("--convention", choices=("unconjugated", "conjugated"), default="unconjugated")
    common.add_argument("--param", action="append", metavar="NAME=VALUE", help="override a parameter (repeatable)")
    common.add_argument("--at", action="append", metavar="COORD=VALUE", help="evaluation point (repeatable)")
    common.add_argument("--seed", type=int, default=None, help="sampling seed (default $QGRAV_SEED or 0)")
    common.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    common.add_argument("--format", choices=FORMATS, default=None)
    common.add_argument("--config", metavar="FILE", help="key = value file for physical constants")
    common.add_argument("--units", choices=("dimensionless", "SI"), default="dimensionless")
    common.add_argument("--frw-scale", metavar="EXPR", help="use the FRW template with this S(t)")
    common.add_argument("--frw-k", metavar="EXPR", default="0", help="curvature index for --frw-scale")

    parser = argparse.ArgumentParser(prog="qgrav", description=__doc__)
    parser.add_argument("--version", action="version", version=f"qgrav {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("builtins", parents=[common], help="list builtin wave functions")
    sub.add_parser("metric", parents=[common], help="quantum-state metric and line element")
    geo = sub.add_parser("geometry", parents=[common], help="curvature tensors")
    geo.add_argument("--what", choices=("christoffel", "riemann", "ricci", "scalar", "einstein"), default="scalar")
    geo.add_argument("--no-simplify", action="store_true", help="keep raw (unsimplified) stage outputs")
    sub.add_parser("frw", parents=[common], help="compare with the Robertson-Walker template")
    sing = sub.add_parser("singularities", parents=[common], help="classify singular loci of k")
    sing.add_argument("--r-max", type=float, default=None)
    fe = sub.add_parser("fieldeq", parents=[common], help="field-equation residual")
    fe.add_argument("--points", type=int, default=5)
    fe.add_argument("--order", type=int, default=32)
    for name in ("eval", "grid"):
        p = sub.add_parser(name, parents=[common], help=f"{name} an expression")
        p.add_argument("--expr", help="expression instead of a wave-function field")
        p.add_argument("--field", default="k", help="psi, k or g_<c1>,<c2> (default k)")
        if name == "grid":
            p.add_argument("--axis", action="append", metavar="NAME=MIN:MAX:COUNT[:log]")
    return parser


def _resolve_output(args):
    fmt, out = args.format, args.out
    # "--out json" selects a format rather than naming a file
    if out in FORMATS and fmt is None:
        fmt, out = out, None
    if fmt is None:
        fmt = "csv" if args.command == "grid" else "json"
    return fmt, out


def _text(obj, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}-")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {v}")
    else:
        lines.append(f"{pad}{obj}")
    return lines


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        seed = args.seed if args.seed is not None else int(os.environ.get("QGRAV_SEED", "0"))
    except ValueError:
        print("qgrav: QGRAV_SEED must be an integer", file=stderr)
        return 2
    try:
        fmt, out = _resolve_output(args)
        params = _assignments(args.param, "--param")
        at = _assignments(args.at, "--at")
        chart = _chart(params)
        ctx = {
            "params": params,
            "at": at,
            "seed": seed,
            "chart": chart,
            "wave": lambda: load_wavefunction(args.builtin, args.psi, params, chart),
            "physical": lambda: _physical(args, params),
        }
        result = COMMANDS[args.command](args, ctx)
    except UsageError as exc:
        print(f"qgrav: {exc}", file=stderr)
        return 2
    except (DegenerateMetric, NonConvergent, NoRadialComponent, EvaluationError, DomainError, ZeroDivisionError) as exc:
        print(f"qgrav: {type(exc).__name__}: {exc}", file=stderr)
        return 1
    table = result.pop("_table", None) if isinstance(result, dict) else None
    config = {
        "command": args.command,
        "builtin": args.builtin,
        "psi": args.psi,
        "convention": args.convention,
        "params": params,
        "at": at,
        "units": args.units,
        "format": fmt,
    }
    for extra in ("what", "frw_scale", "frw_k", "points", "order", "expr", "field", "axis", "r_max"):
        if getattr(args, extra, None) is not None:
            config[extra] = getattr(args, extra)
    report = {"tool_version": __version__, "config": config, "seed": seed, "result": result}
    if fmt == "json":
        text = json.dumps(report, sort_keys=True, indent=2, allow_nan=False, ensure_ascii=False) + "\n"
    elif fmt == "csv":
        if table is None:
            print("qgrav: csv output is only available for 'grid'", file=stderr)
            return 2
        text = table.to_csv()
    else:
        text = "\n".join(_text(report)) + "\n"
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"qgrav: cannot write {out}: {exc.strerror}", file=stderr)
            return 1
    else:
        stdout.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
