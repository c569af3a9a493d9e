"""Robertson-Walker template, matching against a quantum-state metric, and
classification of the singular loci of the extracted curvature field."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import numeric
from .qmetric import POLAR, MetricTensor, WaveFunction, build_metric
from .symexpr import (
    PI,
    ZERO,
    Func,
    Mul,
    Num,
    Pow,
    Symbol,
    add,
    differentiate,
    evaluate,
    free_symbols,
    func,
    mul,
    parse,
    power,
    simplify,
    substitute,
    sympify,
    to_str,
)
from .symexpr.core import as_base_exp, as_coeff_mul, preorder
from .symexpr.evaluate import PoleError


class NoRadialComponent(ValueError):
    pass


def frw_metric(S, k, chart=POLAR, params=None, c=None) -> MetricTensor:
    """diag(S^2/(1 - k r^2), S^2 r^2, S^2 r^2 sin^2(theta), -c^2) over ``chart``.

    ``c`` defaults to the chart's light-speed symbol.
    """
    S = sympify(parse(S) if isinstance(S, str) else S)
    k = sympify(parse(k) if isinstance(k, str) else k)
    r, th, _, t = (Symbol(n) for n in chart.coords)
    if free_symbols(S) & {r.name, th.name, chart.coords[2]}:
        raise ValueError("scale factor may depend on time only")
    c = Symbol(chart.c_name) if c is None else sympify(c)
    s2 = power(S, 2)
    entries = [
        simplify(mul(s2, power(add(1, mul(-1, k, power(r, 2))), -1))),
        mul(s2, power(r, 2)),
        mul(s2, power(r, 2), power(func("sin", th), 2)),
        mul(-1, power(c, 2)),
    ]
    return MetricTensor.diagonal(chart, entries, params)


@dataclass
class FrwDecomposition:
    S_sq_from_theta: object
    S_sq_from_phi: object
    k_expr: object
    tt_residual: object
    isotropy_residual: object
    offdiag_max: list  # [(label, expr)] for nonzero cross terms

    def as_strings(self):
        return {
            "S_sq_from_theta": to_str(self.S_sq_from_theta),
            "S_sq_from_phi": to_str(self.S_sq_from_phi),
            "k_expr": to_str(self.k_expr),
            "tt_residual": to_str(self.tt_residual),
            "isotropy_residual": to_str(self.isotropy_residual),
            "offdiag_max": [{"component": lab, "expr": to_str(e)} for lab, e in self.offdiag_max],
        }


def decompose(g: MetricTensor) -> FrwDecomposition:
    """Read S^2 (two routes), k, and consistency residuals off a polar-chart metric.

    S^2 from the theta-theta entry is the one substituted into k.
    """
    ch = g.chart
    r, th, _, _ = (Symbol(n) for n in ch.coords)
    if g[0, 0] == ZERO:
        raise NoRadialComponent("g_rr vanishes identically")
    inv_r2 = power(r, -2)
    s_theta = simplify(mul(g[1, 1], inv_r2))
    s_phi = simplify(mul(g[2, 2], inv_r2, power(func("sin", th), -2)))
    k = simplify(mul(inv_r2, add(1, mul(-1, s_theta, power(g[0, 0], -1)))))
    c = Symbol(ch.c_name)
    tt = simplify(add(mul(g[3, 3], -1, power(c, -2)), -1))
    iso = simplify(add(s_theta, mul(-1, s_phi)))
    off = []
    for m in range(g.dim):
        for n in range(m + 1, g.dim):
            if g[m, n] != ZERO:
                off.append((f"{ch.coords[m]},{ch.coords[n]}", g[m, n]))
    return FrwDecomposition(s_theta, s_phi, k, tt, iso, off)


def extract_k(w: WaveFunction, convention="unconjugated"):
    return decompose(build_metric(w, convention)).k_expr


# ---------------------------------------------------------------------------
# singularities


@dataclass
class Locus:
    constraint: object  # expression vanishing on the locus
    symbol: str
    values: list  # solutions for ``symbol`` inside the domain
    classification: str
    witness: dict
    evidence: list  # [(side, [|k| ...])]
    numeric_position: float | None = None
    label: str = ""

    @property
    def diverges(self):
        return all(all(b > a for a, b in zip(v, v[1:])) for _, v in self.evidence if v)


@dataclass
class SingularityReport:
    loci: list = field(default_factory=list)
    scan: list = field(default_factory=list)

    def labels(self):
        return {l.label: l.classification for l in self.loci}


def _denominator_factors(e):
    """Bases that appear with negative exponent, plus sin/cos behind cot/tan."""
    seen = []
    for n in preorder(e):
        b, x = as_base_exp(n)
        if isinstance(n, Pow) and isinstance(x, Num) and x.value < 0:
            cand = [b]
        elif isinstance(n, Func) and n.name == "cot":
            cand = [func("sin", n.arg)]
        elif isinstance(n, Func) and n.name == "tan":
            cand = [func("cos", n.arg)]
        elif isinstance(n, Func) and n.name == "ln":
            cand = [n.arg]
        else:
            continue
        for c in cand:
            for f in _split_factors(c):
                if f not in seen:
                    seen.append(f)
    return seen


def _split_factors(e):
    if isinstance(e, Mul):
        out = []
        for f in as_coeff_mul(e)[1]:
            out.extend(_split_factors(f))
        return out
    if isinstance(e, Pow):
        b, x = as_base_exp(e)
        if isinstance(x, Num) and x.value > 0:
            return _split_factors(b)
        return []
    if isinstance(e, Func) and e.name == "exp":
        return []
    if not free_symbols(e):
        return []
    return [e]


def _solve(f, coords, lo_hi):
    """Solutions of f = 0 as (symbol, [values]) for one coordinate, or None."""
    if not free_symbols(f) & set(coords):
        return None
    if isinstance(f, Symbol):
        return f.name, [ZERO]
    if isinstance(f, Func) and f.name in ("sin", "cos") and isinstance(f.arg, Symbol) and f.arg.name in coords:
        s = f.arg.name
        lo, hi = lo_hi.get(s, (0.0, math.pi))
        base = 0.0 if f.name == "sin" else 0.5
        vals = []
        for n in range(-4, 9):
            v = (base + n) * math.pi
            if lo - 1e-12 <= v <= hi + 1e-12:
                vals.append(mul(base + n, PI) if (base + n) else ZERO)
        return s, vals
    for s in coords:
        if s not in free_symbols(f):
            continue
        a = simplify(differentiate(f, s))
        if s in free_symbols(a) or a == ZERO:
            continue
        b = simplify(substitute(f, {s: 0}))
        return s, [simplify(mul(-1, b, power(a, -1)))]
    return None


def classify_singularities(k, domain=None, params=None, coords=("r", "theta"), scan=True, grid=64):
    """Find and classify the loci where ``k`` diverges.

    Loci come from the zero sets of denominator factors.  A locus on the
    chart-degeneracy set r = 0 or theta in {0, pi} is a coordinate
    singularity; anything else is physical.  Each locus carries a witness
    point, |k| sampled while approaching it, and (with ``scan``) the position
    found by the numeric pole scan.
    """
    k = simplify(sympify(k))
    params = dict(params or {})
    params.setdefault("a0", 1.0)
    params = {n: v for n, v in params.items() if n in free_symbols(k)}
    domain = dict(domain or {"r": (0.0, 5.0), "theta": (0.0, math.pi)})
    generic = {s: _generic(domain[s]) for s in coords}
    report = SingularityReport()
    for f in _denominator_factors(k):
        sol = _solve(f, coords, domain)
        if sol is None:
            continue
        s, vals = sol
        numeric_vals = [evaluate(v, params).real for v in vals]
        inside = [(v, x) for v, x in zip(vals, numeric_vals) if domain[s][0] - 1e-12 <= x <= domain[s][1] + 1e-12]
        if not inside:
            continue
        if any(l.constraint == f for l in report.loci):
            continue
        coordinate = (s == coords[0] and all(abs(x) < 1e-12 for _, x in inside)) or (
            s == coords[1] and all(abs(x) < 1e-12 or abs(x - math.pi) < 1e-12 for _, x in inside)
        )
        v0, x0 = inside[0]
        witness = dict(params, **generic)
        witness[s] = x0
        evidence = _evidence(k, s, x0, witness, domain[s])
        report.loci.append(
            Locus(f, s, [v for v, _ in inside], "coordinate" if coordinate else "physical", witness, evidence,
                  label=f"{s}={to_str(v0)}")
        )
    if scan and report.loci:
        spec = numeric.GridSpec(
            [numeric.Axis(s, *_shrink(domain[s]), grid) for s in coords if s in free_symbols(k)],
            {n: v for n, v in params.items()},
        )
        report.scan = numeric.scan_singular_candidates(k, spec)
        for locus in report.loci:
            x0 = locus.witness[locus.symbol]
            best = None
            for cand in report.scan:
                if cand.axis == locus.symbol and not cand.at_edge:
                    d = abs(cand.position - x0)
                    if d < 0.05 * (domain[locus.symbol][1] - domain[locus.symbol][0]) and (best is None or d < best[0]):
                        best = (d, cand.position)
            if best:
                locus.numeric_position = best[1]
    return report


def _generic(interval):
    lo, hi = interval
    return lo + 0.3819660112501051 * (hi - lo)


def _shrink(interval, frac=0.01):
    lo, hi = interval
    d = frac * (hi - lo)
    return lo + d, hi - d


def _evidence(k, s, x0, witness, interval, js=range(3, 11)):
    lo, hi = interval
    scale = abs(x0) if x0 else (hi - lo) / 4
    out = []
    for side in (1, -1):
        vals = []
        for j in js:
            x = x0 + side * scale * 2.0**-j
            if not lo <= x <= hi:
                vals = []
                break
            try:
                vals.append(abs(evaluate(k, dict(witness, **{s: x}))))
            except PoleError:
                vals = []
                break
        if vals:
            out.append(("+" if side > 0 else "-", vals))
    return out
