"""Metric of quantum states built from the gradient of a wave function.

Components are ``g_mn = s_mn * l_m * l_n * Re[e_m e_n (D_m psi)' (D_n psi)]``
where ``D_t = (1/c) d/dt``, ``l_t = c`` restores the coordinate time, ``s`` is
the chart signature applied to the time row/column, ``'`` is complex
conjugation in the conjugated convention, and ``e_t = i`` (``e`` = 1 for
space) is the phase attached to the time derivative (see ``build_metric``).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .symexpr import (
    ONE,
    ZERO,
    I,
    Symbol,
    add,
    differentiate,
    evaluate,
    free_symbols,
    func,
    mul,
    power,
    simplify,
    to_str,
)
from .symexpr.core import could_extract_minus_sign

CONVENTIONS = ("unconjugated", "conjugated")

DEFAULT_DOMAINS = {
    "r": (0.2, 3.0),
    "theta": (0.1, math.pi - 0.1),
    "phi": (0.0, 2 * math.pi),
    "t": (0.05, 2.0),
}


@dataclass(frozen=True)
class Chart:
    coords: tuple = ("r", "theta", "phi", "t")
    signature: tuple = (1, 1, 1, -1)
    time_index: int | None = 3
    c_name: str = "c"
    c_value: float = 1.0
    domains: dict = field(default_factory=lambda: dict(DEFAULT_DOMAINS))

    def __post_init__(self):
        if len(set(self.coords)) != len(self.coords):
            raise ValueError("chart coordinates must be distinct")
        if len(self.signature) != len(self.coords):
            raise ValueError("signature length must equal the number of coordinates")
        if any(s not in (1, -1) for s in self.signature):
            raise ValueError("signature entries must be +1 or -1")
        if self.time_index is not None and not 0 <= self.time_index < len(self.coords):
            raise ValueError("time index out of range")

    @property
    def dim(self):
        return len(self.coords)

    def index(self, name):
        return self.coords.index(name)

    def domain(self, name):
        return self.domains.get(name, (0.2, 1.2))


POLAR = Chart()


def spatial_chart(coords, domains=None):
    """Chart without a time coordinate (used for textbook 2-D/3-D checks)."""
    return Chart(tuple(coords), (1,) * len(coords), None, domains=dict(domains or {}))


@dataclass
class WaveFunction:
    psi: object
    chart: Chart = POLAR
    params: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        allowed = set(self.chart.coords) | set(self.params) | {self.chart.c_name}
        extra = free_symbols(self.psi) - allowed
        if extra:
            raise ValueError("unbound symbols in wave function: " + ", ".join(sorted(extra)))

    def binding(self):
        out = {self.chart.c_name: self.chart.c_value}
        out.update(self.params)
        return out


class MetricTensor:
    """Symmetric component table; ``g[m, n]`` and ``g[n, m]`` return the same object."""

    def __init__(self, chart, components, params=None):
        self.chart = chart
        self.params = dict(params or {})
        n = chart.dim
        self._c = {}
        for (m, k), v in components.items():
            self._c[(min(m, k), max(m, k))] = v
        for m in range(n):
            for k in range(m, n):
                self._c.setdefault((m, k), ZERO)

    @classmethod
    def diagonal(cls, chart, entries, params=None):
        return cls(chart, {(m, m): v for m, v in enumerate(entries)}, params)

    @property
    def dim(self):
        return self.chart.dim

    def __getitem__(self, idx):
        m, k = idx
        return self._c[(min(m, k), max(m, k))]

    def components(self):
        return dict(self._c)

    def matrix(self):
        n = self.dim
        return [[self[m, k] for k in range(n)] for m in range(n)]

    def is_diagonal(self):
        return all(v == ZERO for (m, k), v in self._c.items() if m != k)

    def binding(self, point=None):
        out = {self.chart.c_name: self.chart.c_value}
        out.update(self.params)
        out.update(point or {})
        return out

    def map(self, fn):
        return MetricTensor(self.chart, {k: fn(v) for k, v in self._c.items()}, self.params)


def build_metric(w: WaveFunction, convention="unconjugated", wick=True, simplified=True):
    """Metric of quantum states for ``w``.

    With ``wick`` (default) the time derivative carries a factor ``i``, so
    for a stationary state every component shares the factor cos(2*omega*t)
    and the tt entry takes the negative sign of the printed form.  With
    ``wick=False`` the literal ``(1/c) d/dt`` is used; space-time entries
    then carry sin(2*omega*t) instead.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    chart = w.chart
    c = Symbol(chart.c_name)
    grads, phase, scale = [], [], []
    for k, name in enumerate(chart.coords):
        d = differentiate(w.psi, name)
        if k == chart.time_index:
            d = mul(power(c, -1), d)
            phase.append(I if wick else ONE)
            scale.append(c)
        else:
            phase.append(ONE)
            scale.append(ONE)
        grads.append(d)
    comps = {}
    n = chart.dim
    for m in range(n):
        left = func("conj", grads[m]) if convention == "conjugated" else grads[m]
        for k in range(m, n):
            sign = 1
            if chart.time_index is not None and chart.time_index in (m, k):
                sign = chart.signature[chart.time_index]
            prod = func("re", mul(phase[m], phase[k], left, grads[k]))
            e = mul(sign, scale[m], scale[k], prod)
            comps[(m, k)] = simplify(e) if simplified else e
    return MetricTensor(chart, comps, w.params)


# ---------------------------------------------------------------------------
# line element

_GREEK = {"theta": "θ", "phi": "φ", "omega0": "ω0", "omega": "ω", "rho": "ρ", "sigma": "σ", "pi": "π", "hbar": "ℏ"}
_SUP = str.maketrans("0123456789-", "⁰¹²³⁴⁵⁶⁷⁸⁹⁻")


def pretty(e) -> str:
    """Compact unicode rendering for human-readable output (not reparseable)."""
    s = to_str(e)
    s = re.sub(r"\b(" + "|".join(_GREEK) + r")\b", lambda m: _GREEK[m[1]], s)
    s = re.sub(r"\b(sin|cos|tan|cot)\((\w+)\)\^(\d+)", lambda m: m[1] + m[3].translate(_SUP) + m[2], s)
    s = re.sub(r"\b(sin|cos|tan|cot)\((\w+)\)", r"\1\2", s)
    s = re.sub(r"\^(\d+)", lambda m: m[1].translate(_SUP), s)
    return s.replace("*", "")


@dataclass
class LineElement:
    diagonal: list
    cross: list
    text: str
    diagonal_text: str

    def __str__(self):
        return self.text


def _differential(chart, m, k):
    a = "d" + pretty(Symbol(chart.coords[m]))
    if m == k:
        return a + "²"
    return a + " d" + pretty(Symbol(chart.coords[k]))


def _join(terms):
    if not terms:
        return "ds² = 0"
    out = []
    for k, (coef, diff) in enumerate(terms):
        neg = could_extract_minus_sign(coef)
        mag = mul(-1, coef) if neg else coef
        body = diff if mag == ONE else _wrap(pretty(mag)) + diff
        if k == 0:
            out.append(("−" if neg else "") + body)
        else:
            out.append((" − " if neg else " + ") + body)
    return "ds² = " + "".join(out)


def _wrap(s):
    return f"({s})" if (" + " in s or " - " in s or "/" in s) else s


def line_element(g: MetricTensor) -> LineElement:
    """ds² = sum g_mn dx^m dx^n; off-diagonal entries appear doubled."""
    chart = g.chart
    diag, cross = [], []
    for m in range(g.dim):
        if g[m, m] != ZERO:
            diag.append((g[m, m], _differential(chart, m, m)))
    for m in range(g.dim):
        for k in range(m + 1, g.dim):
            if g[m, k] != ZERO:
                cross.append((simplify(mul(2, g[m, k])), _differential(chart, m, k)))
    return LineElement(diag, cross, _join(diag + cross), _join(diag))


def line_element_expr(g: MetricTensor):
    """Grammar-conformant expression sum g_mn dX_m dX_n with symbols ``d<coord>``."""
    terms = []
    for m in range(g.dim):
        for k in range(m, g.dim):
            factor = 1 if m == k else 2
            dm, dk = Symbol("d" + g.chart.coords[m]), Symbol("d" + g.chart.coords[k])
            terms.append(mul(factor, g[m, k], dm, dk))
    return add(*terms)


# ---------------------------------------------------------------------------
# numeric views


def metric_at(g: MetricTensor, point) -> np.ndarray:
    """Real symmetric matrix of ``g`` at ``point`` (which may override parameters)."""
    binding = g.binding(point)
    n = g.dim
    out = np.zeros((n, n))
    for m in range(n):
        for k in range(m, n):
            v = evaluate(g[m, k], binding)
            if abs(v.imag) > 1e-12 * max(1.0, abs(v.real)):
                raise RuntimeError(f"metric component ({m},{k}) has imaginary part {v.imag!r}")
            out[m, k] = out[k, m] = v.real
    return out


@dataclass
class RankResult:
    rank: int
    nullspace: np.ndarray  # columns span the null space
    pivots: tuple


def matrix_rank(a, tol=1e-10) -> RankResult:
    """Rank and null space by Gaussian elimination with full pivoting."""
    a = np.array(a, dtype=float)
    rows, cols = a.shape
    scale = np.abs(a).max() if a.size else 0.0
    thresh = tol * scale
    col_order = list(range(cols))
    r = 0
    for r in range(min(rows, cols) + 1):
        if r == min(rows, cols):
            break
        sub = np.abs(a[r:, r:])
        i, j = np.unravel_index(int(np.argmax(sub)), sub.shape)
        if sub[i, j] <= thresh or scale == 0.0:
            break
        i += r
        j += r
        a[[r, i]] = a[[i, r]]
        a[:, [r, j]] = a[:, [j, r]]
        col_order[r], col_order[j] = col_order[j], col_order[r]
        a[r] /= a[r, r]
        for q in range(rows):
            if q != r and a[q, r] != 0.0:
                a[q] -= a[q, r] * a[r]
    rank = r
    free = cols - rank
    basis = np.zeros((cols, free))
    for f in range(free):
        v = np.zeros(cols)
        v[rank + f] = 1.0
        v[:rank] = -a[:rank, rank + f]
        out = np.zeros(cols)
        out[col_order] = v
        basis[:, f] = out / np.linalg.norm(out)
    return RankResult(rank, basis, tuple(col_order[:rank]))


def rank_at(g: MetricTensor, point, tol=1e-10) -> RankResult:
    return matrix_rank(metric_at(g, point), tol)
