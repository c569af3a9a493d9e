"""Stress-energy from wave-function gradients and the matching field-equation residual."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import numeric
from .geometry import DegenerateMetric, Geometry
from .qmetric import WaveFunction
from .symexpr import differentiate, evaluate, func, mul, power, substitute
from .symexpr.evaluate import PoleError

UNIT_MODES = ("dimensionless", "SI")


def load_si_constants():
    """Read ``key = value`` lines from the packaged SI constants file."""
    text = resources.files("qgrav").joinpath("data/si_constants.txt").read_text(encoding="utf-8")
    return parse_key_values(text)


def parse_key_values(text):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key] = float(val)
    return out


@dataclass
class PhysicalParams:
    rho: float = 1.0
    m: float = 1.0
    hbar: float = 1.0
    G: float = 1.0
    c: float = 1.0
    units: str = "dimensionless"

    def __post_init__(self):
        if self.units not in UNIT_MODES:
            raise ValueError(f"unit mode must be one of {UNIT_MODES}")
        for name in ("rho", "m", "hbar", "G", "c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @classmethod
    def si(cls, **overrides):
        consts = load_si_constants()
        vals = {k: consts[k] for k in ("rho", "m", "hbar", "G", "c")}
        vals.update(overrides)
        return cls(units="SI", **vals)

    def as_dict(self):
        return {"rho": self.rho, "m": self.m, "hbar": self.hbar, "G": self.G, "c": self.c, "units": self.units}


# ---------------------------------------------------------------------------
# inner products


@dataclass
class InnerProduct:
    value: float
    error: float
    imag: float
    tail: float
    imag_flag: bool


def _fixed_time(e, w: WaveFunction, t0):
    binding = w.binding()
    if w.chart.time_index is not None:
        binding[w.chart.coords[w.chart.time_index]] = t0
    return substitute(e, binding)


def inner_product_detail(a, b, w: WaveFunction, t0=0.0, order=32, r_max=None, tol=1e-11):
    """<a|b> over the spatial volume r^2 sin(theta) dr dtheta dphi at time t0.

    ``r_max`` defaults to 40*a0.  The tail beyond ``r_max`` is estimated from
    the slab (r_max, 2 r_max).
    """
    a0 = float(w.params.get("a0", 1.0))
    r_max = 40.0 * a0 if r_max is None else r_max
    integrand = _fixed_time(mul(func("conj", a), b), w, t0)
    spatial = [n for k, n in enumerate(w.chart.coords) if k != w.chart.time_index]
    dom = numeric.SphericalDomain(r=(0.0, r_max), names=tuple(spatial))
    res = numeric.quadrature(integrand, dom, order=order, tol=tol, jacobian=True)
    slab = numeric.SphericalDomain(r=(r_max, 2 * r_max), names=tuple(spatial))
    try:
        tail = abs(numeric.quadrature(integrand, slab, order=16, tol=1e-300, max_boxes=1, jacobian=True).value)
    except numeric.NonConvergent as exc:
        tail = abs(exc.value)
    flag = abs(res.imag) > 1e-8
    return InnerProduct(res.value, res.error + tail, res.imag, tail, flag)


def inner_product(a, b, w: WaveFunction, t0=0.0, order=32, r_max=None) -> float:
    return inner_product_detail(a, b, w, t0, order, r_max).value


def gradient(w: WaveFunction, index, c=1.0):
    """D_mu psi with the time derivative scaled by 1/c."""
    name = w.chart.coords[index]
    d = differentiate(w.psi, name)
    if index == w.chart.time_index:
        d = mul(power(c, -1), d)
    return d


def _gradient_norms(w, p, t0, order, pointwise=None):
    out = []
    for k in range(w.chart.dim):
        d = gradient(w, k, p.c)
        if pointwise is not None:
            b = w.binding()
            b.update(pointwise)
            v = evaluate(mul(func("conj", d), d), b)
            out.append((v.real, 0.0))
        else:
            ip = inner_product_detail(d, d, w, t0, order)
            out.append((ip.value, ip.error))
    return out


def velocity_product(w, mu, nu, p: PhysicalParams, t0=0.0, order=32, pointwise=None, rooted=True):
    """(hbar^2/m^2) * sqrt(<D_mu psi|D_mu psi> <D_nu psi|D_nu psi>).

    ``pointwise`` (a coordinate binding) replaces the integrals with local
    densities; ``rooted=False`` drops the square root.
    """
    norms = _gradient_norms(w, p, t0, order, pointwise)
    return _vp(norms[mu][0], norms[nu][0], p, rooted)


def _vp(a, b, p, rooted):
    prod = a * b
    core = math.sqrt(max(prod, 0.0)) if rooted else prod
    return core * (p.hbar**2 / p.m**2)


@dataclass
class RhsResult:
    matrix: np.ndarray
    norms: list  # <D_mu psi|D_mu psi> per index
    errors: list
    psi_norm: float


def field_equation_rhs_detail(w, p: PhysicalParams, t0=0.0, order=32, pointwise=None, rooted=True) -> RhsResult:
    norms = _gradient_norms(w, p, t0, order, pointwise)
    n = w.chart.dim
    pref = -8 * math.pi * p.G / p.c**4 * p.rho
    out = np.zeros((n, n))
    for m in range(n):
        for k in range(m, n):
            out[m, k] = out[k, m] = pref * _vp(norms[m][0], norms[k][0], p, rooted)
    if pointwise is None:
        psi_norm = inner_product(w.psi, w.psi, w, t0, order)
    else:
        b = w.binding()
        b.update(pointwise)
        psi_norm = abs(evaluate(w.psi, b)) ** 2
    out += 0.0  # drop negative zeros
    return RhsResult(out, [v for v, _ in norms], [e for _, e in norms], psi_norm)


def field_equation_rhs(w, p: PhysicalParams, t0=0.0, order=32, pointwise=None, rooted=True) -> np.ndarray:
    """-(8 pi G / c^4) rho v_mu v_nu as a numeric symmetric matrix."""
    return field_equation_rhs_detail(w, p, t0, order, pointwise, rooted).matrix


def classical_stress_energy(rho, c, velocity=(0.0, 0.0, 0.0)):
    """rho c^2 u_mu u_nu with u = dx/ds and ds ~ c dt (time slot last, x^t = ct)."""
    u = np.array([v / c for v in velocity] + [1.0])
    return rho * c**2 * np.outer(u, u)


# ---------------------------------------------------------------------------
# residual


@dataclass
class PointResult:
    point: dict
    lhs: np.ndarray | None
    rhs: np.ndarray | None
    residual_max: float | None
    flag: str | None = None


@dataclass
class FieldEquationReport:
    points: list
    params: dict
    quadrature_errors: list = field(default_factory=list)
    psi_norm: float = 0.0

    @property
    def ok_points(self):
        return [p for p in self.points if p.flag is None]


class FieldEquationFailure(ArithmeticError):
    def __init__(self, report):
        self.report = report
        flags = sorted({p.flag for p in report.points})
        super().__init__("field equation failed at every point: " + "; ".join(flags))


def field_equation_residual(g, w, p: PhysicalParams, points, order=32, geometry=None) -> FieldEquationReport:
    """Einstein tensor of ``g`` against the wave-function right-hand side, point by point.

    The right-hand side is evaluated at each point's time.  Points where the
    metric is degenerate or singular are flagged; if every point fails,
    FieldEquationFailure carries the report.
    """
    geo = geometry or Geometry(g)
    einstein = None
    try:
        einstein = geo.einstein()
    except DegenerateMetric as exc:
        degenerate = f"DegenerateMetric(rank {exc.rank})"
    tname = w.chart.coords[w.chart.time_index] if w.chart.time_index is not None else None
    rhs_cache = {}
    results, errors, psi_norm = [], [], 0.0
    for pt in points:
        if einstein is None:
            results.append(PointResult(dict(pt), None, None, None, degenerate))
            continue
        t0 = float(pt.get(tname, 0.0)) if tname else 0.0
        if t0 not in rhs_cache:
            rhs_cache[t0] = field_equation_rhs_detail(w, p, t0, order)
        rhs = rhs_cache[t0]
        errors = rhs.errors
        psi_norm = rhs.psi_norm
        n = g.dim
        lhs = np.zeros((n, n))
        b = g.binding(pt)
        try:
            for m in range(n):
                for k in range(m, n):
                    v = evaluate(einstein[m, k], b)
                    lhs[m, k] = lhs[k, m] = v.real
        except PoleError as exc:
            results.append(PointResult(dict(pt), None, rhs.matrix, None, f"pole: {exc.reason}"))
            continue
        results.append(PointResult(dict(pt), lhs, rhs.matrix, float(np.max(np.abs(lhs - rhs.matrix)))))
    report = FieldEquationReport(results, p.as_dict(), list(errors), psi_norm)
    if points and not report.ok_points:
        raise FieldEquationFailure(report)
    return report
