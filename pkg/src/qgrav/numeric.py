"""Finite differences, adaptive product Gauss quadrature, pole scanning, grid export."""

from __future__ import annotations

import heapq
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .symexpr import Symbol, evaluate, free_symbols, func, lambdify, sympify

# ---------------------------------------------------------------------------
# finite differences


def finite_diff(e, s, point, h=1e-5, richardson=False) -> complex:
    """Central difference of ``e`` in symbol ``s`` at ``point``.

    Poles at a stencil point raise PoleError.  With ``richardson`` the h and
    h/2 estimates are combined to cancel the O(h^2) term.
    """
    name = getattr(s, "name", s)
    x0 = float(point[name])

    def central(step):
        hi = dict(point)
        lo = dict(point)
        hi[name] = x0 + step
        lo[name] = x0 - step
        return (evaluate(e, hi) - evaluate(e, lo)) / (2 * step)

    if not richardson:
        return central(h)
    return (4 * central(h / 2) - central(h)) / 3


# ---------------------------------------------------------------------------
# quadrature


class NonConvergent(ArithmeticError):
    def __init__(self, value, error, boxes):
        self.value = value
        self.error = error
        self.boxes = boxes
        super().__init__(f"quadrature did not converge: value {value!r}, error estimate {error!r} after {boxes} boxes")


@dataclass
class QuadratureResult:
    value: float
    error: float
    levels: int
    boxes: int
    tail: float = 0.0
    imag: float = 0.0


@dataclass
class SphericalDomain:
    r: tuple = (0.0, 40.0)
    theta: tuple = (0.0, math.pi)
    phi: tuple = (0.0, 2 * math.pi)
    names: tuple = ("r", "theta", "phi")


_GL_CACHE = {}


def _gauss(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _box_rule(fn, box, orders):
    """Tensor Gauss-Legendre rule on a box with per-dimension orders."""
    axes, weights = [], []
    for (a, b), n in zip(box, orders):
        x, w = _gauss(n)
        half = 0.5 * (b - a)
        axes.append(a + half * (x + 1))
        weights.append(w * half)
    grids = np.meshgrid(*axes, indexing="ij")
    vals = fn(*grids)
    w = weights[0][:, None, None] * weights[1][None, :, None] * weights[2][None, None, :]
    return np.sum(vals * w), np.sum(np.abs(vals) * w)


def quadrature(f, domain=None, params=None, order=32, tol=1e-10, rel_tol=1e-10, max_boxes=400, jacobian=False):
    """Adaptive integral of ``f`` over a spherical box in (r, theta, phi).

    Each box is integrated with an ``order``-point product Gauss rule; the
    error estimate is the difference to rules of half order in each
    dimension, and the worst box is bisected along its worst dimension.
    ``jacobian`` multiplies the integrand by r^2 sin(theta).
    """
    domain = domain or SphericalDomain()
    params = dict(params or {})
    e = sympify(f)
    if jacobian:
        e = e * sympify("r") ** 2 * _sin(domain.names[1])
    names = list(domain.names)
    extra = sorted(free_symbols(e) - set(names))
    missing = [n for n in extra if n not in params]
    if missing:
        raise ValueError("unbound symbols in integrand: " + ", ".join(missing))
    compiled = lambdify(e, names + extra)
    fixed = [params[n] for n in extra]

    def fn(*grids):
        return compiled(*grids, *fixed)

    lo = order // 2

    def process(box):
        full, absval = _box_rule(fn, box, (order,) * 3)
        errs = []
        for d in range(3):
            orders = [order] * 3
            orders[d] = lo
            coarse, _ = _box_rule(fn, box, orders)
            errs.append(abs(full - coarse))
        floor = 50 * np.finfo(float).eps * absval
        err = max(errs) + floor
        return full, err, int(np.argmax(errs))

    boxes = {}
    heap = []
    counter = 0

    def push(box, level):
        nonlocal counter
        val, err, dim = process(box)
        boxes[counter] = (box, val, err, dim, level)
        heapq.heappush(heap, (-err, counter))
        counter += 1

    push((domain.r, domain.theta, domain.phi), 0)
    while True:
        keys = sorted(boxes)
        total = complex(math.fsum(boxes[k][1].real for k in keys), math.fsum(boxes[k][1].imag for k in keys))
        err = math.fsum(boxes[k][2] for k in keys)
        levels = max(boxes[k][4] for k in keys)
        if not np.isfinite(total):
            raise NonConvergent(total, math.inf, len(boxes))
        if err <= max(tol, rel_tol * abs(total)):
            return QuadratureResult(total.real, err, levels, len(boxes), imag=total.imag)
        if len(boxes) >= max_boxes:
            raise NonConvergent(total.real, err, len(boxes))
        _, k = heapq.heappop(heap)
        box, _, _, dim, level = boxes.pop(k)
        a, b = box[dim]
        mid = 0.5 * (a + b)
        for half in ((a, mid), (mid, b)):
            child = list(box)
            child[dim] = half
            push(tuple(child), level + 1)


def _sin(name):
    return func("sin", Symbol(name))


# ---------------------------------------------------------------------------
# grids


@dataclass
class Axis:
    name: str
    min: float
    max: float
    count: int
    spacing: str = "linear"

    def validate(self):
        if not self.min < self.max:
            raise ValueError(f"axis {self.name}: min must be < max")
        if self.count < 2:
            raise ValueError(f"axis {self.name}: at least 2 samples required")
        if self.spacing not in ("linear", "log"):
            raise ValueError(f"axis {self.name}: spacing must be linear or log")
        if self.spacing == "log" and self.min <= 0:
            raise ValueError(f"axis {self.name}: log spacing requires min > 0")

    def values(self):
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


@dataclass
class GridSpec:
    axes: list
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.axes:
            raise ValueError("grid needs at least one axis")
        for a in self.axes:
            a.validate()
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate grid axis")

    @property
    def names(self):
        return [a.name for a in self.axes]

    def refined(self, factor=2):
        axes = [Axis(a.name, a.min, a.max, (a.count - 1) * factor + 1, a.spacing) for a in self.axes]
        return GridSpec(axes, dict(self.fixed))


def _compile(e, spec):
    names = spec.names
    extra = sorted(free_symbols(e) - set(names))
    missing = [n for n in extra if n not in spec.fixed]
    if missing:
        raise ValueError("grid does not bind: " + ", ".join(missing))
    f = lambdify(e, names + extra)
    fixed = [float(spec.fixed[n]) for n in extra]
    return lambda *arrays: f(*arrays, *fixed)


@dataclass
class GridTable:
    columns: list
    rows: list  # tuples; value cells are None at poles

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join("" if v is None else format(v, ".17g") for v in row) + "\n")
        return buf.getvalue()


def grid_eval(e, spec: GridSpec) -> GridTable:
    """Row-major table of (coordinates..., value); non-finite values become None.

    A complex-valued expression gets separate real and imaginary columns.
    """
    e = sympify(e)
    f = _compile(e, spec)
    axes = [a.values() for a in spec.axes]
    grids = np.meshgrid(*axes, indexing="ij")
    vals = f(*grids).reshape(-1)
    coords = [g.reshape(-1) for g in grids]
    finite = np.isfinite(vals)
    complex_out = bool(np.any(np.abs(vals.imag[finite]) > 1e-12 * (1 + np.abs(vals.real[finite]))))
    cols = spec.names + (["value_re", "value_im"] if complex_out else ["value"])
    rows = []
    for k in range(vals.size):
        pos = tuple(float(c[k]) for c in coords)
        if not finite[k]:
            rows.append(pos + ((None, None) if complex_out else (None,)))
        elif complex_out:
            rows.append(pos + (float(vals[k].real), float(vals[k].imag)))
        else:
            rows.append(pos + (float(vals[k].real),))
    return GridTable(cols, rows)


# ---------------------------------------------------------------------------
# singular-locus scan


@dataclass
class Candidate:
    axis: str
    position: float
    value: float
    at_edge: bool
    lines: int = 1
    spread: float = 0.0


def _golden_max(g, a, b, width):
    """Locate the maximum of a unimodal ``g`` on [a, b]; non-finite counts as +inf."""
    inv = (math.sqrt(5) - 1) / 2
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = g(c), g(d)
    while b - a > width:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = g(d)
    return 0.5 * (a + b)


def scan_singular_candidates(e, spec: GridSpec, threshold=1e6, growth=4.0, edges=True):
    """Find loci where ``|e|`` blows up, one axis at a time.

    Along every grid line, each local maximum of ``|e|`` is bracketed by its
    neighbours and refined by golden-section search.  An interior candidate
    is kept when the refined value exceeds ``threshold`` and is at least
    ``growth`` times the coarse sample.  Maxima on the boundary cannot be
    refined past the edge; they are kept (``at_edge``) when ``|e|`` grows by
    ``growth`` over the last two grid steps.  Candidates are clustered per
    axis by position.
    """
    e = sympify(e)
    f = _compile(e, spec)
    axes = [a.values() for a in spec.axes]
    found = []
    for d, axis in enumerate(spec.axes):
        xs = axes[d]
        width = (axis.max - axis.min) / 2**34
        span = (axis.max - axis.min) / 16
        others = [k for k in range(len(axes)) if k != d]
        for idx in np.ndindex(*[len(axes[k]) for k in others]):
            fixed = {k: axes[k][i] for k, i in zip(others, idx)}

            def line(x, fixed=fixed):
                args = [np.asarray(x, dtype=float) if k == d else fixed[k] for k in range(len(axes))]
                with np.errstate(all="ignore"):
                    v = np.abs(f(*args))
                return np.where(np.isfinite(v), v, np.inf)

            vals = line(xs)
            n = len(xs)
            for i in range(n):
                left = vals[i - 1] if i > 0 else -1.0
                right = vals[i + 1] if i < n - 1 else -1.0
                if not (vals[i] >= left and vals[i] >= right) or vals[i] == 0:
                    continue
                if 0 < i < n - 1:
                    if left == vals[i] and i > 1:
                        continue  # plateau, keep the first sample only
                    pos = _golden_max(lambda x: float(line(x)), xs[i - 1], xs[i + 1], width)
                    peak = float(line(pos))
                    if peak >= threshold and peak >= growth * vals[i]:
                        found.append(Candidate(axis.name, float(pos), peak, False))
                elif edges:
                    step = span if i == 0 else -span
                    inner = float(line(xs[i] + step))
                    if vals[i] >= growth * inner and vals[i] > (right if i == 0 else left):
                        found.append(Candidate(axis.name, float(xs[i]), float(vals[i]), True))
    return _cluster(found, spec)


def _cluster(found, spec):
    out = []
    for axis in spec.axes:
        tol = 1e-4 * (axis.max - axis.min)
        pts = sorted((c for c in found if c.axis == axis.name), key=lambda c: c.position)
        group = []
        for c in pts + [None]:
            if c is not None and (not group or (c.position - group[-1].position <= tol and c.at_edge == group[0].at_edge)):
                group.append(c)
                continue
            if group:
                ps = np.array([g.position for g in group])
                out.append(
                    Candidate(
                        axis.name,
                        float(np.median(ps)),
                        max(g.value for g in group),
                        group[0].at_edge,
                        len(group),
                        float(ps.max() - ps.min()),
                    )
                )
            group = [c] if c is not None else []
    return out
