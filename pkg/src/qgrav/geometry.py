"""Levi-Civita tensor calculus over a symbolic metric (dimension 2 to 4)."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .qmetric import MetricTensor, matrix_rank, metric_at
from .symexpr import ZERO, add, differentiate, evaluate, lambdify, mul, power, simplify
from .symexpr.evaluate import PoleError


class DegenerateMetric(ArithmeticError):
    """The metric determinant vanishes identically."""

    def __init__(self, rank, dim, nullspace=None):
        self.rank = rank
        self.dim = dim
        self.nullspace = nullspace
        super().__init__(f"degenerate metric: rank {rank} < {dim}")


@dataclass
class TensorField:
    chart: object
    variance: tuple  # "u" / "d" per slot
    comps: dict = field(default_factory=dict)

    def __getitem__(self, idx):
        return self.comps.get(tuple(idx), ZERO)

    def nonzero(self):
        return {k: v for k, v in sorted(self.comps.items()) if v != ZERO}


def determinant(m):
    """Cofactor expansion; fine for n <= 4."""
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return add(mul(m[0][0], m[1][1]), mul(-1, m[0][1], m[1][0]))
    terms = []
    for j in range(n):
        if m[0][j] == ZERO:
            continue
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        terms.append(mul((-1) ** j, m[0][j], determinant(minor)))
    return add(*terms)


def _sample_points(g, count, seed):
    rng = np.random.default_rng(seed)
    names = list(g.chart.coords)
    pts = []
    for _ in range(count):
        pts.append({n: float(rng.uniform(*g.chart.domain(n))) for n in names})
    return pts


class Geometry:
    """Cached curvature chain for one metric.

    Each stage (inverse, Christoffel, Riemann, Ricci, scalar, Einstein) is
    computed on first use and simplified unless ``simplify_stages`` is off.
    """

    def __init__(self, g: MetricTensor, simplify_stages=True, seed=7):
        self.g = g
        self.n = g.dim
        self.coords = g.chart.coords
        self._simp = simplify_stages
        self._seed = seed
        self._cache = {}

    def _s(self, e):
        return simplify(e) if self._simp else e

    def _once(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    # -- inverse -----------------------------------------------------------

    def det(self):
        return self._once("det", lambda: self._s(determinant(self.g.matrix())))

    def check_invertible(self, samples=12):
        """Raise DegenerateMetric unless the determinant is clearly nonzero somewhere.

        "Clearly" means above 1e-10 of the Hadamard bound of the sampled matrix.
        """
        g = self.g
        d = self.det()
        pts = _sample_points(g, samples, self._seed)
        if d != ZERO:
            for p in pts:
                try:
                    a = metric_at(g, p)
                    val = evaluate(d, g.binding(p))
                except (PoleError, RuntimeError):
                    continue
                bound = float(np.prod(np.linalg.norm(a, axis=1)))
                if abs(val) > 1e-10 * bound:
                    return
        for p in pts:
            try:
                rr = matrix_rank(metric_at(g, p))
            except (PoleError, RuntimeError):
                continue
            raise DegenerateMetric(rr.rank, self.n, rr.nullspace)
        raise DegenerateMetric(0, self.n)

    def inverse(self) -> TensorField:
        def build():
            self.check_invertible()
            m = self.g.matrix()
            n = self.n
            inv_det = power(self.det(), -1)
            comps = {}
            for i in range(n):
                for j in range(i, n):
                    minor = [row[:i] + row[i + 1 :] for k, row in enumerate(m) if k != j]
                    cof = mul((-1) ** (i + j), determinant(minor)) if n > 1 else 1
                    comps[(i, j)] = comps[(j, i)] = self._s(mul(cof, inv_det))
            return TensorField(self.g.chart, ("u", "u"), comps)

        return self._once("inverse", build)

    # -- connection and curvature -----------------------------------------

    def metric_derivs(self):
        def build():
            out = {}
            for s, name in enumerate(self.coords):
                for i in range(self.n):
                    for j in range(i, self.n):
                        out[(s, i, j)] = out[(s, j, i)] = differentiate(self.g[i, j], name)
            return out

        return self._once("dg", build)

    def christoffel(self) -> TensorField:
        def build():
            ginv = self.inverse()
            dg = self.metric_derivs()
            n = self.n
            comps = {}
            for lam in range(n):
                for mu in range(n):
                    for nu in range(mu, n):
                        terms = []
                        for sg in range(n):
                            gi = ginv[lam, sg]
                            if gi == ZERO:
                                continue
                            inner = add(dg[(mu, sg, nu)], dg[(nu, sg, mu)], mul(-1, dg[(sg, mu, nu)]))
                            if inner != ZERO:
                                terms.append(mul(gi, inner))
                        v = self._s(mul(_HALF, add(*terms)))
                        comps[(lam, mu, nu)] = comps[(lam, nu, mu)] = v
            return TensorField(self.g.chart, ("u", "d", "d"), comps)

        return self._once("christoffel", build)

    def riemann(self) -> TensorField:
        """Mixed form R^rho_{sigma mu nu}."""

        def build():
            gam = self.christoffel()
            n = self.n
            dgam = {}

            def dG(mu, rho, nu, sg):
                key = (mu, rho, nu, sg)
                if key not in dgam:
                    dgam[key] = differentiate(gam[rho, nu, sg], self.coords[mu])
                return dgam[key]

            comps = {}
            for rho in range(n):
                for sg in range(n):
                    for mu in range(n):
                        for nu in range(mu + 1, n):
                            terms = [dG(mu, rho, nu, sg), mul(-1, dG(nu, rho, mu, sg))]
                            for lam in range(n):
                                terms.append(mul(gam[rho, mu, lam], gam[lam, nu, sg]))
                                terms.append(mul(-1, gam[rho, nu, lam], gam[lam, mu, sg]))
                            v = self._s(add(*terms))
                            comps[(rho, sg, mu, nu)] = v
                            comps[(rho, sg, nu, mu)] = mul(-1, v)
            return TensorField(self.g.chart, ("u", "d", "d", "d"), comps)

        return self._once("riemann", build)

    def riemann_lower(self) -> TensorField:
        """All-lower R_{rho sigma mu nu} = g_{rho a} R^a_{sigma mu nu}."""

        def build():
            rie = self.riemann()
            n = self.n
            comps = {}
            for idx in itertools.product(range(n), repeat=4):
                rho, sg, mu, nu = idx
                terms = [mul(self.g[rho, a], rie[a, sg, mu, nu]) for a in range(n) if self.g[rho, a] != ZERO]
                comps[idx] = self._s(add(*terms))
            return TensorField(self.g.chart, ("d", "d", "d", "d"), comps)

        return self._once("riemann_lower", build)

    def ricci(self) -> TensorField:
        def build():
            rie = self.riemann()
            n = self.n
            comps = {}
            for mu in range(n):
                for nu in range(mu, n):
                    v = self._s(add(*[rie[lam, mu, lam, nu] for lam in range(n)]))
                    comps[(mu, nu)] = comps[(nu, mu)] = v
            return TensorField(self.g.chart, ("d", "d"), comps)

        return self._once("ricci", build)

    def scalar_curvature(self):
        def build():
            ginv = self.inverse()
            ric = self.ricci()
            n = self.n
            terms = [mul(ginv[m, k], ric[m, k]) for m in range(n) for k in range(n) if ginv[m, k] != ZERO]
            return self._s(add(*terms))

        return self._once("scalar", build)

    def einstein(self) -> TensorField:
        def build():
            ric = self.ricci()
            r = self.scalar_curvature()
            n = self.n
            comps = {}
            for mu in range(n):
                for nu in range(mu, n):
                    v = self._s(add(ric[mu, nu], mul(-1, _HALF, r, self.g[mu, nu])))
                    comps[(mu, nu)] = comps[(nu, mu)] = v
            return TensorField(self.g.chart, ("d", "d"), comps)

        return self._once("einstein", build)

    def einstein_upper(self) -> TensorField:
        def build():
            ginv = self.inverse()
            gl = self.einstein()
            n = self.n
            comps = {}
            for mu in range(n):
                for nu in range(mu, n):
                    terms = []
                    for a in range(n):
                        if ginv[mu, a] == ZERO:
                            continue
                        for b in range(n):
                            if ginv[nu, b] != ZERO and gl[a, b] != ZERO:
                                terms.append(mul(ginv[mu, a], ginv[nu, b], gl[a, b]))
                    v = self._s(add(*terms))
                    comps[(mu, nu)] = comps[(nu, mu)] = v
            return TensorField(self.g.chart, ("u", "u"), comps)

        return self._once("einstein_upper", build)

    def einstein_divergence(self):
        """Symbolic vector nabla_mu G^{mu nu} (not simplified)."""

        def build():
            gu = self.einstein_upper()
            gam = self.christoffel()
            n = self.n
            out = []
            for nu in range(n):
                terms = []
                for mu in range(n):
                    terms.append(differentiate(gu[mu, nu], self.coords[mu]))
                    for lam in range(n):
                        terms.append(mul(gam[mu, mu, lam], gu[lam, nu]))
                        terms.append(mul(gam[nu, mu, lam], gu[mu, lam]))
                out.append(add(*terms))
            return out

        return self._once("divergence", build)


_HALF = power(2, -1)


def inverse_metric(g, simplify_stages=True):
    return Geometry(g, simplify_stages).inverse()


def christoffel(g, simplify_stages=True):
    return Geometry(g, simplify_stages).christoffel()


def riemann(g, simplify_stages=True):
    return Geometry(g, simplify_stages).riemann()


def ricci(g, simplify_stages=True):
    return Geometry(g, simplify_stages).ricci()


def scalar_curvature(g, simplify_stages=True):
    return Geometry(g, simplify_stages).scalar_curvature()


def einstein_tensor(g, simplify_stages=True):
    return Geometry(g, simplify_stages).einstein()


@dataclass
class DivergenceResult:
    norms: list  # max-norm per point; None where the point failed
    flags: list  # None or a reason string per point

    @property
    def max_norm(self):
        vals = [v for v in self.norms if v is not None]
        return max(vals) if vals else math.nan


def covariant_divergence_einstein(g, points, geometry=None) -> DivergenceResult:
    """Max-norm of nabla_mu G^{mu nu} at each point (contracted Bianchi check)."""
    geo = geometry or Geometry(g)
    try:
        vec = geo.einstein_divergence()
    except DegenerateMetric as exc:
        return DivergenceResult([None] * len(points), [str(exc)] * len(points))
    names = sorted(set(g.binding()) | set(g.chart.coords))
    fns = [lambdify(e, names) for e in vec]
    norms, flags = [], []
    for p in points:
        b = g.binding(p)
        args = [b[n] for n in names]
        vals = np.array([complex(f(*args)) for f in fns])
        if not np.all(np.isfinite(vals)):
            norms.append(None)
            flags.append("pole")
            continue
        norms.append(float(np.max(np.abs(vals))))
        flags.append(None)
    return DivergenceResult(norms, flags)
