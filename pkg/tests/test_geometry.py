import numpy as np
import pytest
import sympy as sp

from qgrav.frw import frw_metric
from qgrav.geometry import (
    DegenerateMetric,
    Geometry,
    covariant_divergence_einstein,
    einstein_tensor,
    riemann,
    scalar_curvature,
)
from qgrav.qmetric import MetricTensor, build_metric, spatial_chart
from qgrav.symexpr import ONE, ZERO, equivalent, evaluate, parse

from oracle import sympy_curvature

RNG = np.random.default_rng(3)


def test_two_sphere_curvature():
    ch = spatial_chart(("theta", "phi"), {"theta": (0.2, 2.9)})
    g = MetricTensor.diagonal(ch, [parse("a^2"), parse("a^2*sin(theta)^2")], {"a": 1.7})
    R = scalar_curvature(g)
    assert equivalent(R, parse("2/a^2"), fixed={"a": 1.7})
    assert equivalent(riemann(g)[0, 1, 0, 1], parse("sin(theta)^2"))


def test_flat_space_in_spherical_coordinates():
    ch = spatial_chart(("r", "theta", "phi"))
    g = MetricTensor.diagonal(ch, [ONE, parse("r^2"), parse("r^2*sin(theta)^2")])
    assert riemann(g).nonzero() == {}


def test_schwarzschild_is_ricci_flat():
    ch = spatial_chart(("r", "theta", "phi", "t"), {"r": (3.0, 9.0)})
    f = "(1 - 2*M/r)"
    g = MetricTensor.diagonal(ch, [parse(f"1/{f}"), parse("r^2"), parse("r^2*sin(theta)^2"), parse(f"-{f}")], {"M": 1.0})
    geo = Geometry(g)
    assert geo.ricci().nonzero() == {}
    assert geo.scalar_curvature() == ZERO


@pytest.mark.parametrize("k", [-1, 0, 1])
def test_static_frw_scalar_curvature(k):
    g = frw_metric("S0", str(k), params={"S0": 1.3})
    assert equivalent(scalar_curvature(g), parse(f"6*({k})/S0^2"), fixed={"S0": 1.3, "c": 1.0},
                      domain={"r": (0.05, 0.6)})


def _frw_sympy(k):
    r, th, ph, t = sp.symbols("r theta phi t", positive=True)
    S = t**2
    gm = sp.diag(S**2 / (1 - k * r**2), S**2 * r**2, S**2 * r**2 * sp.sin(th) ** 2, -1)
    R, G = sympy_curvature(gm, (r, th, ph, t))
    return (r, th, ph, t), R, G


@pytest.mark.parametrize("k", [-1, 0, 1])
def test_expanding_frw_against_sympy(k):
    coords, R_ref, G_ref = _frw_sympy(k)
    g = frw_metric("t^2", str(k))
    geo = Geometry(g)
    R = geo.scalar_curvature()
    G = geo.einstein()
    fR = sp.lambdify(coords, R_ref)
    fG = sp.lambdify(coords, G_ref)
    for _ in range(20):
        p = {"r": RNG.uniform(0.05, 0.7), "theta": RNG.uniform(0.2, 2.9), "phi": RNG.uniform(0, 6), "t": RNG.uniform(0.3, 2)}
        args = [p[n] for n in ("r", "theta", "phi", "t")]
        b = g.binding(p)
        assert abs(evaluate(R, b) - fR(*args)) < 1e-9 * (1 + abs(fR(*args)))
        ref = np.array(fG(*args), dtype=float)
        for m in range(4):
            for n in range(4):
                assert abs(evaluate(G[m, n], b) - ref[m, n]) < 1e-9 * (1 + abs(ref[m, n]))


def test_flat_expanding_tt_component():
    G = einstein_tensor(frw_metric("t^2", "0"))
    assert abs(evaluate(G[3, 3], {"t": 1.0, "c": 1.0}) - 12.0) < 1e-12
    assert equivalent(G[3, 3], parse("12/t^2"), fixed={"c": 1.0})


@pytest.mark.parametrize("k", [-1, 0, 1])
def test_bianchi_identity(k):
    g = frw_metric("t^2", str(k))
    pts = [{"r": RNG.uniform(0.05, 0.7), "theta": RNG.uniform(0.2, 2.9), "phi": RNG.uniform(0, 6), "t": RNG.uniform(0.3, 2)}
           for _ in range(20)]
    res = covariant_divergence_einstein(g, pts)
    assert all(f is None for f in res.flags)
    assert res.max_norm < 1e-6


def test_degenerate_quantum_metric_is_rejected(h1s, h2p):
    with pytest.raises(DegenerateMetric) as info:
        Geometry(build_metric(h1s)).inverse()
    assert info.value.rank == 2
    with pytest.raises(DegenerateMetric):
        Geometry(build_metric(h2p)).christoffel()


def test_stages_are_cached():
    geo = Geometry(frw_metric("t", "0"))
    assert geo.christoffel() is geo.christoffel()
    assert geo.ricci() is geo.ricci()


def test_metric_inverse_product():
    g = frw_metric("t^2", "1")
    geo = Geometry(g)
    inv = geo.inverse()
    p = {"r": 0.4, "theta": 1.0, "phi": 2.0, "t": 1.5, "c": 1.0}
    a = np.array([[evaluate(g[m, n], p).real for n in range(4)] for m in range(4)])
    b = np.array([[evaluate(inv[m, n], p).real for n in range(4)] for m in range(4)])
    assert np.allclose(a @ b, np.eye(4), atol=1e-12)
