import math

import numpy as np
import pytest

from qgrav.numeric import finite_diff
from qgrav.qmetric import (
    POLAR,
    Chart,
    MetricTensor,
    WaveFunction,
    build_metric,
    line_element,
    matrix_rank,
    metric_at,
    rank_at,
)
from qgrav.symexpr import ONE, equivalent, evaluate, free_symbols, parse, simplify

RNG = np.random.default_rng(5)


def test_chart_validation():
    with pytest.raises(ValueError):
        Chart(coords=("r", "r", "phi", "t"))
    with pytest.raises(ValueError):
        Chart(signature=(1, 1, -1))


def test_wavefunction_rejects_unbound_symbols():
    with pytest.raises(ValueError):
        WaveFunction(parse("q*r"), POLAR, {})


def test_2p_radial_and_polar_components(h2p):
    g = build_metric(h2p)
    want_rr = parse("C1^2*sin(theta)^2*cos(phi)^2*(1 - r/(2*a0))^2*exp(-r/a0)*cos(2*omega0*t)")
    want_tt = parse("C1^2*r^2*cos(theta)^2*cos(phi)^2*exp(-r/a0)*cos(2*omega0*t)")
    assert equivalent(g[0, 0], want_rr, trials=100)
    assert equivalent(g[1, 1], want_tt, trials=100)
    # the printed form of the remaining diagonal entries
    assert equivalent(g[2, 2], parse("C1^2*r^2*sin(theta)^2*sin(phi)^2*exp(-r/a0)*cos(2*omega0*t)"))
    assert equivalent(g[3, 3], parse("-C1^2*omega0^2*r^2*sin(theta)^2*cos(phi)^2*exp(-r/a0)*cos(2*omega0*t)"))


def test_1s_has_no_angular_components(h1s):
    g = build_metric(h1s)
    assert g[1, 1] == parse("0") and g[2, 2] == parse("0")


def test_symmetry_is_structural(h2p):
    g = build_metric(h2p)
    for m in range(4):
        for n in range(4):
            assert g[m, n] is g[n, m]


def test_conventions_agree_for_real_psi():
    w = WaveFunction(parse("C*r*sin(theta)*exp(-r)*cos(omega0*t)"), POLAR, {"C": 1.0, "omega0": 1.0})
    a = build_metric(w, "unconjugated")
    b = build_metric(w, "conjugated")
    assert a.components() == b.components()


def test_every_component_carries_the_time_factor(h2p):
    g = build_metric(h2p)
    factor = parse("cos(2*omega0*t)")
    p = {"r": 1.3, "theta": 0.7, "phi": 0.4, "t": math.pi / 4}
    for v in g.components().values():
        assert abs(evaluate(v, g.binding(p))) < 1e-14
        reduced = simplify(v / factor)
        assert "t" not in free_symbols(reduced)
        assert equivalent(v, reduced * factor)


def test_literal_time_derivative_option(h2p):
    g = build_metric(h2p, wick=False)
    # space-time entries switch to sin(2 omega t); space-space ones are unchanged
    assert equivalent(g[0, 3], parse("C1^2*omega0*r*sin(theta)^2*cos(phi)^2*(1 - r/(2*a0))*exp(-r/a0)*sin(2*omega0*t)"))
    assert g[0, 0] == build_metric(h2p)[0, 0]


def _fd_component(w, m, n, p, wick=True):
    names = POLAR.coords
    b = w.binding()
    b.update(p)
    dm = finite_diff(w.psi, names[m], b)
    dn = finite_diff(w.psi, names[n], b)
    eps = {3: 1j if wick else 1.0}
    val = (eps.get(m, 1.0) * eps.get(n, 1.0) * dm * dn).real
    return -val if 3 in (m, n) else val


@pytest.mark.parametrize("name", ["h1s", "h2p"])
def test_components_match_finite_differences(name, request):
    w = request.getfixturevalue(name)
    g = build_metric(w)
    for _ in range(50):
        p = {"r": RNG.uniform(0.2, 3), "theta": RNG.uniform(0.1, 3), "phi": RNG.uniform(0, 6), "t": RNG.uniform(0, 2)}
        for m in range(4):
            for n in range(m, 4):
                got = evaluate(g[m, n], g.binding(p)).real
                want = _fd_component(w, m, n, p)
                assert abs(got - want) <= 1e-6 * (abs(want) + 1e-3), (m, n, p)


def test_line_element_rendering():
    flat = MetricTensor.diagonal(POLAR, [ONE, parse("r^2"), parse("r^2*sin(theta)^2"), parse("-c^2")])
    assert str(line_element(flat)) == "ds² = dr² + r²dθ² + r²sin²θdφ² − c²dt²"
    assert str(line_element(MetricTensor(POLAR, {}))) == "ds² = 0"


def test_line_element_reports_cross_terms(h2p):
    le = line_element(build_metric(h2p))
    assert len(le.diagonal) == 4
    assert len(le.cross) == 6
    assert "dr dθ" in le.text and "dr dθ" not in le.diagonal_text


def test_metric_at_examples(h1s, h2p):
    a = metric_at(build_metric(h1s), {"r": 1, "theta": math.pi / 2, "phi": 0, "t": 0})
    assert abs(a[0, 0] - math.exp(-2)) < 1e-15
    assert a[1, 1] == 0 and a[2, 2] == 0
    b = metric_at(build_metric(h2p), {"r": 1.1, "theta": 0.8, "phi": 0.3, "t": math.pi / 4})
    assert np.max(np.abs(b)) < 1e-15


def test_rank_against_svd(h1s, h2p):
    assert rank_at(build_metric(h1s), {"r": 0.9, "theta": 1, "phi": 2, "t": 0.3}).rank == 2
    g = build_metric(h2p)
    p = {"r": 1, "theta": math.pi / 2, "phi": 0, "t": 0}
    res = rank_at(g, p)
    a = metric_at(g, p)
    s = np.linalg.svd(a, compute_uv=False)
    assert res.rank == int(np.sum(s > 1e-10 * s[0]))
    assert np.max(np.abs(a @ res.nullspace)) < 1e-12
    assert res.nullspace.shape == (4, 4 - res.rank)


def test_matrix_rank_random():
    for _ in range(20):
        k = RNG.integers(1, 5)
        u = RNG.normal(size=(4, k))
        a = u @ u.T
        res = matrix_rank(a)
        assert res.rank == np.linalg.matrix_rank(a)
        if res.nullspace.size:
            assert np.max(np.abs(a @ res.nullspace)) < 1e-9


def test_template_metric_at_and_rank():
    from qgrav.frw import frw_metric

    g = frw_metric("1", "0")
    a = metric_at(g, {"r": 2.0, "theta": math.pi / 2, "phi": 0.3, "t": 0.7})
    assert np.allclose(a, np.diag([1.0, 4.0, 4.0, -1.0]), atol=1e-15)
    assert rank_at(g, {"r": 0.7, "theta": 1.0, "phi": 0.3, "t": 0.7}).rank == 4
