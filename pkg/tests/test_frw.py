import math

import pytest

from qgrav.frw import NoRadialComponent, classify_singularities, decompose, extract_k, frw_metric
from qgrav.qmetric import build_metric
from qgrav.symexpr import ZERO, equivalent, evaluate, parse, to_str

K_REF = parse("(1/r^2)*(1 - cot(theta)^2/(1 - r/(2*a0))^2)")
K_DOMAIN = {"r": [(0.1, 1.9), (2.1, 5.0)], "theta": (0.1, math.pi - 0.1)}


def test_template_components():
    g = frw_metric("t^2", "k0", params={"k0": 1.0})
    assert g.is_diagonal()
    assert g[3, 3] == parse("-c^2")
    assert equivalent(g[0, 0], parse("t^4/(1 - k0*r^2)"), fixed={"k0": 0.5}, domain={"r": (0.1, 1.0)})


def test_scale_factor_must_be_time_only():
    with pytest.raises(ValueError):
        frw_metric("r*t", "0")


def test_extracted_k_matches_closed_form(h2p):
    k = extract_k(h2p)
    v = equivalent(k, K_REF, domain=K_DOMAIN, trials=200, fixed={"a0": 1.0})
    assert v, v.counterexample
    assert to_str(k) == to_str(K_REF)


def test_k_value_at_reference_point(h2p):
    k = extract_k(h2p)
    assert abs(evaluate(k, {"r": 1.0, "theta": math.pi / 4, "a0": 1.0}) + 3) < 1e-12


def test_conjugated_convention_gives_same_k(h2p):
    assert equivalent(extract_k(h2p, "conjugated"), K_REF, domain=K_DOMAIN, fixed={"a0": 1.0})


def test_decomposition_residuals(h2p):
    d = decompose(build_metric(h2p))
    want = parse("C1^2*cos(theta)^2*cos(phi)^2*exp(-r/a0)*cos(2*omega0*t)")
    assert equivalent(d.S_sq_from_theta, want)
    assert not equivalent(d.isotropy_residual, ZERO)
    assert d.tt_residual != ZERO
    assert len(d.offdiag_max) == 6
    s = d.as_strings()
    assert set(s) == {"S_sq_from_theta", "S_sq_from_phi", "k_expr", "tt_residual", "isotropy_residual", "offdiag_max"}


def test_no_radial_component():
    from qgrav.qmetric import POLAR, MetricTensor

    with pytest.raises(NoRadialComponent):
        decompose(MetricTensor.diagonal(POLAR, [ZERO, parse("r^2"), parse("r^2"), parse("-c^2")]))


@pytest.mark.parametrize(
    "S, k",
    [("t^2", "1"), ("t", "-1"), ("exp(t)", "0"), ("2*t^3", "1/2"), ("1 + t^2", "-2")],
)
def test_round_trip(S, k):
    d = decompose(frw_metric(S, k))
    assert equivalent(d.k_expr, parse(k), domain={"r": (0.05, 0.5)}, fixed={"c": 1.0})
    assert equivalent(d.S_sq_from_theta, parse(f"({S})^2"))
    assert equivalent(d.S_sq_from_phi, parse(f"({S})^2"))
    assert d.tt_residual == ZERO
    assert d.isotropy_residual == ZERO


def test_singularity_classification():
    rep = classify_singularities(K_REF, params={"a0": 1.0})
    assert rep.labels() == {"r=0": "coordinate", "theta=0": "coordinate", "r=2*a0": "physical"}
    phys = [l for l in rep.loci if l.classification == "physical"][0]
    assert abs(phys.numeric_position - 2.0) < 1e-6
    for locus in rep.loci:
        assert locus.evidence and locus.diverges
    th = [l for l in rep.loci if l.symbol == "theta"][0]
    assert [evaluate(v).real for v in th.values] == pytest.approx([0.0, math.pi])


def test_singularity_scales_with_a0():
    rep = classify_singularities(K_REF, params={"a0": 0.7})
    phys = [l for l in rep.loci if l.classification == "physical"][0]
    assert abs(phys.witness["r"] - 1.4) < 1e-12
    assert abs(phys.numeric_position - 1.4) < 1e-6


def test_smooth_field_has_no_loci():
    rep = classify_singularities(parse("r^2 + cos(theta)"))
    assert rep.loci == []
