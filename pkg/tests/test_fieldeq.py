import math

import numpy as np
import pytest

from qgrav.fieldeq import (
    FieldEquationFailure,
    PhysicalParams,
    classical_stress_energy,
    field_equation_residual,
    field_equation_rhs,
    field_equation_rhs_detail,
    inner_product,
    load_si_constants,
    parse_key_values,
    velocity_product,
)
from qgrav.frw import frw_metric
from qgrav.qmetric import build_metric


def test_params_validation():
    with pytest.raises(ValueError):
        PhysicalParams(m=0.0)
    with pytest.raises(ValueError):
        PhysicalParams(units="cgs")


def test_si_constants():
    c = load_si_constants()
    assert c["c"] == 299792458.0
    assert abs(c["hbar"] - 1.054571817e-34) < 1e-43
    assert PhysicalParams.si().units == "SI"


def test_key_value_parser():
    assert parse_key_values("a = 1  # note\n\nb=2.5e3\n") == {"a": 1.0, "b": 2500.0}
    with pytest.raises(ValueError):
        parse_key_values("oops")


def test_inner_products(h1s, h1s_normalized):
    assert abs(inner_product(h1s.psi, h1s.psi, h1s) - math.pi) < 1e-10
    assert abs(inner_product(h1s_normalized.psi, h1s_normalized.psi, h1s_normalized) - 1) < 1e-10


def test_rhs_radial_entry(h1s_normalized):
    m = field_equation_rhs(h1s_normalized, PhysicalParams())
    assert abs(m[0, 0] + 8 * math.pi) < 1e-10
    assert np.array_equal(m, m.T)
    assert m[1, 1] == 0.0 and not math.copysign(1, m[1, 1]) < 0


def test_rhs_order_and_hbar_scaling(h1s_normalized):
    p = PhysicalParams()
    a = field_equation_rhs(h1s_normalized, p, order=32)
    b = field_equation_rhs(h1s_normalized, p, order=64)
    assert np.max(np.abs(a - b)) < 1e-10
    c = field_equation_rhs(h1s_normalized, PhysicalParams(hbar=2.0))
    assert np.max(np.abs(c - 4 * a)) < 1e-12 * np.max(np.abs(a))


def test_rhs_unrooted_and_pointwise(h1s_normalized):
    p = PhysicalParams()
    assert abs(field_equation_rhs(h1s_normalized, p, rooted=False)[0, 0] + 8 * math.pi) < 1e-10
    pt = {"r": 1.0, "theta": 1.0, "phi": 0.0, "t": 0.0}
    d = field_equation_rhs_detail(h1s_normalized, p, pointwise=pt)
    assert abs(d.psi_norm - math.exp(-2) / math.pi) < 1e-14
    assert abs(d.matrix[0, 0] + 8 * math.pi * math.exp(-2) / math.pi) < 1e-12


def test_velocity_product(h1s_normalized):
    assert abs(velocity_product(h1s_normalized, 0, 0, PhysicalParams(m=2.0)) - 0.25) < 1e-10


def test_classical_dust():
    t = classical_stress_energy(2.0, 3.0)
    assert t[3, 3] == 18.0 and np.count_nonzero(t) == 1
    moving = classical_stress_energy(2.0, 3.0, (1.0, 0.0, 0.0))
    assert moving[0, 3] == 6.0 and moving[0, 0] == 2.0


def test_residual_on_degenerate_metric(h1s):
    with pytest.raises(FieldEquationFailure) as info:
        field_equation_residual(build_metric(h1s), h1s, PhysicalParams(), [{"r": 1, "theta": 1, "phi": 0, "t": 0}])
    assert "DegenerateMetric" in info.value.report.points[0].flag


def test_residual_against_template(h1s_normalized):
    g = frw_metric("t^2", "0")
    pts = [{"r": 0.5, "theta": 1.0, "phi": 0.2, "t": 1.0}]
    rep = field_equation_residual(g, h1s_normalized, PhysicalParams(), pts)
    res = rep.points[0]
    assert res.flag is None
    assert abs(res.lhs[3, 3] - 12.0) < 1e-12
    assert res.residual_max == pytest.approx(np.max(np.abs(res.lhs - res.rhs)))
    assert rep.psi_norm == pytest.approx(1.0, abs=1e-10)
