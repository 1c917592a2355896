import json

import pytest

from kahler_fedosov.coeff import chart_ring
from kahler_fedosov.geom import (
    BUILTIN_MODELS, ChartError, HolomorphicChart, KahlerChart, RealSymplecticChart, builtin_model,
    covariant_derivative_of_form, load_model, model_source, symplectic_connection, torsion,
)
from kahler_fedosov.weyl import Connection, WeylElement, bracket, nabla


def test_builtin_models_listed():
    assert BUILTIN_MODELS == ("flat-c1", "flat-c2", "cp1", "disk")


@pytest.mark.parametrize("name,gamma", [
    ("flat-c1", "0"),
    ("cp1", "-2*zb/(1+z*zb)"),
    ("disk", "2*zb/(1-z*zb)"),
])
def test_christoffel_symbol_is_log_derivative_of_metric(name, gamma):
    chart = builtin_model(name)
    assert chart.gamma[0][0][0] == chart.ring.parse(gamma)


@pytest.mark.parametrize("name", ["flat-c1", "cp1", "disk", "flat-c2"])
def test_potential_data_reproduce_the_forms(name):
    chart = builtin_model(name)
    n = chart.n
    minus_i = chart.ring.parse("-i")
    for a in range(n):
        for b in range(n):
            assert chart.H[a][b] == minus_i * chart.drho0[a].derive(n + b)
            assert chart.ricci[a][b] == minus_i * chart.drho1[a].derive(n + b)
    assert chart.drho1 == chart.drho1_alternative()


def test_cp1_metric_and_ricci_form():
    chart = builtin_model("cp1")
    r = chart.ring
    assert chart.G[0][0] == r.parse("-i*(1+z*zb)^2")
    # Fubini-Study: omega_1 = -omega in these conventions
    assert chart.ricci[0][0] == -chart.H[0][0]


@pytest.mark.parametrize("name", ["flat-c1", "cp1", "disk", "flat-c2"])
def test_curvature_generates_nabla_squared(name):
    """nabla^2 a = (1/hbar)[R, a] on the fiber generators."""
    chart = builtin_model(name)
    R = chart.weyl_R(6)
    for slot in range(chart.dim):
        exps = [0] * chart.dim
        exps[slot] = 1
        y = WeylElement.monomial(chart.ring, 6, exps)
        lhs = nabla(nabla(y, chart.connection), chart.connection)
        assert lhs == bracket(R, y, chart.anti_wick()).truncate(lhs.cap)


def test_flat_model_has_no_curvature():
    assert builtin_model("flat-c2").weyl_R(6).is_zero()


def test_conjugate_chart_of_real_models_is_the_same_chart():
    for name in ("cp1", "disk", "flat-c1"):
        assert builtin_model(name).self_conjugate()


def test_complexify_gives_holomorphic_chart():
    hc = builtin_model("cp1").complexify()
    assert isinstance(hc, HolomorphicChart)
    assert hc.ring.names == ("u1", "u2")


def test_user_model_duplicating_cp1_is_accepted():
    source = dict(model_source("cp1"), name="copy")
    chart = load_model(json.dumps(source))
    assert isinstance(chart, KahlerChart)
    assert chart.G == builtin_model("cp1").G


@pytest.mark.parametrize("source,message", [
    ({"mode": "kahler", "n": 1, "omega": [["0"]]}, "not invertible"),
    ({"mode": "kahler", "n": 1, "omega": [["1"]]}, "not real"),
    ({"mode": "kahler", "n": 1, "omega": [["i"]], "drho0": ["zb"]}, "inconsistent"),
    ({"mode": "kahler", "n": 1}, "missing field 'omega'"),
    ({"mode": "other", "n": 1, "omega": []}, "unknown mode"),
    ({"mode": "kahler", "n": 1, "omega": [["i*(z+"]]}, "omega[0][0]"),
    ({"mode": "real", "n": 1, "omega": [["0", "1"]]}, "2 rows"),
])
def test_malformed_models_are_rejected(source, message):
    with pytest.raises(ChartError, match=message.replace("[", r"\[").replace("]", r"\]")):
        load_model(source)


def test_invalid_json_reports_position():
    with pytest.raises(ChartError, match="line 1 column"):
        load_model('{"mode": ')


@pytest.mark.parametrize("density", ["1", "1+x^2", "1+x^2+y^2", "2+x*y^2"])
def test_symplectic_connection_on_planar_forms(density):
    ring = chart_ring("real", 1)
    chart = RealSymplecticChart.planar(ring.parse(density))
    conn = symplectic_connection(chart)
    assert torsion(conn) == {}
    assert covariant_derivative_of_form(chart.form, conn, ring) == {}


def test_averaging_repairs_a_connection_that_does_not_preserve_the_form():
    ring = chart_ring("real", 1)
    chart = RealSymplecticChart.planar(ring.parse("1+x^2"))
    flat = Connection(ring, {})
    assert covariant_derivative_of_form(chart.form, flat, ring) != {}
    assert covariant_derivative_of_form(chart.form, chart.connection, ring) == {}
