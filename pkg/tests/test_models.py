import numpy as np
import pytest

from coexist.errors import UnsupportedModel
from coexist.models import (ap1_sample, apriori_bounds, chemo_cumulative,
                            g_inverse, gauge_h1, gauge_h2, hypothesis_check,
                            model_ap1, model_ap2, nonexistence)

PI2 = np.pi**2


def ap2_unit(chi=0.5, b=1.0, c=1.0):
    return model_ap2(chi, b, c, lambda v: 1.0, lambda v: 0.0)


def ap2_inv1p(chi=0.5, b=1.0, c=1.0):
    return model_ap2(chi, b, c,
                     lambda v: 1.0 / (1.0 + v),
                     lambda v: -1.0 / (1.0 + v) ** 2)


def test_hypothesis_check_passes_builtin_families():
    assert hypothesis_check(ap1_sample(), 5.0, 5.0) == []
    assert hypothesis_check(ap2_unit(), 5.0, 5.0) == []
    assert hypothesis_check(ap2_inv1p(), 5.0, 5.0) == []


def test_hypothesis_check_flags_broken_model():
    bad = ap1_sample()
    bad.Q = lambda u, v: u          # violates Q(u,0) = 0
    names = [v.name for v in hypothesis_check(bad, 2.0, 2.0)]
    assert "Q(u,0)=0" in names


def test_hypothesis_check_rejects_bad_rectangle():
    with pytest.raises(ValueError):
        hypothesis_check(ap1_sample(), 0.0, 1.0)


def test_constructor_validation():
    with pytest.raises(ValueError):
        ap1_sample(b_const=-1.0)
    with pytest.raises(ValueError):
        model_ap2(-0.5, 1.0, 1.0, lambda v: 1.0, lambda v: 0.0)
    with pytest.raises(ValueError):
        model_ap2(0.5, 1.0, 0.0, lambda v: 1.0, lambda v: 0.0)


def test_gauge_h1_vanishes_for_builtin_families():
    # both families have Q identically zero
    for model in (ap1_sample(), ap2_unit()):
        assert gauge_h1(model, 2.0) == pytest.approx(0.0, abs=1e-12)


def test_gauge_h2_closed_forms():
    m = ap1_sample()
    H = lambda v: (v + 2.0) / (v + 1.0)
    for z in (0.5, 1.3, 4.0):
        assert gauge_h2(m, z) == pytest.approx(np.log(H(z) / H(0.0)),
                                               abs=1e-9)
    chi = 0.7
    m2 = model_ap2(chi, 1.0, 1.0, lambda v: 1.0, lambda v: 0.0)
    for z in (0.5, 2.0):
        assert gauge_h2(m2, z) == pytest.approx(-chi * z, abs=1e-9)
    m3 = model_ap2(chi, 1.0, 1.0,
                   lambda v: 1.0 / (1.0 + v),
                   lambda v: -1.0 / (1.0 + v) ** 2)
    assert gauge_h2(m3, 2.0) == pytest.approx(-chi * np.log(3.0), abs=1e-9)


def test_chemo_cumulative():
    assert chemo_cumulative(ap2_unit(), 3.0) == pytest.approx(3.0)
    assert chemo_cumulative(ap2_inv1p(), 3.0) == pytest.approx(np.log(4.0))
    with pytest.raises(UnsupportedModel):
        chemo_cumulative(ap1_sample(), 1.0)


def test_g_inverse_roundtrip():
    m = ap1_sample()
    G = m.constants["G_fn"]
    for y in (0.3, 2.0, 40.0):
        assert G(g_inverse(m, y)) == pytest.approx(y, abs=1e-9)
    assert g_inverse(m, -1.0) == 0.0
    with pytest.raises(UnsupportedModel):
        g_inverse(ap2_unit(), 1.0)


def test_apriori_bounds_ap1_closed_form():
    # u solves u^2 + u = 2 (lam^2 + lam) at lam = 1: u = (-1+sqrt(17))/2
    rep = apriori_bounds(ap1_sample(), 1.0, 2.0)
    assert rep.valid
    assert rep.u_bound == pytest.approx((-1.0 + np.sqrt(17.0)) / 2.0,
                                        abs=1e-10)
    assert rep.v_bound == pytest.approx(2.0 + rep.u_bound)
    assert not apriori_bounds(ap1_sample(), -1.0, 2.0).valid


def test_apriori_bounds_ap2():
    rep = apriori_bounds(ap2_unit(chi=0.5), 1.0, 2.0)
    assert rep.valid
    assert rep.v_bound == pytest.approx(2.0)
    assert rep.u_bound == pytest.approx((1.0 + 2.0) * np.exp(0.5 * 2.0))
    assert not apriori_bounds(ap2_unit(), 1.0, -1.0).valid


def test_nonexistence_ap1():
    m = ap1_sample()
    assert nonexistence(m, -1.0, 5.0, PI2) == "ProvenEmpty"
    assert nonexistence(m, 0.0, 100.0, PI2) == "ProvenEmpty"
    # deep negative mu is below lambda1 - c*ubar
    assert nonexistence(m, 1.0, -50.0, PI2) == "ProvenEmpty"
    assert nonexistence(m, 25.0, 12.0, PI2) == "Unknown"


def test_nonexistence_ap2():
    m = ap2_unit(chi=0.5, b=1.0)
    assert nonexistence(m, 5.0, PI2 - 0.1, PI2) == "ProvenEmpty"
    assert nonexistence(m, 20.0, PI2 + 1.0, PI2) == "Unknown"
    mneg = ap2_unit(chi=0.5, b=-1.0)
    mu = PI2 + 1.0
    small = PI2 * np.exp(-0.5 * mu)
    assert nonexistence(mneg, 0.5 * small, mu, PI2) == "ProvenEmpty"
    assert nonexistence(mneg, 2.0 * small, mu, PI2) == "Unknown"


def test_nonexistence_unsupported_family():
    m = ap1_sample()
    m.family = "generic"
    with pytest.raises(UnsupportedModel):
        nonexistence(m, 1.0, 1.0, PI2)
