import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kramers import bounds as bd
from kramers.params import PhysParams
from kramers.pulse import PulseSpec, build_tables


def lin(lam, T=1.0):
    return build_tables(PulseSpec("linear", lam=lam, T=T))


@pytest.mark.parametrize("lam", [1e3, 1e4, 1e5])
def test_linear_minimiser_closed_form(lam):
    k = bd.kappa_lambda(lin(lam), 1.0, 1.0)
    s = bd.kappa_linear_minimizer(1.0, 1.0, lam)
    assert k.s0 ** 2 == pytest.approx(s ** 2, rel=1e-8)
    assert not k.boundary
    assert k.value == pytest.approx(bd.kappa_linear_asymptote(1.0, 1.0, lam), rel=0.05)


@pytest.mark.parametrize("R,T", [(1.0, 1.0), (2.0, 3.0), (0.5, 0.4)])
def test_linear_minimiser_other_scales(R, T):
    lam = 500.0
    k = bd.kappa_lambda(lin(lam, T), R, T)
    assert k.s0 ** 2 == pytest.approx(bd.kappa_linear_minimizer(R, T, lam) ** 2, rel=1e-8)


def test_brute_oracle_linear():
    tab = lin(1e4)
    a, b = bd.kappa_lambda(tab, 1.0, 1.0), bd.kappa_brute(tab, 1.0, 1.0)
    assert b.value == pytest.approx(a.value, rel=1e-6)


@pytest.mark.parametrize("spec", [
    PulseSpec("circular_modulated", lam=1e3, omega=7 * math.pi),
    PulseSpec("custom_sampled", lam=1e3, samples=tuple((1.0, 0.5 * x, 0.0) for x in np.linspace(0, 1, 17))),
])
def test_brute_oracle_other_families(spec):
    tab = build_tables(spec)
    a, b = bd.kappa_lambda(tab, 1.0, 1.0), bd.kappa_brute(tab, 1.0, 1.0)
    assert b.value == pytest.approx(a.value, rel=1e-6)


def test_boundary_flag_small_lambda():
    # for lam < 4R/T the objective still falls at s0 = 1
    k = bd.kappa_lambda(lin(2.0), 1.0, 1.0)
    assert k.boundary and k.s0 == 1.0 and k.value == pytest.approx(1.0)


def test_divergent_pulse_raises():
    tab = build_tables(PulseSpec("circular_modulated", lam=1.0, envelope=lambda s: 0 * np.asarray(s)))
    with pytest.raises(bd.BoundsError):
        bd.kappa_lambda(tab, 1.0, 1.0)


def test_kappa_monotone_in_lambda_and_R():
    lams = np.geomspace(10, 1e6, 8)
    ks = [bd.kappa_lambda(lin(l), 1.0, 1.0).value for l in lams]
    assert all(b <= a for a, b in zip(ks, ks[1:]))
    assert ks[-1] < 0.1
    tab = lin(100.0)
    kr = [bd.kappa_lambda(tab, R, 1.0).value for R in (0.5, 1.0, 2.0, 4.0)]
    assert all(b <= a for a, b in zip(kr, kr[1:]))


def test_fks_bound_formula():
    assert bd.fks_bound(2.0, 3.0, 0.5, 1.0, 0.1, C=2.0) == pytest.approx(2 * 2 * 3 * 0.5 * (1 + 0.0625) * 0.1)


def test_lower_bounds_vacuous_and_terms():
    p = PhysParams(lam=10.0)
    tab = lin(10.0)
    sr = bd.thm_sr_lower_bound(p, tab, 1.0)
    assert sr.vacuous and sr.value <= 0
    assert set(sr.terms) == {"cone", "potential_tail", "free_error", "kappa"}
    # delta above C_ass2 lam -> undefined cone term -> vacuous
    bad = bd.thm_sr_lower_bound(PhysParams(lam=10.0, delta=5.0), tab, 1.0)
    assert bad.vacuous and bad.value == -math.inf


def test_bounds_tend_to_one():
    lams = [1e2, 1e4, 1e6, 1e8, 1e10, 1e12]
    sr, cou = [], []
    for l in lams:
        p, tab = PhysParams(lam=l), lin(l)
        k = bd.kappa_lambda(tab, 1.0, 1.0).value
        sr.append(bd.thm_sr_lower_bound(p, tab, 10.0, k).value)
        cou.append(bd.thm_cou_lower_bound(p, tab, 10.0, k).value)
    for seq in (sr, cou):
        assert all(v <= 1.0 for v in seq)
        assert all(b > a for a, b in zip(seq, seq[1:]))
    assert sr[-1] > 0.9 and cou[-1] > 0.9


@given(st.floats(-2.0, 0.5), st.floats(-3, 3))
def test_fit_scaling_exact_power(e, c):
    xs = np.geomspace(1, 1e4, 6)
    fit = bd.fit_scaling(xs, math.exp(c) * xs ** e)
    assert fit.exponent == pytest.approx(e, abs=1e-10)
    assert fit.intercept == pytest.approx(c, abs=1e-8)


def test_fit_scaling_errors():
    with pytest.raises(bd.BoundsError):
        bd.fit_scaling([1, 2], [1, -1])
    with pytest.raises(bd.BoundsError):
        bd.fit_scaling([1], [1])


def test_report_roundtrip():
    p = PhysParams(lam=1e3)
    rep = bd.bound_report(p, lin(1e3), t=2.0, C_sr=(2, 1, 1))
    d = rep.to_dict()
    assert d["constants_used"]["C_sr"] == [2, 1, 1]
    assert d["kappa"]["s0"] ** 2 == pytest.approx(bd.kappa_linear_minimizer(1, 1, 1e3) ** 2, rel=1e-8)
    import json
    assert json.loads(rep.to_json())["thm_cou_bound"]["vacuous"] in (True, False)


@given(st.floats(10, 1e5))
def test_bound_evaluators_pure(lam):
    p, tab = PhysParams(lam=lam), lin(lam)
    a = bd.thm_cou_lower_bound(p, tab, 3.0, 0.5)
    b = bd.thm_cou_lower_bound(p, tab, 3.0, 0.5)
    assert a == b and a.value <= 1.0
