import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from kramers.pulse import (PulseError, PulseSpec, build_tables, check_assumptions,
                           inverse_G_integral, vector_potential)


@pytest.fixture(scope="module")
def linear():
    return build_tables(PulseSpec("linear", lam=3.0, T=2.0))


@pytest.fixture(scope="module")
def circular():
    return build_tables(PulseSpec("circular_modulated", lam=1.0, T=1.0, omega=8 * math.pi))


def test_linear_closed_forms(linear):
    eps = np.array([1.0, 0.0, 0.0])
    for s in (0.0, 0.25, 0.5, 1.0):
        np.testing.assert_allclose(linear.F(s), s * eps, atol=1e-15)
        np.testing.assert_allclose(linear.G(s), 0.5 * s * s * eps, atol=1e-15)
    for s in (1.0, 1.5, 7.0):
        np.testing.assert_allclose(linear.G(s), (s - 0.5) * eps, atol=1e-14)


def test_vector_potential_examples(linear):
    np.testing.assert_allclose(vector_potential(linear, 2 * linear.T), [3.0, 0, 0])
    np.testing.assert_allclose(vector_potential(linear, -1.0), [0, 0, 0])
    np.testing.assert_allclose(vector_potential(linear, linear.T / 2), [1.5, 0, 0])


def test_zero_envelope_null_pulse():
    tab = build_tables(PulseSpec("circular_modulated", lam=1.0, envelope=lambda s: 0.0 * np.asarray(s)))
    s = np.linspace(-0.5, 3.0, 11)
    assert np.all(tab.F(s) == 0.0) and np.all(tab.G(s) == 0.0)
    assert not check_assumptions(tab).ass1


def _oracle_FG(spec, s_pts, n=200001):
    # independent composite Simpson on a fine uniform grid
    from kramers.pulse import _profile
    f = _profile(spec)
    out_F, out_G = [], []
    for s in s_pts:
        x = np.linspace(0.0, s, n)
        fx = f(x)
        out_F.append(integrate.simpson(fx, x=x, axis=0))
        # G(s) = int_0^s (s - tau) f(tau) d tau
        out_G.append(integrate.simpson((s - x)[:, None] * fx, x=x, axis=0))
    return np.array(out_F), np.array(out_G)


def test_circular_against_simpson_oracle(circular):
    s = np.array([0.13, 0.5, 0.77, 1.0])
    F_ref, G_ref = _oracle_FG(circular.spec, s)
    np.testing.assert_allclose(circular.F(s), F_ref, atol=1e-10)
    np.testing.assert_allclose(circular.G(s), G_ref, atol=1e-10)


def test_circular_default_averages_out(circular):
    # whole number of carrier cycles under a symmetric envelope: F(1) = 0
    cert = check_assumptions(circular)
    assert np.linalg.norm(circular.F1) < 1e-10
    assert not cert.ass1


def test_circular_odd_carrier_passes():
    tab = build_tables(PulseSpec("circular_modulated", omega=7 * math.pi))
    cert = check_assumptions(tab)
    assert cert.ass1 and cert.ass2 and cert.ass0


def test_linear_certificate(linear):
    cert = check_assumptions(linear)
    assert cert.C_ass2 == pytest.approx(1 / (2 * math.sqrt(2)))
    assert cert.passed
    assert cert.ass0_status == "verified-on-samples"


def _custom_negative():
    s = np.linspace(0.0, 1.0, 33)
    return tuple((1.0 - 2.5 * x, 0.1, 0.0) for x in s)


def test_custom_inf_search_against_dense_oracle():
    tab = build_tables(PulseSpec("custom_sampled", samples=_custom_negative()))
    assert float(tab.F1 @ tab.G1) < 0
    cert = check_assumptions(tab)
    assert cert.ass2_method == "inf-search"
    s = np.linspace(1.0, 100.0, 2_000_001)
    dense = np.min(np.linalg.norm(tab.G(s), axis=1) / s)
    assert cert.C_ass2 == pytest.approx(dense, abs=1e-6)


def test_affine_tail_machine_precision():
    tab = build_tables(PulseSpec("circular_modulated", omega=7 * math.pi))
    s = np.linspace(1.0, 50.0, 97)
    resid = tab.G(s) - tab.G1 - (s - 1.0)[:, None] * tab.F1
    scale = np.linalg.norm(tab.G1) + s[:, None] * np.linalg.norm(tab.F1)
    assert np.all(np.abs(resid) <= 4 * np.finfo(float).eps * scale)
    assert np.all(tab.F(s) == tab.F1)


def test_G_antiderivative_of_F():
    tab = build_tables(PulseSpec("circular_modulated", omega=7 * math.pi))
    s = np.linspace(0.01, 0.99, 50)
    h = 1e-5
    dG = (tab.G(s + h) - tab.G(s - h)) / (2 * h)
    assert np.max(np.abs(dG - tab.F(s))) < 1e-8


def test_build_is_pure():
    spec = PulseSpec("circular_modulated", omega=7 * math.pi)
    a, b = build_tables(spec), build_tables(spec)
    assert np.array_equal(a.G_grid, b.G_grid) and np.array_equal(a.F_grid, b.F_grid)


def test_envelope_checks():
    with pytest.raises(PulseError):
        build_tables(PulseSpec("circular_modulated", envelope=lambda s: np.asarray(s) * 1.0))
    with pytest.raises(PulseError):
        PulseSpec("nope")
    with pytest.raises(PulseError):
        PulseSpec("linear", T=0.0)


def test_inverse_G_integral_linear_closed_form():
    # |G| = tau^2/2 -> int_{s0}^1 2/tau^2 = 2(1/s0 - 1)
    tab = build_tables(PulseSpec("linear"))
    for s0 in (0.5, 1e-2, 1e-5):
        assert inverse_G_integral(tab, s0) == pytest.approx(2 * (1 / s0 - 1), rel=1e-9)
    assert inverse_G_integral(tab, 1.0) == 0.0
    with pytest.raises(PulseError):
        inverse_G_integral(tab, 0.0)


def test_export_csv(tmp_path, linear):
    p = tmp_path / "pulse.csv"
    linear.export_csv(p, n=5)
    lines = p.read_text().splitlines()
    assert lines[0].split(",")[:4] == ["s", "f_x", "f_y", "f_z"]
    assert len(lines) == 6


@given(st.floats(1.0, 1e3))
def test_linear_G_lower_bound(s):
    tab = build_tables(PulseSpec("linear"))
    G = np.linalg.norm(tab.G(s))
    G1, F1 = np.linalg.norm(tab.G1), np.linalg.norm(tab.F1)
    assert G ** 2 >= G1 ** 2 + (s - 1) ** 2 * F1 ** 2 - 1e-9 * G ** 2


@given(st.floats(0.0, 50.0), st.floats(0.1, 5.0))
def test_A_constant_after_pulse(t_extra, T):
    tab = build_tables(PulseSpec("linear", lam=2.0, T=T))
    np.testing.assert_array_equal(tab.A(T + t_extra), tab.A(T))


@given(st.floats(0.0, 2.0), st.floats(0.0, 2.0))
def test_int_A2_additive(a, b):
    tab = build_tables(PulseSpec("linear", lam=2.0))
    lo, hi = sorted((a, b))
    mid = 0.5 * (lo + hi)
    assert tab.int_A2(lo, hi) == pytest.approx(tab.int_A2(lo, mid) + tab.int_A2(mid, hi), abs=1e-9)
