import numpy as np
import pytest
from hypothesis import given, strategies as st

from kramers import potential as pot
from kramers.state import GridSpec


def test_coulomb_direct():
    s = pot.PotentialSpec("coulomb", Z=1.0)
    assert float(pot.eval(s, [2.0, 0.0, 0.0])) == pytest.approx(-0.5)


def test_soft_cap():
    s = pot.PotentialSpec("coulomb", Z=1.0, soft_a=0.1)
    assert float(pot.eval(s, [0.0, 0.0, 0.0])) == pytest.approx(-10.0)


def test_singular_raises():
    with pytest.raises(pot.PotentialError):
        pot.eval(pot.PotentialSpec("coulomb"), [0.0, 0.0, 0.0])


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_short_range_at_D(alpha):
    s = pot.PotentialSpec("short_range", V0=3.0, D=2.0, alpha=alpha)
    assert float(pot.eval(s, [2.0, 0.0, 0.0])) == pytest.approx(-3.0 / 2 ** (alpha / 2))


def test_shifted():
    s = pot.PotentialSpec("coulomb")
    assert float(pot.eval_shifted(s, [4.0, 0, 0], [2.0, 0, 0])) == pytest.approx(-0.5)
    x = np.array([1.0, 2.0, -0.5])
    assert float(pot.eval_shifted(s, x, [0, 0, 0])) == float(pot.eval(s, x))


def test_short_range_shifted_minimum_at_shift():
    s = pot.PotentialSpec("short_range", soft_a=0.2)
    g = GridSpec(2, 64, 8.0)
    V = pot.on_grid(s, g, shift=(2.0, -1.0, 0.0))
    i = np.unravel_index(np.argmin(V), V.shape)
    xs = g.lab_axes()
    assert xs[0][i[0]] == pytest.approx(2.0, abs=g.h)
    assert xs[1][i[1]] == pytest.approx(-1.0, abs=g.h)


@pytest.mark.parametrize("kw", [dict(kind="x"), dict(soft_a=-1.0), dict(Z=-1.0),
                                dict(kind="short_range", D=0.0)])
def test_invalid(kw):
    with pytest.raises(pot.PotentialError):
        pot.PotentialSpec(**kw)


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.floats(0, 2 * np.pi),
       st.floats(0, np.pi))
def test_radial_symmetry(x, a, b):
    s = pot.PotentialSpec("short_range", soft_a=0.05)
    x = np.array(x)
    Rz = np.array([[np.cos(a), -np.sin(a), 0], [np.sin(a), np.cos(a), 0], [0, 0, 1]])
    Rx = np.array([[1, 0, 0], [0, np.cos(b), -np.sin(b)], [0, np.sin(b), np.cos(b)]])
    assert float(pot.eval(s, Rx @ Rz @ x)) == pytest.approx(float(pot.eval(s, x)), rel=1e-12)


@given(st.floats(0.01, 0.3), st.floats(0, 1))
def test_soft_core_taylor_bound(a, frac):
    r = 10 * a + frac * 20
    Z = 1.3
    soft = float(pot.radial(pot.PotentialSpec("coulomb", Z=Z, soft_a=a), r))
    bare = float(pot.radial(pot.PotentialSpec("coulomb", Z=Z), r))
    assert abs(soft - bare) <= Z * a * a / (2 * r ** 3) * (1 + 1e-9)


def test_on_grid_matches_eval():
    s = pot.PotentialSpec("coulomb", soft_a=0.3)
    g = GridSpec(2, 16, 4.0, center=(1.0, 0.5, 0.0))
    V = pot.on_grid(s, g)
    X, Y = np.meshgrid(*g.lab_axes(), indexing="ij")
    ref = pot.eval(s, np.stack([X, Y], axis=-1))
    np.testing.assert_allclose(V, ref, rtol=1e-14)
