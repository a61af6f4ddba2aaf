import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kramers import potential as pot
from kramers.state import (MOMENTUM, POSITION, GridSpec, StateError, Wavefunction, check_decay,
                           energy, export_csv_slice, gaussian_state, hydrogenic_ground_state,
                           load_binary, recenter, relax_ground_state, save_binary, to_momentum,
                           to_position, translate)


def _moment(psi, f):
    return float(np.sum(f * np.abs(psi.values) ** 2)) * psi.measure


def test_grid_spacing():
    g = GridSpec(2, 64, 8.0)
    assert g.h == pytest.approx(0.25)
    assert g.dk == pytest.approx(math.pi / 8.0)
    with pytest.raises(StateError):
        GridSpec(2, 60, 8.0)
    with pytest.raises(StateError):
        GridSpec(4, 64, 8.0)


def test_grid_roundtrip_dict():
    g = GridSpec(3, 16, 5.0, (1.0, -2.0, 0.5))
    assert GridSpec.from_dict(g.to_dict()) == g


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_gaussian_moments(dim):
    n = 32 if dim == 3 else 128
    g = GridSpec(dim, n, 8.0)
    R = 1.3
    psi = gaussian_state(g, R)
    assert psi.norm == pytest.approx(1.0, abs=1e-12)
    assert _moment(psi, g.r2()) == pytest.approx(dim * R * R / 2, rel=1e-6)
    mom = to_momentum(psi)
    k0 = g.k_coords()[0]
    # per-axis momentum width 1/(R sqrt 2)
    assert math.sqrt(_moment(mom, k0 ** 2)) == pytest.approx(1 / (R * math.sqrt(2)), rel=1e-6)


def test_roundtrip_and_parseval():
    rng = np.random.default_rng(0)
    g = GridSpec(2, 64, 6.0, (0.3, -0.7, 0.0))
    psi = Wavefunction(rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape), g)
    mom = to_momentum(psi)
    assert mom.rep == MOMENTUM
    assert abs(mom.norm - psi.norm) < 1e-12 * psi.norm
    back = to_position(mom)
    assert np.max(np.abs(back.values - psi.values)) < 1e-12 * np.max(np.abs(psi.values))


def test_plane_wave_single_bin():
    g = GridSpec(1, 64, 8.0, (0.5, 0, 0))
    j = 5
    k = g.k_axis()[j]
    x = g.lab_axes()[0]
    mom = to_momentum(Wavefunction(np.exp(1j * k * x), g))
    amp = np.abs(mom.values)
    assert np.argmax(amp) == j
    assert np.sum(amp ** 2) - amp[j] ** 2 < 1e-20 * amp[j] ** 2


@pytest.mark.parametrize("Z,L", [(1.0, 20.0), (2.0, 10.0)])
def test_bare_3d_energy(Z, L):
    # origin-avoiding grid so the bare potential is finite at every node
    n = 128
    h = 2 * L / n
    g = GridSpec(3, n, L, (h / 2, h / 2, h / 2))
    psi = hydrogenic_ground_state(g, Z)
    assert psi.norm == pytest.approx(1.0, abs=1e-12)
    assert energy(psi, pot.PotentialSpec("coulomb", Z=Z)) == pytest.approx(-Z * Z / 4, rel=0.02)


def test_bare_3d_decay_report():
    g = GridSpec(3, 128, 20.0)
    rep = check_decay(hydrogenic_ground_state(g, 1.0))
    assert rep.R_fit == pytest.approx(2.0, rel=0.10)
    assert rep.gamma_fit == pytest.approx(4.0, rel=0.15)
    assert rep.gamma_gt_5_2 and rep.gamma4_compatible


def test_bare_2d_decay_report():
    # in 2D the bare ground state is exp(-Z r): R = 1/Z and |psi_hat| ~ p^-3
    g = GridSpec(2, 256, 20.0)
    rep = check_decay(hydrogenic_ground_state(g, 1.0))
    assert rep.R_fit == pytest.approx(1.0, rel=0.10)
    assert rep.gamma_fit == pytest.approx(3.0, rel=0.15)


def test_gaussian_exceeds_threshold():
    rep = check_decay(gaussian_state(GridSpec(2, 128, 12.0), 1.0))
    assert rep.gamma_status == "exceeds threshold"
    assert rep.gamma_gt_5_2


def test_decay_errors():
    g = GridSpec(2, 32, 6.0)
    with pytest.raises(StateError):
        check_decay(Wavefunction(np.zeros(g.shape), g))
    with pytest.raises(StateError):
        check_decay(to_momentum(gaussian_state(g, 1.0)))


def test_box_too_small():
    with pytest.raises(StateError):
        hydrogenic_ground_state(GridSpec(3, 32, 4.0), 1.0)


def test_relaxation_monotone_and_converged():
    g = GridSpec(2, 64, 12.0)
    spec = pot.PotentialSpec("coulomb", Z=1.0, soft_a=0.5)
    psi, hist = relax_ground_state(g, spec)
    assert np.all(np.diff(hist) <= 1e-13)
    assert abs(hist[-1] - hist[-2]) < 1e-10
    assert energy(psi, spec) == pytest.approx(hist[-1], abs=1e-9)


def test_soft_core_approaches_bare_2d():
    # soft-core energy rises towards -Z^2 as a -> 0 (2D bare value)
    g = GridSpec(2, 128, 12.0)
    es = [energy(hydrogenic_ground_state(g, 1.0, soft_a=a), pot.PotentialSpec("coulomb", soft_a=a))
          for a in (1.0, 0.5, 0.25)]
    assert es[0] > es[1] > es[2] > -1.0


def test_binary_roundtrip(tmp_path):
    g = GridSpec(2, 16, 3.0, (0.5, 0.25, 0.0))
    psi = gaussian_state(g, 0.7, p0=(1.0, 0.0, 0.0))
    p = tmp_path / "psi.kwf"
    save_binary(psi, p)
    raw = p.read_bytes()
    assert raw[:4] == b"KWF1"
    back = load_binary(p)
    assert back.grid == g and back.rep == POSITION
    assert np.array_equal(back.values, psi.values)


def test_csv_slice(tmp_path):
    g = GridSpec(2, 16, 3.0)
    p = tmp_path / "s.csv"
    export_csv_slice(gaussian_state(g, 1.0), p, axis=1)
    rows = p.read_text().splitlines()
    assert rows[0] == "x,re,im,abs2" and len(rows) == 17


@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_translate_moves_centroid(vx, vy):
    g = GridSpec(2, 64, 10.0)
    psi = gaussian_state(g, 1.0)
    out = translate(psi, (vx, vy, 0.0))
    X, Y = g.lab_coords()
    assert _moment(out, X) == pytest.approx(vx, abs=1e-9)
    assert _moment(out, Y) == pytest.approx(vy, abs=1e-9)
    assert out.norm == pytest.approx(1.0, abs=1e-12)


@given(st.floats(-1.5, 1.5))
def test_recenter_preserves_lab_function(c):
    g = GridSpec(1, 128, 10.0)
    psi = gaussian_state(g, 1.0, x0=(0.3, 0, 0))
    moved = recenter(psi, (c, 0.0, 0.0))
    x = moved.grid.lab_axes()[0]
    ref = gaussian_state(moved.grid, 1.0, x0=(0.3, 0, 0))
    np.testing.assert_allclose(moved.values, ref.values, atol=1e-10)


@given(st.integers(0, 2 ** 32 - 1))
def test_parseval_random(seed):
    rng = np.random.default_rng(seed)
    g = GridSpec(1, 32, 4.0)
    psi = Wavefunction(rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape), g)
    assert abs(to_momentum(psi).norm - psi.norm) < 1e-12 * psi.norm
