"""Measurements on wavefunction snapshots: cone capture, survival, spreading, ejection kinematics.

The cone axis follows the packet.  In the sign convention of ``propagator`` a
free electron is displaced by -2 lam T G(t/T), so the default orientation is
-1 (cone around -G, or -F(1)).  Pass ``orientation=+1`` for the literal
"x . G >= |x||G| cos(theta)" reading.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .pulse import PulseTables
from .state import Wavefunction, POSITION, to_momentum, to_position, recenter

AXIS_MODES = ("G_of_t", "F1_fixed")


class ObservableError(ValueError):
    pass


@dataclass(frozen=True)
class ConeObservable:
    delta: float
    theta: float = 0.2
    axis_mode: str = "G_of_t"
    orientation: int = -1

    def __post_init__(self):
        if not 0.0 < self.theta <= math.pi / 2:
            raise ObservableError("theta must lie in (0, pi/2]")
        if self.delta < 0:
            raise ObservableError("delta must be >= 0")
        if self.axis_mode not in AXIS_MODES:
            raise ObservableError(f"unknown axis mode {self.axis_mode!r}")
        if self.orientation not in (-1, 1):
            raise ObservableError("orientation must be +1 or -1")

    def axis(self, t: float, tables: PulseTables) -> np.ndarray:
        if self.axis_mode == "G_of_t":
            if t <= 0:
                raise ObservableError("the G axis needs t > 0")
            a = np.asarray(tables.G(t / tables.T), dtype=float)
        else:
            a = np.asarray(tables.F1, dtype=float)
        n = float(np.linalg.norm(a))
        if n == 0.0:
            raise ObservableError("cone axis vector vanishes")
        return self.orientation * a / n


def cone_mask(psi: Wavefunction, t: float, cone: ConeObservable, tables: PulseTables) -> np.ndarray:
    g = psi.grid
    ax = cone.axis(t, tables)
    xs = g.lab_coords()
    r = np.sqrt(sum(x * x for x in xs))
    proj = sum(ax[i] * x for i, x in enumerate(xs))
    # small slack keeps the half-space limit theta = pi/2 inclusive of the boundary plane
    return (r >= cone.delta * t) & (proj >= r * math.cos(cone.theta) - 1e-12 * (1.0 + r))


def cone_norm(psi: Wavefunction, t: float, cone: ConeObservable, tables: PulseTables) -> float:
    """N(t) = || 1(|x| >= delta t) 1(x in cone about the axis) psi ||."""
    if psi.rep != POSITION:
        raise ObservableError("cone_norm expects the position representation")
    if t <= 0:
        raise ObservableError("cone_norm needs t > 0")
    mask = cone_mask(psi, t, cone, tables)
    return math.sqrt(float(np.sum(np.abs(psi.values[mask]) ** 2)) * psi.measure)


def survival_probability(psi_t: Wavefunction, psi_0: Wavefunction) -> float:
    """|<psi_0, psi_t>|^2; psi_0 is resampled onto psi_t's grid if the centres differ."""
    a, b = to_position(psi_0), to_position(psi_t)
    if a.grid.dim != b.grid.dim or a.grid.n != b.grid.n or a.grid.L != b.grid.L:
        raise ObservableError("survival needs grids of identical shape and spacing")
    if a.grid != b.grid:
        a = recenter(a, b.grid.center)
    return abs(a.inner(b)) ** 2


def spreading(psi: Wavefunction) -> float:
    """W = <psi, |x|^2 psi>^(1/2), about the lab origin."""
    pos = to_position(psi)
    r2 = pos.grid.r2()
    return math.sqrt(float(np.sum(r2 * np.abs(pos.values) ** 2)) * pos.measure)


@dataclass(frozen=True)
class Kinematics:
    mean_velocity: np.ndarray
    opening_angle: float
    p_par: float
    sigma_perp: float


def ejection_kinematics(psi: Wavefunction, tables: Optional[PulseTables], t: float,
                        axis: Optional[np.ndarray] = None, rel_tol: float = 1e-6) -> Kinematics:
    """Gauge-invariant mean velocity 2<p - A(t)> and opening angle atan(sigma_perp / |<P_par>|).

    The kinetic momentum P = k - A(t) is what the Ritz-gauge state carries as
    its canonical momentum, so this equals bridging first and taking <p>.  The
    parallel axis is A(T) (i.e. F(1)) unless given.
    """
    mom = to_momentum(psi)
    g = mom.grid
    dens = np.abs(mom.values) ** 2
    n2 = float(np.sum(dens))
    if n2 == 0.0:
        raise ObservableError("zero wavefunction")
    dens = dens / n2
    A = np.zeros(3) if tables is None else np.asarray(tables.A(t), dtype=float)
    P = [kc - A[i] for i, kc in enumerate(g.k_coords())]
    mean = np.zeros(3)
    for i in range(g.dim):
        mean[i] = float(np.sum(dens * P[i]))
    if axis is None:
        if tables is None:
            raise ObservableError("an axis or pulse tables are required")
        axis = np.asarray(tables.F1, dtype=float)
    axis = np.asarray(axis, dtype=float)[:3]
    axis = axis / np.linalg.norm(axis)
    p_par = float(mean @ axis)
    # transverse second moment about the mean
    var_tot = 0.0
    for i in range(g.dim):
        var_tot += float(np.sum(dens * (P[i] - mean[i]) ** 2))
    a = axis[: g.dim]
    Ppar = sum(a[i] * (P[i] - mean[i]) for i in range(g.dim))
    var_par = float(np.sum(dens * Ppar ** 2))
    sigma_perp = math.sqrt(max(var_tot - var_par, 0.0))
    scale = math.sqrt(max(var_tot, 0.0)) + 1e-300
    if abs(p_par) <= rel_tol * scale or p_par == 0.0:
        raise ObservableError("packet at rest along the axis: opening angle undefined")
    return Kinematics(2.0 * mean, math.atan(sigma_perp / abs(p_par)), p_par, sigma_perp)


def half_space_mass(psi: Wavefunction, direction) -> float:
    """Mass of {x . direction >= 0}, by a direct sum (cross-check for the cone mask)."""
    d = np.asarray(direction, dtype=float)
    proj = sum(d[i] * x for i, x in enumerate(psi.grid.lab_coords()))
    return float(np.sum(np.abs(psi.values) ** 2 * (proj >= 0))) * psi.measure
