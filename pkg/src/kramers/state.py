"""Uniform periodic grids, wavefunctions, representation changes and initial states.

Grid points along each axis are ``-L + j*h + center`` (lab coordinates) for
``j = 0..n-1`` with ``h = 2L/n``.  Momentum samples are stored in FFT order.
The discrete transform is scaled to approximate the unitary continuum Fourier
transform, so ``sum |psi|^2 h^d == sum |psi_hat|^2 dk^d`` exactly.
"""
from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.fft as sfft

from . import potential as pot

POSITION = "position"
MOMENTUM = "momentum"


class StateError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    dim: int = 2
    n: int = 256
    L: float = 20.0
    center: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise StateError("dim must be 1, 2 or 3")
        if self.n < 4 or self.n & (self.n - 1):
            raise StateError("n must be a power of two >= 4")
        if not (math.isfinite(self.L) and self.L > 0):
            raise StateError("L must be positive")
        c = tuple(float(x) for x in self.center) + (0.0,) * (3 - len(self.center))
        object.__setattr__(self, "center", c[:3])

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def dk(self) -> float:
        return math.pi / self.L

    @property
    def k_max(self) -> float:
        return math.pi / self.h

    @property
    def dV(self) -> float:
        return self.h ** self.dim

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    def local_axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n)

    def lab_axes(self) -> list[np.ndarray]:
        ax = self.local_axis()
        return [ax + self.center[i] for i in range(self.dim)]

    def k_axis(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    def lab_coords(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays, one per axis."""
        out = []
        for i, ax in enumerate(self.lab_axes()):
            shape = [1] * self.dim
            shape[i] = self.n
            out.append(ax.reshape(shape))
        return out

    def k_coords(self) -> list[np.ndarray]:
        k = self.k_axis()
        out = []
        for i in range(self.dim):
            shape = [1] * self.dim
            shape[i] = self.n
            out.append(k.reshape(shape))
        return out

    def r2(self) -> np.ndarray:
        return sum(c * c for c in self.lab_coords())

    def k2(self) -> np.ndarray:
        return sum(c * c for c in self.k_coords())

    def shifted(self, center) -> "GridSpec":
        return replace(self, center=tuple(center))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "n": self.n, "L": self.L, "center": list(self.center)}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        d = dict(d)
        if "center" in d:
            d["center"] = tuple(d["center"])
        return cls(**d)


def fftn(a):
    return sfft.fftn(a, workers=-1)


def ifftn(a):
    return sfft.ifftn(a, workers=-1)


@dataclass
class Wavefunction:
    values: np.ndarray
    grid: GridSpec
    rep: str = POSITION
    _norm: Optional[float] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise StateError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")
        if self.rep not in (POSITION, MOMENTUM):
            raise StateError(f"unknown representation {self.rep!r}")

    @property
    def measure(self) -> float:
        return self.grid.dV if self.rep == POSITION else self.grid.dk ** self.grid.dim

    @property
    def norm(self) -> float:
        if self._norm is None:
            self._norm = math.sqrt(float(np.sum(np.abs(self.values) ** 2)) * self.measure)
        return self._norm

    def copy(self) -> "Wavefunction":
        return Wavefunction(self.values.copy(), self.grid, self.rep)

    def with_values(self, values, grid: Optional[GridSpec] = None) -> "Wavefunction":
        return Wavefunction(values, grid or self.grid, self.rep)

    def normalized(self) -> "Wavefunction":
        return self.with_values(self.values / self.norm)

    def inner(self, other: "Wavefunction") -> complex:
        """<self, other>; both must share grid and representation."""
        if other.grid != self.grid or other.rep != self.rep:
            raise StateError("inner product needs identical grids and representations")
        return complex(np.vdot(self.values, other.values) * self.measure)


def _origin_phase(grid: GridSpec) -> np.ndarray:
    # exp(-i k . x_first) so that the DFT approximates the continuum transform
    ph = 1.0
    for i, k in enumerate(grid.k_coords()):
        x0 = -grid.L + grid.center[i]
        ph = ph * np.exp(-1j * k * x0)
    return ph


def to_momentum(psi: Wavefunction) -> Wavefunction:
    if psi.rep == MOMENTUM:
        return psi
    g = psi.grid
    scale = (g.h / math.sqrt(2.0 * math.pi)) ** g.dim
    return Wavefunction(fftn(psi.values) * (scale * _origin_phase(g)), g, MOMENTUM)


def to_position(psi: Wavefunction) -> Wavefunction:
    if psi.rep == POSITION:
        return psi
    g = psi.grid
    scale = (g.h / math.sqrt(2.0 * math.pi)) ** g.dim
    return Wavefunction(ifftn(psi.values / (scale * _origin_phase(g))), g, POSITION)


# ---------------------------------------------------------------- initial states

def gaussian_state(grid: GridSpec, R: float, x0=None, p0=None) -> Wavefunction:
    """Normalised isotropic Gaussian, |psi|^2 ~ exp(-|x - x0|^2 / R^2), mean momentum p0."""
    x0 = np.zeros(3) if x0 is None else np.asarray(x0, dtype=float)
    p0 = np.zeros(3) if p0 is None else np.asarray(p0, dtype=float)
    val = np.ones(grid.shape, dtype=complex)
    for i, x in enumerate(grid.lab_coords()):
        val = val * np.exp(-((x - x0[i]) ** 2) / (2.0 * R * R) + 1j * p0[i] * x)
    return Wavefunction(val, grid).normalized()


def hydrogenic_decay_rate(dim: int, Z: float) -> float:
    """Decay rate a of the bare ground state exp(-a|x|) of p^2 - Z/|x| in 2 or 3 dimensions."""
    if dim == 3:
        return Z / 2.0
    if dim == 2:
        return Z
    raise StateError("the bare 1D Coulomb problem has no ground state; use soft_a > 0")


def hydrogenic_energy(dim: int, Z: float) -> float:
    return -hydrogenic_decay_rate(dim, Z) ** 2


def _tail_mass(dim: int, a: float, r: float) -> float:
    # mass of exp(-a|x|) outside the ball of radius r (density exp(-2a|x|))
    b = 2.0 * a * r
    if dim == 3:
        return math.exp(-b) * (1.0 + b + b * b / 2.0)
    if dim == 2:
        return math.exp(-b) * (1.0 + b)
    return math.exp(-b)


def hydrogenic_ground_state(grid: GridSpec, Z: float, soft_a: float = 0.0,
                            tol: float = 1e-10, dt_imag: Optional[float] = None) -> Wavefunction:
    """Ground state of p^2 - Z/sqrt(|x|^2 + a^2) on the grid.

    With ``soft_a == 0`` the exact bare eigenfunction exp(-a|x|) is sampled
    (a = Z/2 in 3D, a = Z in 2D).  With ``soft_a > 0`` the state is relaxed by
    imaginary-time split-step propagation.
    """
    if Z <= 0:
        raise StateError("Z must be positive")
    a = Z / 2.0 if grid.dim == 3 else Z
    if _tail_mass(grid.dim, a, grid.L) > 1e-6:
        raise StateError(f"box half-width {grid.L} too small for exp(-{a:g}|x|): tail mass > 1e-6")
    if soft_a == 0.0:
        rate = hydrogenic_decay_rate(grid.dim, Z)
        return Wavefunction(np.exp(-rate * np.sqrt(grid.r2())), grid).normalized()
    spec = pot.PotentialSpec("coulomb", Z=Z, soft_a=soft_a)
    psi, _ = _cached_relax(grid, spec, tol, dt_imag)
    return psi.copy()


@lru_cache(maxsize=16)
def _cached_relax(grid, spec, tol, dt_imag):
    return relax_ground_state(grid, spec, tol=tol, dt_imag=dt_imag)


def relax_ground_state(grid: GridSpec, spec: pot.PotentialSpec, tol: float = 1e-10,
                       dt_imag: Optional[float] = None, max_steps: int = 200000,
                       guess: Optional[Wavefunction] = None) -> tuple[Wavefunction, np.ndarray]:
    """Imaginary-time Strang relaxation; returns the state and the energy history.

    The step runs through a short coarse-to-fine schedule ending at
    ``dt_imag`` (default 0.1 h^2); each stage stops once the energy changes by
    less than ``tol`` per step.
    """
    dt_final = 0.1 * grid.h ** 2 if dt_imag is None else dt_imag
    V = pot.on_grid(spec, grid)
    k2 = grid.k2()
    if guess is None:
        rate = spec.Z / 2.0 if grid.dim == 3 else max(spec.Z, 1e-3)
        # smooth trial state well above the ground energy, so the energy falls monotonically
        psi = np.exp(-0.5 * (rate * grid.r2())).astype(complex)
    else:
        psi = to_position(guess).values.copy()
    dV = grid.dV
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * dV)

    def energy(p):
        ph = fftn(p)
        kin = float(np.sum(k2 * np.abs(ph) ** 2)) / float(np.sum(np.abs(ph) ** 2))
        return kin + float(np.sum(V * np.abs(p) ** 2)) * dV

    stages = []
    # the coarse stages must stay accurate enough near a deep soft core
    dt = max(dt_final, min(0.05, 50 * dt_final, 0.1 / max(float(np.max(np.abs(V))), 1e-12)))
    while dt > dt_final * 1.0001:
        stages.append(dt)
        dt /= 4.0
    stages.append(dt_final)

    history = [energy(psi)]
    steps = 0
    for dt in stages:
        half = np.exp(-0.5 * dt * V)
        kin = np.exp(-dt * k2)
        while True:
            psi = half * ifftn(kin * fftn(half * psi))
            psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * dV)
            e = energy(psi)
            history.append(e)
            steps += 1
            if abs(history[-2] - e) < tol:
                break
            if steps >= max_steps:
                raise StateError("imaginary-time relaxation did not converge")
    return Wavefunction(psi, grid), np.asarray(history)


def energy(psi: Wavefunction, spec: pot.PotentialSpec) -> float:
    """<psi, (p^2 + V) psi> / <psi, psi>."""
    pos = to_position(psi)
    mom = to_momentum(pos)
    n2 = pos.norm ** 2
    kin = float(np.sum(pos.grid.k2() * np.abs(mom.values) ** 2)) * mom.measure
    V = pot.on_grid(spec, pos.grid)
    return (kin + float(np.sum(V * np.abs(pos.values) ** 2)) * pos.measure) / n2


def hamiltonian_apply(psi: Wavefunction, spec: pot.PotentialSpec) -> Wavefunction:
    pos = to_position(psi)
    kin = ifftn(pos.grid.k2() * fftn(pos.values))
    return pos.with_values(kin + pot.on_grid(spec, pos.grid) * pos.values)


# ---------------------------------------------------------------- translations

def translate(psi: Wavefunction, v) -> Wavefunction:
    """psi(x - v) on the same (periodic) grid, by a momentum-space phase."""
    mom = to_momentum(psi)
    ph = 1.0
    for i, k in enumerate(mom.grid.k_coords()):
        ph = ph * np.exp(-1j * k * float(v[i]))
    out = mom.with_values(mom.values * ph)
    return to_position(out) if psi.rep == POSITION else out


def recenter(psi: Wavefunction, center, periodic: bool = False) -> Wavefunction:
    """Resample the same lab-frame function on the grid centred at ``center``.

    Sub-cell offsets use a Fourier shift; whole-cell offsets are integer moves
    which, unless ``periodic``, fill the vacated cells with zeros.
    """
    pos = to_position(psi)
    g = pos.grid
    new = g.shifted(center)
    d = np.asarray(new.center) - np.asarray(g.center)
    m = np.rint(d / g.h).astype(int)
    r = d - m * g.h
    vals = pos.values
    if np.any(r[: g.dim] != 0.0):
        vals = translate(pos, -r).values
    for i in range(g.dim):
        s = int(m[i])
        if s == 0:
            continue
        vals = np.roll(vals, -s, axis=i)
        if not periodic:
            idx = [slice(None)] * g.dim
            idx[i] = slice(g.n - s, None) if s > 0 else slice(None, -s)
            vals[tuple(idx)] = 0.0
    return Wavefunction(vals, new)


# ---------------------------------------------------------------- decay checks

@dataclass(frozen=True)
class DecayReport:
    R_fit: float
    C_fit: float
    gamma_fit: float
    gamma_status: str          # "power-law" | "exceeds threshold"
    gamma_gt_5_2: bool
    gamma4_compatible: bool
    k_window: tuple

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def check_decay(psi: Wavefunction, noise_floor: float = 1e-12) -> DecayReport:
    """Fit exp(-|x|/R) decay in position and (1 + (R p)^2)^(-gamma/2) in momentum."""
    if psi.rep != POSITION:
        raise StateError("check_decay expects the position representation")
    g = psi.grid
    amp = np.abs(psi.values)
    if not np.any(amp > 0):
        raise StateError("all-zero wavefunction")
    r = np.sqrt(g.r2())
    sel = (r >= g.L / 2) & (r <= g.L) & (amp > 1e-300)
    if sel.sum() < 4:
        raise StateError("not enough non-zero samples in the outer half of the box")
    slope, _ = np.polyfit(r[sel], np.log(amp[sel]), 1)
    R_fit = -1.0 / slope if slope < 0 else math.inf
    if math.isfinite(R_fit):
        C_fit = float(np.max(amp * R_fit ** (g.dim / 2.0) * np.exp(np.minimum(r / R_fit, 700.0))))
    else:
        C_fit = math.inf

    mom = np.abs(to_momentum(psi).values)
    k = np.sqrt(g.k2())
    k_lo = 3.0 / R_fit if math.isfinite(R_fit) and R_fit > 0 else 3.0 * g.dk
    k_lo = max(k_lo, 2.0 * g.dk)
    k_hi = g.k_max / 2.0
    window = (k > k_lo) & (k < k_hi)
    floor = noise_floor * mom.max()
    good = window & (mom > floor)
    status = "power-law"
    gamma = math.nan
    if window.sum() == 0 or good.sum() < 0.5 * window.sum() or good.sum() < 8:
        status = "exceeds threshold"
        gamma = math.inf
    else:
        lk, lm = np.log(k[good]), np.log(mom[good])
        gamma = -np.polyfit(lk, lm, 1)[0]
        mid = 0.5 * (lk.min() + lk.max())
        lo, hi = lk <= mid, lk > mid
        if lo.sum() >= 4 and hi.sum() >= 4:
            s_lo = -np.polyfit(lk[lo], lm[lo], 1)[0]
            s_hi = -np.polyfit(lk[hi], lm[hi], 1)[0]
            if s_hi > 1.5 * s_lo and s_hi > 0:
                status = "exceeds threshold"
                gamma = math.inf
    return DecayReport(float(R_fit), C_fit, float(gamma), status, gamma > 2.5,
                       gamma >= 4.0 * 0.85, (float(k_lo), float(k_hi)))


# ---------------------------------------------------------------- export

_MAGIC = b"KWF1"
_HEADER = struct.Struct("<4sIIdddd I")


def save_binary(psi: Wavefunction, path) -> None:
    """Header (magic, dim, n, L_box, center xyz, rep) then interleaved re/im little-endian float64."""
    g = psi.grid
    rep = 0 if psi.rep == POSITION else 1
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, g.dim, g.n, g.L, *g.center, rep))
        inter = np.empty(psi.values.size * 2, dtype="<f8")
        flat = psi.values.ravel(order="C")
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        fh.write(inter.tobytes())


def load_binary(path) -> Wavefunction:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        magic, dim, n, L, cx, cy, cz, rep = _HEADER.unpack(head)
        if magic != _MAGIC:
            raise StateError("not a wavefunction snapshot")
        data = np.frombuffer(fh.read(), dtype="<f8")
    g = GridSpec(dim, n, L, (cx, cy, cz))
    if data.size != 2 * n ** dim:
        raise StateError("truncated snapshot payload")
    vals = (data[0::2] + 1j * data[1::2]).reshape(g.shape)
    return Wavefunction(vals, g, POSITION if rep == 0 else MOMENTUM)


def export_csv_slice(psi: Wavefunction, path, axis: int = 0) -> None:
    """Line through the grid centre along ``axis``: coordinate, re, im, |psi|^2."""
    g = psi.grid
    idx = [g.n // 2] * g.dim
    idx[axis] = slice(None)
    line = psi.values[tuple(idx)]
    if psi.rep == POSITION:
        coord = g.lab_axes()[axis]
        order = np.arange(g.n)
    else:
        coord = g.k_axis()
        order = np.argsort(coord)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x" if psi.rep == POSITION else "k", "re", "im", "abs2"])
        for j in order:
            v = line[j]
            w.writerow([repr(float(coord[j])), repr(float(v.real)), repr(float(v.imag)),
                        repr(float(abs(v) ** 2))])
