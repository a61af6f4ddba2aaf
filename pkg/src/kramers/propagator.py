"""Time evolution: exact free Kramers flow, Strang split-step solvers, gauge bridge,
static Coulomb evolution and the Dollard-modified long-time dynamics.

Sign conventions (kinetic operator p^2, charge absorbed into A):
  Kramers  H_K(t) = (p - A(t))^2 + V(x)
  Ritz     H_R(t) = p^2 + V(x) + E(t).x,     E = dA/dt
  bridge   psi_R = exp(-i A(t).x) psi_K
A free Kramers packet is displaced by -2 int A, i.e. by -2 lam T G(t/T).

Two frames are available for the Kramers gauge.  ``lab`` keeps the grid fixed.
``comoving`` writes H_K = exp(2i p.a) [p^2 + V(x - a)] exp(-2i p.a) + |A|^2 with
a(t) = int A, steps the samples with the moving potential and relabels the grid
centre by -2a, so a packet that leaves the nucleus at speed ~2 lam never reaches
the box edge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Callable, Optional, Sequence

import numpy as np

from . import potential as pot
from .numerics import adaptive_simpson_batch, QuadratureError
from .pulse import PulseTables
from .state import (GridSpec, Wavefunction, POSITION, MOMENTUM, fftn, ifftn,
                    to_momentum, to_position)

GAUGES = ("kramers", "ritz")
FRAMES = ("lab", "comoving")


class NumericalAbort(RuntimeError):
    """NaN/overflow or a violated run-time precondition during evolution."""


class DenominatorAbort(NumericalAbort):
    """Dollard phase denominator fell below its guaranteed lower bound."""


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class Absorber:
    """cos^power masks over boundary strips; widths are fractions of L_box and k_max."""
    width: float = 0.125
    power: int = 8
    momentum_width: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.width < 0.25:
            raise PlanError("absorber width must lie in (0, L_box/4)")
        if not 0.0 <= self.momentum_width < 0.5:
            raise PlanError("momentum absorber width must lie in [0, k_max/2)")
        if self.power < 1:
            raise PlanError("absorber power must be >= 1")


@dataclass(frozen=True)
class EvolutionPlan:
    t0: float
    t1: float
    dt: float
    gauge: str = "kramers"
    absorber: Optional[Absorber] = None
    frame: str = "lab"
    check_every: int = 50

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise PlanError("dt must be positive")
        if self.t1 < self.t0:
            raise PlanError("t1 must be >= t0")
        n = (self.t1 - self.t0) / self.dt
        if abs(n - round(n)) > 1e-6 * max(1.0, n):
            raise PlanError(f"(t1 - t0)/dt = {n} is not an integer")
        if self.gauge not in GAUGES:
            raise PlanError(f"unknown gauge {self.gauge!r}")
        if self.frame not in FRAMES:
            raise PlanError(f"unknown frame {self.frame!r}")
        if self.gauge == "ritz" and self.frame != "lab":
            raise PlanError("the Ritz gauge is only available in the lab frame")
        if isinstance(self.absorber, dict):
            object.__setattr__(self, "absorber", Absorber(**self.absorber))

    @property
    def n_steps(self) -> int:
        return int(round((self.t1 - self.t0) / self.dt))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    steps: int = 0

    @property
    def final(self) -> Wavefunction:
        return self.states[-1]


# ---------------------------------------------------------------- helpers

def _A(tables: Optional[PulseTables], t: float) -> np.ndarray:
    return np.zeros(3) if tables is None else np.asarray(tables.A(t), dtype=float)


def _E(tables: Optional[PulseTables], t: float) -> np.ndarray:
    return np.zeros(3) if tables is None else np.asarray(tables.E(t), dtype=float)


def _int_A(tables, t0, t1) -> np.ndarray:
    return np.zeros(3) if tables is None else np.asarray(tables.int_A(t0, t1), dtype=float)


def _int_A2(tables, t0, t1) -> float:
    return 0.0 if tables is None else tables.int_A2(t0, t1)


def _axis_shape(dim: int, i: int) -> list:
    shape = [1] * dim
    shape[i] = -1
    return shape


def _separable(grid: GridSpec, vecs) -> np.ndarray:
    out = np.ones((1,) * grid.dim, dtype=complex)
    for i, v in enumerate(vecs):
        out = out * np.asarray(v).reshape(_axis_shape(grid.dim, i))
    return out


def _strip_mask(u: np.ndarray, edge: float, width: float, power: int) -> np.ndarray:
    """1 for |u| <= edge - width, cos^power ramp to 0 at |u| = edge."""
    d = np.clip((np.abs(u) - (edge - width)) / width, 0.0, 1.0)
    return np.cos(0.5 * np.pi * d) ** power


def position_mask(grid: GridSpec, absorber: Absorber) -> np.ndarray:
    m = _strip_mask(grid.local_axis(), grid.L, absorber.width * grid.L, absorber.power)
    return _separable(grid, [m] * grid.dim).real


def momentum_mask(grid: GridSpec, absorber: Absorber) -> np.ndarray:
    k = grid.k_axis()
    m = _strip_mask(k, grid.k_max, absorber.momentum_width * grid.k_max, absorber.power)
    return _separable(grid, [m] * grid.dim).real


# ---------------------------------------------------------------- exact free flow

def free_kramers_exact(psi: Wavefunction, t0: float, t1: float, tables: Optional[PulseTables],
                       factorized: bool = True, frame: str = "lab",
                       n_gauss: int = 48) -> Wavefunction:
    """exp(-i int_{t0}^{t1} (p - A)^2) applied exactly in momentum space.

    The factorised path multiplies exp(-i int|A|^2) exp(-i (t1-t0) k^2)
    exp(2i k.int A).  The unfactorised path integrates (k_i - A_i(tau))^2
    directly with panelled Gauss-Legendre quadrature (cross-check).  With
    ``frame='comoving'`` the result is carried on a grid whose centre moved by
    the packet displacement, so the position samples do not slide.
    """
    if t1 < t0:
        raise PlanError("free_kramers_exact needs t0 <= t1")
    if frame not in FRAMES:
        raise PlanError(f"unknown frame {frame!r}")
    rep = psi.rep
    mom = to_momentum(psi)
    g = mom.grid
    ks = [g.k_axis()] * g.dim
    IA = _int_A(tables, t0, t1)
    grid_out = g
    if frame == "comoving":
        # momentum samples refer to lab coordinates, so only the grid moves
        grid_out = g.shifted(np.asarray(g.center) - 2.0 * IA)
    if factorized:
        vecs = [np.exp(1j * (-(t1 - t0) * ks[i] ** 2 + 2.0 * ks[i] * IA[i])) for i in range(g.dim)]
        mult = _separable(g, vecs) * np.exp(-1j * _int_A2(tables, t0, t1))
    else:
        nodes, weights = _gauss_panels(tables, t0, t1, n_gauss)
        A = np.array([_A(tables, t) for t in nodes]) if len(nodes) else np.zeros((0, 3))
        vecs = []
        for i in range(g.dim):
            diff = ks[i][:, None] - A[None, :, i]
            vecs.append(np.exp(-1j * (diff ** 2 @ weights)))
        # axes beyond dim still carry |A_i|^2 through the scalar phase
        extra = sum(float(weights @ A[:, i] ** 2) for i in range(g.dim, 3))
        mult = _separable(g, vecs) * np.exp(-1j * extra)
    out = Wavefunction(mom.values * mult, grid_out, MOMENTUM)
    return to_position(out) if rep == POSITION else out


def _gauss_panels(tables, t0, t1, n):
    """Gauss-Legendre nodes on [t0, t1] split at the pulse edges, 4 panels per piece."""
    cuts = [t0, t1]
    if tables is not None:
        cuts += [c for c in (0.0, tables.T) if t0 < c < t1]
    cuts = sorted(cuts)
    x, w = np.polynomial.legendre.leggauss(n)
    nodes, weights = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        edges = np.linspace(a, b, 5)
        for lo, hi in zip(edges[:-1], edges[1:]):
            nodes.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
            weights.append(0.5 * (hi - lo) * w)
    if not nodes:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(nodes), np.concatenate(weights)


# ---------------------------------------------------------------- split-step

def evolve_split(psi: Wavefunction, plan: EvolutionPlan, tables: Optional[PulseTables],
                 potspec: Optional[pot.PotentialSpec], snapshot_times: Sequence[float] = (),
                 diag_every: int = 0, on_diag: Optional[Callable[[dict], None]] = None
                 ) -> Trajectory:
    """Strang split-step evolution; returns snapshots (the final state is always last).

    Per step of length dt with t_m the step midpoint:
      P_half . K . P_half,  P = exp(-i dt/2 V_eff),  K = exp(-i dt T(k))
    kramers/lab:      V_eff = V(x),           T = (k - A(t_m))^2
    kramers/comoving: V_eff = V(x - 2a(t_m)), T = k^2   (lab relabelling + |A|^2 phase)
    ritz:             V_eff = V(x) + E(t_m).x, T = k^2
    """
    psi = to_position(psi)
    g0 = psi.grid
    dt = plan.dt
    nsteps = plan.n_steps
    t0 = plan.t0
    dim = g0.dim
    k = g0.k_axis()
    comoving = plan.frame == "comoving"
    ritz = plan.gauge == "ritz"

    V = None if potspec is None else pot.on_grid(potspec, g0)
    half_static = None if V is None else np.exp(-0.5j * dt * V)
    xs = g0.lab_axes()
    pmask = position_mask(g0, plan.absorber) if plan.absorber else None
    kmask = None
    if plan.absorber and plan.absorber.momentum_width > 0:
        kmask = momentum_mask(g0, plan.absorber)
    kin_free = _separable(g0, [np.exp(-1j * dt * k * k)] * dim)
    if kmask is not None:
        kin_free = kin_free * kmask
    edge = None
    if ritz:
        w = (plan.absorber.width if plan.absorber else 0.125) * g0.L
        inner = (np.abs(g0.local_axis()) <= g0.L - w).astype(float)
        edge = 1.0 - _separable(g0, [inner] * dim).real

    snaps = sorted(set(int(round((ts - t0) / dt)) for ts in snapshot_times
                       if t0 <= ts <= plan.t1 + 1e-12))
    snaps = [s for s in snaps if 0 <= s <= nsteps]
    traj = Trajectory()
    vals = psi.values.copy()
    tot0 = max(float(np.sum(np.abs(vals) ** 2)), 1e-300)

    def emit_state(step):
        t = t0 + step * dt
        if comoving:
            shift = 2.0 * _int_A(tables, t0, t)
            ph = np.exp(-1j * _int_A2(tables, t0, t))
            return Wavefunction(vals * ph, g0.shifted(np.asarray(g0.center) - shift))
        return Wavefunction(vals.copy(), g0)

    def diag(step):
        st = emit_state(step)
        t = t0 + step * dt
        row = {"t": t, "step": step, "norm": st.norm}
        n2 = row["norm"] ** 2
        dens = np.abs(st.values) ** 2 * st.measure
        for i, x in enumerate(st.grid.lab_coords()):
            row["x" + "xyz"[i]] = float(np.sum(dens * x)) / n2 if n2 > 0 else math.nan
        row["energy"] = _energy_gauge(st, tables, potspec, t, plan.gauge)
        traj.diagnostics.append(row)
        if on_diag is not None:
            on_diag(row)

    if 0 in snaps:
        traj.times.append(t0)
        traj.states.append(emit_state(0))
    if diag_every:
        diag(0)

    for step in range(nsteps):
        tm = t0 + (step + 0.5) * dt
        if comoving:
            if V is None:
                half = None
            else:
                d = 2.0 * _int_A(tables, t0, tm)
                half = np.exp(-0.5j * dt * pot.on_grid(potspec, g0, shift=d))
            kin = kin_free
        elif ritz:
            E = _E(tables, tm)
            lin = _separable(g0, [np.exp(-0.5j * dt * E[i] * xs[i]) for i in range(dim)])
            half = lin if half_static is None else half_static * lin
            kin = kin_free
        else:
            A = _A(tables, tm)
            kin = _separable(g0, [np.exp(-1j * dt * (k - A[i]) ** 2) for i in range(dim)])
            if A[dim:].any():
                kin = kin * np.exp(-1j * dt * float(np.sum(A[dim:] ** 2)))
            if kmask is not None:
                kin = kin * kmask
            half = half_static
        if half is not None:
            vals = half * vals
        vals = ifftn(kin * fftn(vals))
        if half is not None:
            vals = half * vals
        if pmask is not None:
            vals = vals * pmask
        done = step + 1
        if done % plan.check_every == 0 or done == nsteps:
            tot = float(np.sum(np.abs(vals) ** 2))
            if not math.isfinite(tot):
                raise NumericalAbort(f"non-finite wavefunction at step {done}, t={t0 + done * dt:g}")
            if ritz:
                # edge mass measured against the initial norm
                frac = float(np.sum(edge * np.abs(vals) ** 2)) / tot0
                if frac > 1e-3:
                    raise NumericalAbort(
                        f"Ritz-gauge mass {frac:.2e} in the edge strip at t={t0 + done * dt:g}")
        if done in snaps:
            traj.times.append(t0 + done * dt)
            traj.states.append(emit_state(done))
        if diag_every and done % diag_every == 0:
            diag(done)
    traj.steps = nsteps
    if not snaps or snaps[-1] != nsteps:
        traj.times.append(plan.t1)
        traj.states.append(emit_state(nsteps))
    return traj


def _energy_gauge(psi: Wavefunction, tables, potspec, t, gauge) -> float:
    """<H(t)> in the given gauge (Kramers: (k - A)^2 + V, Ritz: k^2 + V + E.x)."""
    mom = to_momentum(psi)
    g = psi.grid
    n2 = psi.norm ** 2
    if n2 == 0:
        return math.nan
    A = _A(tables, t) if gauge == "kramers" else np.zeros(3)
    kin = sum((kc - A[i]) ** 2 for i, kc in enumerate(g.k_coords()))
    e = float(np.sum(kin * np.abs(mom.values) ** 2)) * mom.measure
    dens = np.abs(psi.values) ** 2 * psi.measure
    if potspec is not None:
        e += float(np.sum(pot.on_grid(potspec, g) * dens))
    if gauge == "ritz":
        E = _E(tables, t)
        e += float(sum(np.sum(E[i] * x * dens) for i, x in enumerate(g.lab_coords())))
    return e / n2


# ---------------------------------------------------------------- gauge bridge

def gauge_bridge(psi: Wavefunction, t: float, tables: Optional[PulseTables],
                 to: str = "ritz") -> Wavefunction:
    """psi_R = exp(-i A(t).x) psi_K  (to='ritz');  psi_K = exp(+i A(t).x) psi_R  (to='kramers')."""
    if psi.rep != POSITION:
        raise PlanError("gauge_bridge expects the position representation")
    if to not in ("ritz", "kramers"):
        raise PlanError("to must be 'ritz' or 'kramers'")
    A = _A(tables, t)
    sign = -1.0 if to == "ritz" else 1.0
    g = psi.grid
    ph = _separable(g, [np.exp(1j * sign * A[i] * x) for i, x in enumerate(g.lab_axes())])
    return psi.with_values(psi.values * ph)


def post_pulse_coulomb(psi_T: Wavefunction, T: float, t: float, Z: float, soft_a: float = 0.0,
                       dt: float = 1e-3, frame: str = "lab", tables=None,
                       absorber: Optional[Absorber] = None,
                       snapshot_times: Sequence[float] = ()) -> Wavefunction | Trajectory:
    """Evolution under p^2 - Z/sqrt(|x|^2 + a^2) from T to t.

    Without ``tables`` this is the static field-free problem.  Passing the
    pulse tables evolves with the frozen vector potential A(T) in the Kramers
    gauge instead (which is the static problem conjugated by the bridge).
    Returns the final state, or the whole trajectory when snapshots are asked for.
    """
    if t < T:
        raise PlanError("post_pulse_coulomb needs t >= T")
    n = max(1, int(math.ceil((t - T) / dt - 1e-9)))
    plan = EvolutionPlan(T, t, (t - T) / n, "kramers", absorber, frame)
    spec = pot.PotentialSpec("coulomb", Z=Z, soft_a=soft_a) if Z != 0 else None
    traj = evolve_split(psi_T, plan, tables, spec, snapshot_times)
    return traj if snapshot_times else traj.final


# ---------------------------------------------------------------- cutoff and Dollard

def cutoff_profile(r) -> np.ndarray:
    """C-infinity cutoff: 1 on [0, 1/2], 0 on [1, inf), e(1-u)/(e(1-u) + e(u)) in between.

    u = 2r - 1 and e(x) = exp(-1/x); every derivative vanishes at both joins.
    """
    r = np.abs(np.asarray(r, dtype=float))
    u = np.clip(2.0 * r - 1.0, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(u < 1.0, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
        b = np.where(u > 0.0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        mid = a / (a + b)
    return np.where(r <= 0.5, 1.0, np.where(r >= 1.0, 0.0, mid))


@dataclass(frozen=True)
class DollardSpec:
    K0: float
    phase_quad_tol: float = 1e-8

    def __post_init__(self):
        if not (self.K0 > 0):
            raise PlanError("K0 must be positive")


def apply_cutoff(psi: Wavefunction, dspec: DollardSpec) -> tuple[Wavefunction, float]:
    """chi(|k|/K0) in momentum space; returns the cut state and the removed mass."""
    mom = to_momentum(psi)
    chi = cutoff_profile(np.sqrt(mom.grid.k2()) / dspec.K0) if math.isfinite(dspec.K0) else 1.0
    out = mom.with_values(mom.values * chi)
    removed = mom.norm ** 2 - out.norm ** 2
    return (to_position(out) if psi.rep == POSITION else out), float(removed)


def dollard_phase(k: np.ndarray, tau_max: float, tables: PulseTables, Z: float,
                  tol: float = 1e-8, check: bool = True) -> np.ndarray:
    """Z int_0^{tau_max} d tau / |2 tau k - 2 lam T G(1 + tau/T)| for each row of k (m, 3).

    Adaptive Simpson per momentum.  With ``check`` a denominator below
    lam T C_ass2 / 2 at any node raises DenominatorAbort.
    """
    k = np.atleast_2d(np.asarray(k, dtype=float))
    if k.shape[1] < 3:
        k = np.pad(k, ((0, 0), (0, 3 - k.shape[1])))
    m = k.shape[0]
    if Z == 0.0 or tau_max == 0.0 or m == 0:
        return np.zeros(m)
    lam, T = tables.lam, tables.T
    floor = lam * T * tables.C_ass2 / 2.0
    lowest = [math.inf]

    def integrand(tau, idx):
        s = 1.0 + tau / T
        Gv = tables.G1 + (s - 1.0)[:, None] * tables.F1   # G is affine for s >= 1
        d = np.linalg.norm(2.0 * tau[:, None] * k[idx] - 2.0 * lam * T * Gv, axis=1)
        lowest[0] = min(lowest[0], float(d.min()))
        return 1.0 / d

    # tolerance is on the phase Z * integral
    try:
        with np.errstate(divide="ignore", invalid="ignore"):    # d = 0 surfaces as an abort
            val = adaptive_simpson_batch(integrand, np.zeros(m), np.full(m, float(tau_max)),
                                         tol / abs(Z))
    except QuadratureError as exc:
        raise DenominatorAbort(f"Dollard phase quadrature failed: {exc}") from exc
    if check and lowest[0] < floor:
        raise DenominatorAbort(
            f"Dollard denominator {lowest[0]:.3e} below lam T C_ass2 / 2 = {floor:.3e}")
    return Z * val


def dollard_phase_closed_form(k: np.ndarray, tau_max: float, tables: PulseTables,
                              Z: float) -> np.ndarray:
    """Closed form of the same integral: |u tau - w| with u = 2(k - lam F1), w = 2 lam T G1."""
    k = np.atleast_2d(np.asarray(k, dtype=float))
    if k.shape[1] < 3:
        k = np.pad(k, ((0, 0), (0, 3 - k.shape[1])))
    u = 2.0 * (k - tables.lam * tables.F1)
    w = 2.0 * tables.lam * tables.T * tables.G1
    a = np.sum(u * u, axis=1)
    b = -2.0 * u @ w
    c = float(w @ w)
    s = float(tau_max)
    out = np.empty(len(k))
    small = a < 1e-300
    out[small] = s / math.sqrt(c)
    aa, bb = a[~small], b[~small]
    sa = np.sqrt(aa)
    top = 2.0 * sa * np.sqrt(aa * s * s + bb * s + c) + 2.0 * aa * s + bb
    bot = 2.0 * sa * math.sqrt(c) + bb
    out[~small] = np.log(top / bot) / sa
    return Z * out


def dollard_propagate(psi_T: Wavefunction, T: float, t: float, tables: PulseTables, Z: float,
                      dspec: DollardSpec, frame: str = "lab") -> Wavefunction:
    """U_0(t, T) exp(i Z Phi(k, t - T)) chi(|k|/K0) psi_T in the Kramers gauge.

    The phase is evaluated only where chi > 0 (elsewhere the state vanishes).
    """
    if t < T:
        raise PlanError("dollard_propagate needs t >= T")
    rep = psi_T.rep
    mom = to_momentum(psi_T)
    g = mom.grid
    kabs = np.sqrt(g.k2())
    chi = cutoff_profile(kabs / dspec.K0)
    support = chi > 0
    phase = np.zeros(g.shape)
    if Z != 0.0 and t > T and support.any():
        kc = [np.broadcast_to(c, g.shape)[support] for c in g.k_coords()]
        kv = np.stack(kc + [np.zeros_like(kc[0])] * (3 - g.dim), axis=1)
        phase[support] = dollard_phase(kv, t - T, tables, Z, dspec.phase_quad_tol)
    cut = mom.with_values(mom.values * chi * np.exp(1j * phase))
    return free_kramers_exact(cut if rep == MOMENTUM else to_position(cut), T, t, tables,
                              frame=frame)
