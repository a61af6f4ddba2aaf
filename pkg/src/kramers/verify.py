"""Acceptance criteria as callable experiments.

Each ``criterion_N(scale)`` runs one experiment and returns a
``CriterionResult``.  ``smoke`` shrinks every grid and ladder so the whole
suite runs in well under a minute (harness tests); ``desk`` is the acceptance
scale; ``full`` adds refinement rungs where they are cheap.
"""
from __future__ import annotations

import json
import math
import tempfile
import time
from dataclasses import dataclass, field, asdict
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from . import bounds as bd
from . import potential as pot
from .observables import (ConeObservable, cone_norm, ejection_kinematics, spreading,
                          survival_probability)
from .params import default_K0
from .propagator import (Absorber, DollardSpec, EvolutionPlan, apply_cutoff, dollard_phase,
                         dollard_propagate, evolve_split, free_kramers_exact, gauge_bridge)
from .pulse import PulseSpec, build_tables
from .state import (GridSpec, Wavefunction, gaussian_state, hydrogenic_ground_state,
                    to_momentum, to_position, MOMENTUM)

SCALES = ("smoke", "desk", "full")


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    measured: dict
    threshold: str
    runtime_s: float = 0.0
    note: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.id}: {self.name} ({self.threshold}) measured={_fmt(self.measured)}"

    def to_dict(self) -> dict:
        return asdict(self)


def _fmt(d: dict) -> str:
    parts = []
    for k, v in d.items():
        if isinstance(v, float):
            parts.append(f"{k}={v:.4g}")
        elif isinstance(v, (list, tuple)) and v and isinstance(v[0], float):
            parts.append(f"{k}=[" + ", ".join(f"{x:.3g}" for x in v) + "]")
        else:
            parts.append(f"{k}={v}")
    return "; ".join(parts)


def _l2(a: Wavefunction, b: Wavefunction) -> float:
    return math.sqrt(float(np.sum(np.abs(a.values - b.values) ** 2)) * a.measure)


def _timed(fn):
    def wrapper(scale: str = "desk") -> CriterionResult:
        if scale not in SCALES:
            raise ValueError(f"unknown scale {scale!r}")
        t = time.perf_counter()
        res = fn(scale)
        res.runtime_s = time.perf_counter() - t
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ---------------------------------------------------------------- 1: exact free oracle

@_timed
def criterion_1(scale: str) -> CriterionResult:
    """Split-step Kramers (V = 0) against the exact free propagator; Strang order."""
    cases = [(1, 1024, 40.0), (2, 256, 20.0)] if scale != "smoke" else [(1, 256, 20.0), (2, 64, 12.0)]
    dt, t1 = 0.005, 0.6   # t1 inside the pulse so E(t1) != 0 and the dt^2 term survives
    tab = build_tables(PulseSpec("circular_modulated", lam=20.0, T=1.0, omega=7 * math.pi))
    measured, ok = {}, True
    for dim, n, L in cases:
        g = GridSpec(dim, n, L)
        psi = gaussian_state(g, 1.0, p0=(0.5, -0.3, 0.0))
        exact = free_kramers_exact(psi, 0.0, t1, tab)
        u1 = evolve_split(psi, EvolutionPlan(0.0, t1, dt), tab, None).final
        u2 = evolve_split(psi, EvolutionPlan(0.0, t1, dt / 2), tab, None).final
        e1, e2 = _l2(u1, exact), _l2(u2, exact)
        rich = u2.with_values((4.0 * u2.values - u1.values) / 3.0)
        er = _l2(rich, exact)
        order = math.log2(e1 / e2)
        measured[f"{dim}D_order"] = order
        measured[f"{dim}D_err_refined"] = er
        ok = ok and abs(order - 2.0) <= 0.2 and er < 1e-8
    return CriterionResult(1, "exact-propagator oracle", ok, measured,
                           "Richardson-refined L2 error < 1e-8, order 2.0 +- 0.2")


# ---------------------------------------------------------------- 2: gauge equivalence

def gauge_difference(n: int, L: float, dt: float, lam: float = 2.0, soft_a: float = 1.0) -> float:
    tab = build_tables(PulseSpec("linear", lam=lam, T=1.0))
    V = pot.PotentialSpec("coulomb", Z=1.0, soft_a=soft_a)
    g = GridSpec(2, n, L)
    psi = hydrogenic_ground_state(g, 1.0, soft_a=soft_a)
    k = evolve_split(psi, EvolutionPlan(0.0, 1.0, dt), tab, V).final
    r = evolve_split(psi, EvolutionPlan(0.0, 1.0, dt, gauge="ritz"), tab, V).final
    kb = gauge_bridge(k, 1.0, tab, to="ritz")
    return _l2(kb, r) / r.norm


@_timed
def criterion_2(scale: str) -> CriterionResult:
    """Kramers + bridge against Ritz, linear pulse lam = 2, soft-core Z = 1."""
    if scale == "smoke":
        n, L, dt = 64, 24.0, 0.01
    else:
        n, L, dt = 256, 48.0, 0.005
    d1 = gauge_difference(n, L, dt)
    d2 = gauge_difference(2 * n, L, dt / 2)
    ok = d1 < 1e-3 and d1 / d2 >= 3.0
    return CriterionResult(2, "gauge equivalence", ok,
                           {"rel_diff": d1, "rel_diff_refined": d2, "ratio": d1 / d2},
                           "rel diff < 1e-3 and >= 3x decrease under (dt, h)/2")


# ---------------------------------------------------------------- 3, 4: kappa

@_timed
def criterion_3(scale: str) -> CriterionResult:
    """kappa_lambda minimiser, asymptote and brute-scan oracle for the linear pulse."""
    lams = (1e3, 1e4, 1e5)
    n_brute = 10 ** 6 if scale != "smoke" else 2 * 10 ** 5
    worst_s, worst_a, worst_b = 0.0, 0.0, 0.0
    for lam in lams:
        tab = build_tables(PulseSpec("linear", lam=lam, T=1.0))
        k = bd.kappa_lambda(tab, 1.0, 1.0)
        s = bd.kappa_linear_minimizer(1.0, 1.0, lam)
        worst_s = max(worst_s, abs(k.s0 ** 2 - s ** 2) / s ** 2)
        worst_a = max(worst_a, abs(k.value / bd.kappa_linear_asymptote(1.0, 1.0, lam) - 1.0))
        b = bd.kappa_brute(tab, 1.0, 1.0, n=n_brute)
        worst_b = max(worst_b, abs(b.value / k.value - 1.0))
    ok = worst_s < 1e-8 and worst_a < 0.05 and worst_b < 1e-6
    return CriterionResult(3, "kappa closed form", ok,
                           {"minimizer_rel": worst_s, "asymptote_rel": worst_a, "brute_rel": worst_b},
                           "s0^2 to 1e-8, asymptote within 5%, brute within 1e-6")


KAPPA_LADDER = tuple(float(x) for x in np.geomspace(1e3, 1e6, 7))


@_timed
def criterion_4(scale: str) -> CriterionResult:
    """Exponent of kappa_lambda along a lambda ladder in the R lam >> 1 regime."""
    ks = [bd.kappa_lambda(build_tables(PulseSpec("linear", lam=l, T=1.0)), 1.0, 1.0).value
          for l in KAPPA_LADDER]
    fit = bd.fit_scaling(KAPPA_LADDER, ks)
    ok = abs(fit.exponent + 0.25) <= 0.03
    return CriterionResult(4, "kappa scaling exponent", ok,
                           {"exponent": fit.exponent, "stderr": fit.stderr,
                            "lam_range": [KAPPA_LADDER[0], KAPPA_LADDER[-1]]},
                           "-0.25 +- 0.03")


# ---------------------------------------------------------------- 5: FKS trend

def fks_ladder(dim: int, n: int, L: float, dt: float, lams, soft_a: float = 0.1):
    """||(U(T,0) - U_0(T,0)) psi_0|| for a width-1 Gaussian and the short-range potential."""
    V = pot.PotentialSpec("short_range", V0=1.0, D=1.0, alpha=1.0, soft_a=soft_a)
    g = GridSpec(dim, n, L)
    psi = gaussian_state(g, 1.0)
    diffs, kappas = [], []
    for lam in lams:
        tab = build_tables(PulseSpec("linear", lam=lam, T=1.0))
        u = evolve_split(psi, EvolutionPlan(0.0, 1.0, dt, frame="comoving"), tab, V).final
        u0 = free_kramers_exact(psi, 0.0, 1.0, tab, frame="comoving")
        diffs.append(_l2(u, u0))
        kappas.append(bd.kappa_lambda(tab, 1.0, 1.0).value)
    return diffs, kappas


@_timed
def criterion_5(scale: str) -> CriterionResult:
    """Free-evolution error against the kappa-based bound: dominance and exponent."""
    lams = (5.0, 10.0, 20.0, 40.0)
    if scale == "smoke":
        setups = [(1, 1024, 32.0, 0.002)]
    elif scale == "desk":
        setups = [(1, 4096, 64.0, 0.0005), (2, 512, 24.0, 0.001)]
    else:
        setups = [(1, 8192, 64.0, 0.00025), (2, 512, 24.0, 0.0005)]
    measured, ok = {}, True
    for dim, n, L, dt in setups:
        diffs, kappas = fks_ladder(dim, n, L, dt, lams)
        bounds_ = [bd.fks_bound(1.0, 1.0, 1.0, 1.0, k) for k in kappas]
        c = max(d / b for d, b in zip(diffs, bounds_))
        dominated = all(d <= c * b * (1 + 1e-12) for d, b in zip(diffs, bounds_))
        e_meas = bd.fit_scaling(lams, diffs).exponent
        e_kap = bd.fit_scaling(lams, kappas).exponent
        measured[f"{dim}D_diffs"] = [float(x) for x in diffs]
        measured[f"{dim}D_fitted_c"] = c
        measured[f"{dim}D_exponent"] = e_meas
        measured[f"{dim}D_kappa_exponent"] = e_kap
        ok = ok and dominated and abs(e_meas - e_kap) <= 0.1
    return CriterionResult(5, "FKS lemma trend", ok, measured,
                           "single fitted c dominates; exponent within 0.1 of kappa's")


# ---------------------------------------------------------------- 6, 7: ionization ladder

CONE_LADDER = (5.0, 10.0, 20.0, 40.0, 80.0)


@dataclass
class RungResult:
    lam: float
    N: float
    survival: float
    velocity: list
    alignment: float
    opening_angle: float


def _ladder_setup(scale):
    if scale == "smoke":
        return dict(n=64, L=24.0, dt=0.01, surv_n=64, surv_L=16.0, surv_dt=0.005,
                    lams=(5.0, 20.0, 80.0), t_final=3.0)
    return dict(n=256, L=40.0, dt=0.002, surv_n=256, surv_L=24.0, surv_dt=0.001,
                lams=CONE_LADDER, t_final=5.0)


def ionization_rung(lam: float, n: int, L: float, dt: float, surv_n: int, surv_L: float,
                    surv_dt: float, t_final: float, soft_a: float = 0.5, theta: float = 0.2
                    ) -> RungResult:
    """One lambda of the cone/survival/kinematics experiment (2D, soft-core Z = 1, T = 1)."""
    T = 1.0
    tab = build_tables(PulseSpec("linear", lam=lam, T=T))
    V = pot.PotentialSpec("coulomb", Z=1.0, soft_a=soft_a)
    g = GridSpec(2, n, L)
    psi0 = hydrogenic_ground_state(g, 1.0, soft_a=soft_a)
    absorber = Absorber(0.125, 8, 0.2)
    plan = EvolutionPlan(0.0, t_final, dt, frame="comoving", absorber=absorber)
    final = evolve_split(psi0, plan, tab, V).final
    cone = ConeObservable(delta=0.1 * lam * tab.C_ass2, theta=theta)
    N = cone_norm(final, t_final, cone, tab)
    kin = ejection_kinematics(final, tab, t_final)
    v = kin.mean_velocity
    axis = cone.orientation * tab.F1 / np.linalg.norm(tab.F1)
    align = math.acos(max(-1.0, min(1.0, float(v @ axis) / float(np.linalg.norm(v)))))

    gs = GridSpec(2, surv_n, surv_L)
    s0 = hydrogenic_ground_state(gs, 1.0, soft_a=soft_a)
    ritz = evolve_split(s0, EvolutionPlan(0.0, T, surv_dt, gauge="ritz", absorber=absorber),
                        tab, V).final
    surv = survival_probability(ritz, s0)
    return RungResult(lam, N, surv, [float(x) for x in v], align, kin.opening_angle)


@lru_cache(maxsize=4)
def ionization_ladder(scale: str) -> tuple:
    s = _ladder_setup(scale)
    lams = s.pop("lams")
    return tuple(ionization_rung(l, **s) for l in lams)


@_timed
def criterion_6(scale: str) -> CriterionResult:
    """Cone capture increases with lambda and exceeds 0.9 at the top rung; survival decreases."""
    rungs = ionization_ladder(scale)
    Ns = [r.N for r in rungs]
    Ss = [r.survival for r in rungs]
    inc = all(b > a for a, b in zip(Ns, Ns[1:]))
    dec = all(b < a for a, b in zip(Ss, Ss[1:]))
    ok = inc and dec and Ns[-1] > 0.9
    return CriterionResult(6, "ionization-into-cone monotonicity", ok,
                           {"lams": [r.lam for r in rungs], "N": Ns, "survival": Ss},
                           "N strictly increasing, N(top) > 0.9, survival decreasing")


@_timed
def criterion_7(scale: str) -> CriterionResult:
    """Mean velocity along the cone axis -F(1); opening angle ~ 1/lambda."""
    rungs = ionization_ladder(scale)
    fit = bd.fit_scaling([r.lam for r in rungs], [r.opening_angle for r in rungs])
    theta = 0.2
    ok = rungs[-1].alignment < theta and abs(fit.exponent + 1.0) <= 0.3
    return CriterionResult(7, "ejection-direction asymptotics", ok,
                           {"alignment_top": rungs[-1].alignment,
                            "angles": [r.opening_angle for r in rungs],
                            "angle_exponent": fit.exponent},
                           "alignment < theta at top rung, exponent -1 +- 0.3")


# ---------------------------------------------------------------- 8: Dollard

def dollard_difference(lam: float, n: int, L: float, dt: float, t_end: float = 3.0,
                       soft_a: float = 0.5, R: float = 1.0) -> tuple[float, float]:
    """||(U_C(t,T) - U_Dollard(t,T)) psi_T|| with psi_T = U_0(T,0) chi(p/K0) psi_0 (comoving grid)."""
    T = 1.0
    tab = build_tables(PulseSpec("linear", lam=lam, T=T))
    K0 = default_K0(R, T, lam)
    dspec = DollardSpec(K0)
    g = GridSpec(2, n, L)
    psi0 = hydrogenic_ground_state(g, 1.0, soft_a=soft_a)
    cut, _ = apply_cutoff(psi0, dspec)
    cut = cut.normalized()
    psi_T = free_kramers_exact(cut, 0.0, T, tab, frame="comoving")
    V = pot.PotentialSpec("coulomb", Z=1.0, soft_a=soft_a)
    coul = evolve_split(psi_T, EvolutionPlan(T, t_end, dt, frame="comoving"), tab, V).final
    doll = dollard_propagate(psi_T, T, t_end, tab, 1.0, dspec, frame="comoving")
    return _l2(coul, doll), K0


@_timed
def criterion_8(scale: str) -> CriterionResult:
    """Coulomb against Dollard-modified free evolution at t = 3T along lambda in {10, 20, 40}."""
    lams = (10.0, 20.0, 40.0)
    n, L, dt = (64, 24.0, 0.01) if scale == "smoke" else (256, 32.0, 0.002)
    vals = [dollard_difference(l, n, L, dt) for l in lams]
    diffs = [v[0] for v in vals]
    ok = all(b < a for a, b in zip(diffs, diffs[1:]))
    return CriterionResult(8, "Dollard approximation trend", ok,
                           {"lams": list(lams), "diff": diffs, "K0": [v[1] for v in vals]},
                           "difference strictly decreasing in lambda")


# ---------------------------------------------------------------- 9: spreading

def dollard_free_state(psi0: Wavefunction, t: float, T: float, tables, Z: float,
                       dspec: DollardSpec) -> Wavefunction:
    """exp(-i t p^2) exp(i Z Phi(p, t - T)) chi(p/K0) psi_0, the state of the spreading lemma."""
    mom, _ = apply_cutoff(to_momentum(psi0), dspec)
    g = mom.grid
    chi_support = np.abs(mom.values) > 0
    phase = np.zeros(g.shape)
    if t > T and chi_support.any():
        kc = [np.broadcast_to(c, g.shape)[chi_support] for c in g.k_coords()]
        kv = np.stack(kc + [np.zeros_like(kc[0])] * (3 - g.dim), axis=1)
        phase[chi_support] = dollard_phase(kv, t - T, tables, Z, dspec.phase_quad_tol)
    vals = mom.values * np.exp(1j * phase) * np.exp(-1j * t * g.k2())
    return to_position(Wavefunction(vals, g, MOMENTUM))


@_timed
def criterion_9(scale: str) -> CriterionResult:
    """W(t) - W(T) grows at most linearly on [T, 10T], with a slope below the free-flight speed."""
    T, R, lam = 1.0, 1.0, 20.0
    n, L = (128, 48.0) if scale == "smoke" else (512, 64.0)
    tab = build_tables(PulseSpec("linear", lam=lam, T=T))
    dspec = DollardSpec(default_K0(R, T, lam))
    g = GridSpec(2, n, L)
    psi0 = hydrogenic_ground_state(g, 1.0)  # bare 2D state; the cutoff makes it smooth
    ts = np.linspace(T, 10 * T, 19)
    W = np.array([spreading(dollard_free_state(psi0, t, T, tab, 1.0, dspec)) for t in ts])
    rise = (W[1:] - W[0]) * R / (ts[1:] - T)
    a = float(rise.max())
    env = a * (ts - T) / R + W[0]
    violations = int(np.sum(W > env * (1 + 1e-12)))
    # independent ceiling: free flight moves |x| at most at speed ||2 p xi||, the
    # Dollard phase gradient adds O(Z / lam) on top
    mom, _ = apply_cutoff(to_momentum(psi0), dspec)
    speed = 2.0 * math.sqrt(float(np.sum(mom.grid.k2() * np.abs(mom.values) ** 2))
                            / float(np.sum(np.abs(mom.values) ** 2)))
    ceiling = speed * R * (1.0 + 1.0 / lam)
    ok = violations == 0 and a <= ceiling
    return CriterionResult(9, "spreading bound", ok,
                           {"a_fit": a, "a_ceiling": ceiling, "violations": violations,
                            "W_T": float(W[0]), "W_10T": float(W[-1])},
                           "zero violations of the fitted envelope on [T, 10T]; a <= 2||p xi|| R")


# ---------------------------------------------------------------- 10: unitarity, reproducibility

@_timed
def criterion_10(scale: str) -> CriterionResult:
    """Norm drift over 1e4 absorber-free steps, and bit-identical harness outputs."""
    from . import harness
    n = 64 if scale == "smoke" else 128
    steps = 2000 if scale == "smoke" else 10000
    g = GridSpec(2, n, 20.0)
    psi = hydrogenic_ground_state(g, 1.0, soft_a=0.5)
    tab = build_tables(PulseSpec("linear", lam=5.0, T=1.0))
    V = pot.PotentialSpec("coulomb", Z=1.0, soft_a=0.5)
    dt = 2.0 / steps
    final = evolve_split(psi, EvolutionPlan(0.0, 2.0, dt), tab, V).final
    drift = abs(final.norm - psi.norm) * (10000 / steps)

    cfg = harness.smoke_config()
    with tempfile.TemporaryDirectory() as tmp:
        a, b = Path(tmp) / "a", Path(tmp) / "b"
        harness.cmd_evolve(cfg, a)
        harness.cmd_evolve(cfg, b)
        same = all((a / f).read_bytes() == (b / f).read_bytes()
                   for f in ("observables.csv", "bounds.json", "config.echo"))
    ok = drift < 1e-10 and same
    return CriterionResult(10, "unitarity and reproducibility", ok,
                           {"norm_drift_per_1e4": drift, "bit_identical": same},
                           "drift < 1e-10 per 1e4 steps; identical outputs")


CRITERIA: dict[int, Callable[[str], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}


def run_all(scale: str = "desk", only=None, out=None, echo: Callable[[str], None] = print) -> dict:
    results = []
    for cid, fn in CRITERIA.items():
        if only and cid not in only:
            continue
        res = fn(scale)
        echo(res.line())
        results.append(res)
    verdict = {"scale": scale, "passed": all(r.passed for r in results),
               "criteria": [r.to_dict() for r in results]}
    if out is not None:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / "verdict.json").write_text(json.dumps(verdict, indent=2, default=float))
    return verdict
