"""Analytic side: kappa_lambda, the free-evolution error bound and both ionization lower bounds.

All theorem constants are configurable knobs (default 1) and are echoed in
every report; only exponents and fitted-constant dominance are meaningful.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, optimize, stats

from .numerics import golden_section
from .params import PhysParams
from .pulse import PulseTables, inverse_G_integral

S0_FLOOR = 1e-6


class BoundsError(ValueError):
    pass


@dataclass(frozen=True)
class KappaResult:
    value: float
    s0: float
    boundary: bool = False     # infimum approached at the bracket edge rather than attained inside


def _kappa_objective(tables: PulseTables, R: float, T: float, lam: float):
    def phi(s0: float) -> float:
        return T / R ** 2 * s0 + inverse_G_integral(tables, s0, weight=True) / (R * lam)
    return phi


def _kappa_slope(tables, R, T, lam):
    def dphi(s0: float) -> float:
        g = float(np.linalg.norm(tables.G(s0)))
        if g == 0.0:
            return -math.inf
        return T / R ** 2 - (1.0 + s0 ** -2) / g / (R * lam)
    return dphi


def kappa_lambda(tables: PulseTables, R: float, T: float, lam: Optional[float] = None,
                 xtol: float = 1e-12) -> KappaResult:
    """inf over s0 in (0,1) of (T/R^2) s0 + (1/(R lam)) int_{s0}^1 (1 + tau^-2)/|G(tau)| d tau.

    Golden-section search in log s0 on [1e-6, 1], then the stationarity
    condition is polished with Brent's method so the minimiser is accurate to
    round-off.  ``lam`` defaults to the amplitude stored in the tables.
    """
    lam = tables.lam if lam is None else lam
    for name, v in (("R", R), ("T", T), ("lam", lam)):
        if not (math.isfinite(v) and v > 0):
            raise BoundsError(f"{name} must be positive")
    phi = _kappa_objective(tables, R, T, lam)
    probes = [phi(s) for s in np.geomspace(S0_FLOOR, 0.5, 8)]
    if not any(math.isfinite(p) for p in probes):
        raise BoundsError("int |G|^-1 diverges at every sampled s0 (assumption ass0 violated)")

    u_star, _ = golden_section(lambda u: phi(math.exp(u)), math.log(S0_FLOOR), 0.0, xtol=xtol)
    s_star = math.exp(u_star)
    dphi = _kappa_slope(tables, R, T, lam)
    boundary = False
    if dphi(1.0) <= 0.0:
        s_star, boundary = 1.0, True
    elif dphi(S0_FLOOR) >= 0.0:
        s_star, boundary = S0_FLOOR, True
    else:
        lo, hi = s_star * 0.5, min(s_star * 2.0, 1.0)
        if dphi(lo) < 0.0 < dphi(hi):
            s_star = optimize.brentq(dphi, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return KappaResult(float(phi(s_star)), float(s_star), boundary)


def kappa_brute(tables: PulseTables, R: float, T: float, lam: Optional[float] = None,
                n: int = 10 ** 6) -> KappaResult:
    """Oracle: dense log-grid scan with the inner integral from a cumulative trapezoid rule."""
    lam = tables.lam if lam is None else lam
    u = np.linspace(math.log(S0_FLOOR), 0.0, n)
    tau = np.exp(u)
    g = np.linalg.norm(tables.G(tau), axis=-1)
    integrand = tau * (1.0 + tau ** -2) / g            # d tau = tau du
    tail = integrate.cumulative_trapezoid(integrand[::-1], -u[::-1], initial=0.0)[::-1]
    vals = T / R ** 2 * tau + tail / (R * lam)
    i = int(np.argmin(vals))
    return KappaResult(float(vals[i]), float(tau[i]), i in (0, n - 1))


def kappa_linear_minimizer(R: float, T: float, lam: float) -> float:
    """Closed-form minimiser for the linear pulse: s0^2 = (R/(T lam))(1 + sqrt(1 + 2 T lam / R))."""
    return math.sqrt(R / (T * lam) * (1.0 + math.sqrt(1.0 + 2.0 * T * lam / R)))


def kappa_linear_asymptote(R: float, T: float, lam: float) -> float:
    """(4/3)(2 T^3 / (R^7 lam))^(1/4), valid for R lam >> 1."""
    return 4.0 / 3.0 * (2.0 * T ** 3 / (R ** 7 * lam)) ** 0.25


def fks_bound(V0: float, D: float, R: float, T: float, kappa: float, C: float = 1.0) -> float:
    """C V0 D R (1 + R^4/T^2) kappa."""
    return C * V0 * D * R * (1.0 + R ** 4 / T ** 2) * kappa


@dataclass(frozen=True)
class LowerBound:
    value: float
    vacuous: bool
    terms: dict
    constants: tuple

    def to_dict(self) -> dict:
        return {"value": self.value, "vacuous": self.vacuous, "terms": dict(self.terms),
                "constants": list(self.constants)}


def _cone_term(p: PhysParams, C_ass2: float, t: float) -> float:
    gap = C_ass2 * p.lam - p.delta
    if gap <= 0.0:
        return math.inf
    return (1.0 / (p.R * gap) + 1.0 / (p.R * p.lam * math.tan(p.theta))) * (1.0 + p.R ** 2 / t)


def thm_sr_lower_bound(params: PhysParams, tables: PulseTables, t: float,
                       kappa: Optional[float] = None, C: Sequence[float] = (1.0, 1.0, 1.0)
                       ) -> LowerBound:
    """Short-range lower bound on the probability of ejection into the cone at time t >= T."""
    p = params
    if t <= 0:
        raise BoundsError("t must be positive")
    if kappa is None:
        kappa = kappa_lambda(tables, p.R, p.T, p.lam).value
    C1, C2, C3 = (float(c) for c in C)
    band = 1.0 + p.R ** 4 / p.T ** 2
    d1 = C1 * _cone_term(p, tables.C_ass2, t)
    if p.alpha > 0:
        d2 = C2 * p.V0 * p.T / (p.alpha * (p.lam * p.T / p.D) ** (1.0 + p.alpha)) * band
    else:
        d2 = math.inf
    d3 = C3 * p.V0 * p.D * p.R * band * kappa
    value = 1.0 - d1 - d2 - d3
    vac = (not math.isfinite(value)) or value <= 0.0
    return LowerBound(value, vac, {"cone": d1, "potential_tail": d2, "free_error": d3,
                                   "kappa": kappa}, (C1, C2, C3))


def thm_cou_lower_bound(params: PhysParams, tables: PulseTables, t: float,
                        kappa: Optional[float] = None, C: Sequence[float] = (1.0, 1.0, 1.0)
                        ) -> LowerBound:
    """Coulomb lower bound on the probability of ejection into the cone at time t >= T."""
    p = params
    if t <= 0:
        raise BoundsError("t must be positive")
    if kappa is None:
        kappa = kappa_lambda(tables, p.R, p.T, p.lam).value
    C1, C2, C3 = (float(c) for c in C)
    band = 1.0 + p.R ** 4 / p.T ** 2
    d1 = C1 * _cone_term(p, tables.C_ass2, t)
    d2 = C2 * p.Z * p.R * band * kappa
    d3 = C3 * (p.R * p.lam) ** (-1.0 / 7.0) * (p.Z * p.T ** 1.5 / p.R ** 2) ** (4.0 / 7.0)
    value = 1.0 - d1 - d2 - d3
    vac = (not math.isfinite(value)) or value <= 0.0
    return LowerBound(value, vac, {"cone": d1, "free_error": d2, "long_range": d3,
                                   "kappa": kappa}, (C1, C2, C3))


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    stderr: float
    intercept: float
    n: int


def fit_scaling(xs, ys) -> ScalingFit:
    """Least-squares slope of log(y) against log(x)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise BoundsError("need at least two matching points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise BoundsError("fit_scaling needs positive data")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0:
        raise BoundsError("x values must not all coincide")
    if x.size == 2:
        slope = (ly[1] - ly[0]) / (lx[1] - lx[0])
        return ScalingFit(float(slope), 0.0, float(ly[0] - slope * lx[0]), 2)
    res = stats.linregress(lx, ly)
    return ScalingFit(float(res.slope), float(res.stderr), float(res.intercept), int(x.size))


@dataclass
class BoundReport:
    kappa: float
    s0: float
    fks_bound: float
    thm_sr: LowerBound
    thm_cou: LowerBound
    t: float
    constants_used: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kappa": {"value": self.kappa, "s0": self.s0},
                "fks_bound": self.fks_bound,
                "thm_sr_bound": self.thm_sr.to_dict(),
                "thm_cou_bound": self.thm_cou.to_dict(),
                "t": self.t,
                "constants_used": self.constants_used,
                "provenance": self.provenance}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_jsonable, **kw)


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not serialisable: {type(o)}")


def bound_report(params: PhysParams, tables: PulseTables, t: Optional[float] = None,
                 C_sr: Sequence[float] = (1.0, 1.0, 1.0), C_cou: Sequence[float] = (1.0, 1.0, 1.0),
                 C_fks: float = 1.0) -> BoundReport:
    """Every analytic quantity at one parameter point (no grid is allocated)."""
    t = params.T if t is None else t
    k = kappa_lambda(tables, params.R, params.T, params.lam)
    rep = BoundReport(
        kappa=k.value, s0=k.s0,
        fks_bound=fks_bound(params.V0, params.D, params.R, params.T, k.value, C_fks),
        thm_sr=thm_sr_lower_bound(params, tables, t, k.value, C_sr),
        thm_cou=thm_cou_lower_bound(params, tables, t, k.value, C_cou),
        t=t,
        constants_used={"C_sr": list(C_sr), "C_cou": list(C_cou), "C_fks": C_fks,
                        "C_ass2": tables.C_ass2},
        provenance={"params": asdict(params), "pulse": tables.spec.to_dict(),
                    "quad_tol": tables.quad_tol, "s0_floor": S0_FLOOR,
                    "kappa_boundary": k.boundary},
    )
    return rep
