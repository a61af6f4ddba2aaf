"""Pulse families and the integral hierarchy f -> F -> G on dimensionless time s = t/T.

E(t) = (lam/T) f(t/T),  A(t) = lam F(t/T),  int_{-inf}^t A = lam T G(t/T).

F vanishes for s < 0 and is frozen at F(1) for s >= 1; G vanishes for s < 0 and
continues affinely, G(s) = G(1) + (s - 1) F(1), for s >= 1.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy import integrate
from scipy.optimize import minimize_scalar

from .numerics import adaptive_simpson, adaptive_simpson_batch, simpson_intervals

FAMILIES = ("linear", "circular_modulated", "custom_sampled")


class PulseError(ValueError):
    pass


def sin2_envelope(s):
    s = np.asarray(s, dtype=float)
    return np.where((s >= 0.0) & (s <= 1.0), np.sin(np.pi * s) ** 2, 0.0)


def flat_envelope(s):
    s = np.asarray(s, dtype=float)
    return np.where((s >= 0.0) & (s <= 1.0), 1.0, 0.0)


ENVELOPES = {"sin2": sin2_envelope, "flat": flat_envelope}


@dataclass(frozen=True)
class PulseSpec:
    family: str = "linear"
    lam: float = 1.0
    T: float = 1.0
    epsilon: tuple = (1.0, 0.0, 0.0)
    omega: float = 8 * math.pi
    envelope: object = "sin2"           # name in ENVELOPES or a callable on [0, 1]
    samples: Optional[tuple] = None     # custom_sampled: f on a uniform grid of [0, 1], rows of 3

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise PulseError(f"unknown pulse family {self.family!r}")
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise PulseError("lam must be finite and non-negative")
        if not (math.isfinite(self.T) and self.T > 0):
            raise PulseError("T must be positive")
        if len(self.epsilon) != 3:
            raise PulseError("epsilon must be a 3-vector")
        if self.family == "custom_sampled":
            if self.samples is None or len(self.samples) < 4:
                raise PulseError("custom_sampled needs at least 4 samples of f")

    def envelope_fn(self) -> Callable:
        if callable(self.envelope):
            return self.envelope
        try:
            return ENVELOPES[self.envelope]
        except KeyError:
            raise PulseError(f"unknown envelope {self.envelope!r}") from None

    def to_dict(self) -> dict:
        if callable(self.envelope):
            raise PulseError("callable envelopes cannot be serialised")
        d = {"family": self.family, "lam": self.lam, "T": self.T,
             "epsilon": list(self.epsilon), "omega": self.omega, "envelope": self.envelope}
        if self.samples is not None:
            d["samples"] = [list(r) for r in self.samples]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PulseSpec":
        d = dict(d)
        if "epsilon" in d:
            d["epsilon"] = tuple(float(x) for x in d["epsilon"])
        if d.get("samples") is not None:
            d["samples"] = tuple(tuple(float(x) for x in r) for r in d["samples"])
        return cls(**d)


def _check_envelope(h: Callable, symmetric: bool) -> None:
    outside = np.array([-1.0, -0.25, -1e-6, 1.0 + 1e-6, 1.25, 2.0])
    if np.any(np.asarray(h(outside)) != 0.0):
        raise PulseError("envelope is not supported in [0, 1]")
    s = np.linspace(0.0, 1.0, 257)
    v = np.asarray(h(s), dtype=float)
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise PulseError("envelope must be finite and non-negative")
    if symmetric:
        if not np.allclose(v, v[::-1], atol=1e-12 * max(1.0, v.max())):
            raise PulseError("circular envelope must be symmetric about s = 1/2")
        upper = v[128:]
        if np.any(np.diff(upper) > 1e-12 * max(1.0, v.max())):
            raise PulseError("circular envelope must decrease away from s = 1/2")


def _profile(spec: PulseSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorised f(s) with shape (m, 3), zero outside [0, 1]."""
    if spec.family == "circular_modulated":
        h = spec.envelope_fn()
        _check_envelope(h, symmetric=True)
        w = spec.omega

        def f(s):
            s = np.asarray(s, dtype=float)
            amp = np.asarray(h(s), dtype=float)
            ph = w * (s - 0.5)
            return np.stack([amp * np.cos(ph), amp * np.sin(ph), np.zeros_like(s)], axis=-1)
        return f
    if spec.family == "custom_sampled":
        data = np.asarray(spec.samples, dtype=float)
        if data.ndim != 2 or data.shape[1] != 3 or not np.all(np.isfinite(data)):
            raise PulseError("custom samples must be a finite (m, 3) array")
        grid = np.linspace(0.0, 1.0, len(data))
        spline = CubicSpline(grid, data, axis=0)

        def f(s):
            s = np.asarray(s, dtype=float)
            inside = ((s >= 0.0) & (s <= 1.0))[..., None]
            return np.where(inside, spline(np.clip(s, 0.0, 1.0)), 0.0)
        return f
    eps = np.asarray(spec.epsilon, dtype=float)

    def f(s):
        s = np.asarray(s, dtype=float)
        inside = ((s >= 0.0) & (s <= 1.0)).astype(float)
        return inside[..., None] * eps
    return f


@dataclass(frozen=True, eq=False)
class PulseTables:
    """Evaluators for f, F, G (vector valued, shape (..., 3)) plus their endpoint values."""
    spec: PulseSpec
    f: Callable
    F1: np.ndarray
    G1: np.ndarray
    C_ass2: float
    s_grid: Optional[np.ndarray] = None
    F_grid: Optional[np.ndarray] = None
    G_grid: Optional[np.ndarray] = None
    _F_in: Optional[Callable] = field(default=None, repr=False)
    _G_in: Optional[Callable] = field(default=None, repr=False)
    quad_tol: float = 1e-10

    @property
    def lam(self) -> float:
        return self.spec.lam

    @property
    def T(self) -> float:
        return self.spec.T

    def F(self, s):
        s = np.asarray(s, dtype=float)
        inner = self._F_in(np.clip(s, 0.0, 1.0))
        out = np.where((s >= 1.0)[..., None], self.F1, inner)
        return np.where((s < 0.0)[..., None], 0.0, out)

    def G(self, s):
        s = np.asarray(s, dtype=float)
        inner = self._G_in(np.clip(s, 0.0, 1.0))
        tail = self.G1 + (s - 1.0)[..., None] * self.F1
        out = np.where((s >= 1.0)[..., None], tail, inner)
        return np.where((s < 0.0)[..., None], 0.0, out)

    def A(self, t):
        """Vector potential lam*F(t/T)."""
        return self.lam * self.F(np.asarray(t, dtype=float) / self.T)

    def E(self, t):
        """Electric field (lam/T) f(t/T)."""
        return self.lam / self.T * self.f(np.asarray(t, dtype=float) / self.T)

    def int_A(self, t0, t1):
        """int_{t0}^{t1} A(tau) d tau = lam T (G(t1/T) - G(t0/T))."""
        return self.lam * self.T * (self.G(t1 / self.T) - self.G(t0 / self.T))

    def int_A2(self, t0: float, t1: float, tol: Optional[float] = None) -> float:
        """int_{t0}^{t1} |A(tau)|^2 d tau, by adaptive Simpson split at the pulse edges."""
        tol = self.quad_tol if tol is None else tol
        if t1 < t0:
            return -self.int_A2(t1, t0, tol)
        T = self.T
        total = 0.0
        lo = max(t0, 0.0)
        hi = min(t1, T)
        if hi > lo:
            g = lambda t: float(np.sum(self.A(t) ** 2))
            total += adaptive_simpson(g, lo, hi, tol)
        if t1 > T:
            total += float(np.sum(self.A(T) ** 2)) * (t1 - max(t0, T))
        return total

    def export_csv(self, path, n: int = 1025, s_max: float = 1.0) -> None:
        s = np.linspace(0.0, s_max, n)
        f, F, G = self.f(s), self.F(s), self.G(s)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s"] + [f"{name}_{ax}" for name in ("f", "F", "G") for ax in "xyz"])
            for i in range(n):
                w.writerow([repr(float(s[i]))] + [repr(float(v)) for v in (*f[i], *F[i], *G[i])])


def build_tables(spec: PulseSpec, quad_tol: float = 1e-10, n_grid: int = 4096) -> PulseTables:
    """Closed forms for the linear family, adaptive quadrature + cubic Hermite otherwise."""
    f = _profile(spec)
    if spec.family == "linear":
        eps = np.asarray(spec.epsilon, dtype=float)
        F_in = lambda s: np.asarray(s, dtype=float)[..., None] * eps
        G_in = lambda s: (0.5 * np.asarray(s, dtype=float) ** 2)[..., None] * eps
        F1, G1 = eps.copy(), 0.5 * eps
        return PulseTables(spec, f, F1, G1, _ass2_constant(F1, G1), _F_in=F_in, _G_in=G_in,
                           quad_tol=quad_tol)

    s = np.linspace(0.0, 1.0, n_grid + 1)
    h = s[1] - s[0]
    # per-interval F increments and the Cauchy term int (s_i - tau) f(tau) for G
    dF = simpson_intervals(f, s, tol=quad_tol)

    def moment(tau, idx):
        return (s[idx + 1] - tau)[:, None] * f(tau)

    dG_tail = adaptive_simpson_batch(moment, s[:-1], s[1:], quad_tol / n_grid)
    F_grid = np.zeros((n_grid + 1, 3))
    F_grid[1:] = np.cumsum(dF, axis=0)
    G_grid = np.zeros((n_grid + 1, 3))
    G_grid[1:] = np.cumsum(h * F_grid[:-1] + dG_tail, axis=0)
    F_spline = CubicHermiteSpline(s, F_grid, f(s), axis=0)
    G_spline = CubicHermiteSpline(s, G_grid, F_grid, axis=0)
    F1, G1 = F_grid[-1].copy(), G_grid[-1].copy()
    return PulseTables(spec, f, F1, G1, _ass2_constant(F1, G1), s_grid=s, F_grid=F_grid,
                       G_grid=G_grid, _F_in=F_spline, _G_in=G_spline, quad_tol=quad_tol)


def vector_potential(tables: PulseTables, t) -> np.ndarray:
    return tables.A(t)


def _ratio_inf(F1: np.ndarray, G1: np.ndarray) -> tuple[float, float]:
    """inf_{s >= 1} |G(s)|/s over a geometric sample refined by a bounded search."""
    def r(s):
        return float(np.linalg.norm(G1 + (s - 1.0) * F1) / s)
    s = np.geomspace(1.0, 1e8, 4001)
    vals = np.linalg.norm(G1[None, :] + (s - 1.0)[:, None] * F1[None, :], axis=1) / s
    i = int(np.argmin(vals))
    best_s, best = float(s[i]), float(vals[i])
    lo, hi = s[max(i - 1, 0)], s[min(i + 1, len(s) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda u: r(math.exp(u)), bounds=(math.log(lo), math.log(hi)),
                              method="bounded", options={"xatol": 1e-12})
        if res.fun < best:
            best_s, best = math.exp(res.x), float(res.fun)
    # the ratio tends to |F(1)| as s -> infinity
    return min(best, float(np.linalg.norm(F1))), best_s


def _ass2_constant(F1: np.ndarray, G1: np.ndarray) -> float:
    if float(np.dot(F1, G1)) >= 0.0:
        return min(float(np.linalg.norm(G1)), float(np.linalg.norm(F1))) / math.sqrt(2.0)
    return _ratio_inf(F1, G1)[0]


@dataclass(frozen=True)
class AssumptionCertificate:
    F1_norm: float
    ass1: bool
    C_ass2: float
    ass2: bool
    ass2_method: str
    ass0_integrals: tuple
    ass0: bool
    ass0_status: str = "verified-on-samples"

    def to_dict(self) -> dict:
        return {"F1_norm": self.F1_norm, "ass1": self.ass1, "C_ass2": self.C_ass2,
                "ass2": self.ass2, "ass2_method": self.ass2_method,
                "ass0_integrals": [list(p) for p in self.ass0_integrals],
                "ass0": self.ass0, "ass0_status": self.ass0_status}

    @property
    def passed(self) -> bool:
        return self.ass0 and self.ass1 and self.ass2


ASS0_LADDER = (1e-1, 1e-2, 1e-3)


def check_assumptions(tables: PulseTables, tol: float = 1e-12,
                      s0_ladder: Sequence[float] = ASS0_LADDER) -> AssumptionCertificate:
    F1, G1 = tables.F1, tables.G1
    F1n = float(np.linalg.norm(F1))
    ass1 = F1n > tol
    if float(np.dot(F1, G1)) >= 0.0:
        C, method = min(float(np.linalg.norm(G1)), F1n) / math.sqrt(2.0), "min(|G1|,|F1|)/sqrt2"
    else:
        C, method = _ratio_inf(F1, G1)[0], "inf-search"
    ass2 = ass1 and C > tol

    integrals = []
    ok = True
    for s0 in s0_ladder:
        val = inverse_G_integral(tables, s0)
        integrals.append((float(s0), val))
        ok = ok and math.isfinite(val)
    return AssumptionCertificate(F1n, ass1, C, ass2, method, tuple(integrals), ok)


def inverse_G_integral(tables: PulseTables, s0: float, weight: bool = False,
                       tol: Optional[float] = None) -> float:
    """int_{s0}^1 |G(tau)|^{-1} (1 + tau^{-2} if weight) d tau, or inf when it blows up.

    Integrated in u = log(tau), which tames the power-law growth near tau -> 0.
    ``tol`` is relative to the size of the integral.
    """
    tol = tables.quad_tol if tol is None else tol
    if not 0.0 < s0 <= 1.0:
        raise PulseError("s0 must lie in (0, 1]")
    if s0 == 1.0:
        return 0.0

    def integrand(u, idx=None):
        tau = np.exp(u)
        g = np.linalg.norm(tables.G(tau), axis=-1)
        w = 1.0 + tau ** -2 if weight else 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(g > 0.0, tau * w / np.where(g > 0.0, g, 1.0), np.inf)

    lo = math.log(s0)
    u = np.linspace(lo, 0.0, 65)
    coarse = integrate.simpson(integrand(u), x=u)
    if not math.isfinite(coarse):
        return math.inf
    # a handful of panels keeps the batch refinement shallow
    edges = np.linspace(lo, 0.0, 17)
    try:
        parts = adaptive_simpson_batch(integrand, edges[:-1], edges[1:],
                                       tol * max(abs(coarse), 1e-300) / 16.0)
    except (ArithmeticError, RuntimeError):
        return math.inf
    val = float(np.sum(parts))
    return val if math.isfinite(val) else math.inf
