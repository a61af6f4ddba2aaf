"""Physical parameters, the theorems' standing hypotheses, and diagnostic groups.

Units throughout: hbar = 1, e = 1, m_el = 1/2, so the kinetic operator is p**2
and the hydrogenic ground-state energy in three dimensions is -Z**2/4.  Every
dimensionful quantity is a power of length.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Optional


class ParameterError(ValueError):
    """Raised for degenerate or non-finite core parameters (not a hypothesis failure)."""


@dataclass(frozen=True)
class PhysParams:
    lam: float = 10.0            # field amplitude lambda [1/length]
    T: float = 1.0               # pulse duration [length]
    R: float = 1.0               # wavefunction length scale [length]
    Z: float = 1.0               # nuclear charge
    V0: float = 1.0              # short-range strength [1/length]
    D: float = 1.0               # short-range scale [length]
    alpha: float = 1.0           # short-range decay exponent
    delta: float = 0.1           # cone speed threshold
    theta: float = 0.2           # cone half-angle [rad]
    K0: Optional[float] = None   # momentum cutoff; None -> K0*T/R = C0*(R*lam)**(2/35)
    C0: float = 1.0

    def __post_init__(self):
        for name in ("lam", "T", "R", "Z", "V0", "D", "alpha", "delta", "theta", "C0"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParameterError(f"{name} must be a finite number, got {v!r}")
        for name in ("lam", "T", "R", "delta", "C0"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("Z", "V0", "D", "alpha"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be non-negative, got {getattr(self, name)}")
        if not 0.0 < self.theta < math.pi / 2:
            raise ParameterError(f"theta must lie in (0, pi/2), got {self.theta}")
        if self.K0 is not None and (not math.isfinite(self.K0) or self.K0 <= 0):
            raise ParameterError(f"K0 must be positive, got {self.K0}")

    @property
    def K0_eff(self) -> float:
        if self.K0 is not None:
            return float(self.K0)
        return default_K0(self.R, self.T, self.lam, self.C0)

    def replace(self, **kw) -> "PhysParams":
        d = asdict(self)
        d.update(kw)
        return PhysParams(**d)


def default_K0(R: float, T: float, lam: float, C0: float = 1.0) -> float:
    """Momentum cutoff with K0*T/R = C0*(R*lam)**(2/35)."""
    return C0 * (R * lam) ** (2.0 / 35.0) * R / T


@dataclass(frozen=True)
class DimensionlessGroups:
    RL: float
    R2_over_T: float
    Z_over_lambda: float
    K0R: float
    K0T_over_R: float

    @classmethod
    def of(cls, p: PhysParams) -> "DimensionlessGroups":
        K0 = p.K0_eff
        return cls(RL=p.R * p.lam, R2_over_T=p.R ** 2 / p.T, Z_over_lambda=p.Z / p.lam,
                   K0R=K0 * p.R, K0T_over_R=K0 * p.T / p.R)


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    value: float
    bound: str
    passed: bool
    required: bool


@dataclass(frozen=True)
class ValidationReport:
    hypothesis_set: str
    checks: tuple[HypothesisCheck, ...]
    groups: DimensionlessGroups
    constants: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.required)

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if c.required and not c.passed]

    def to_dict(self) -> dict:
        return {
            "hypothesis_set": self.hypothesis_set,
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
            "groups": asdict(self.groups),
            "constants": dict(self.constants),
        }


HYPOTHESIS_SETS = ("short_range", "coulomb")


def validate(params: PhysParams, hypothesis_set: str = "coulomb", C: float = 10.0,
             c_K0: float = 1.0) -> ValidationReport:
    """Check the standing hypotheses of the chosen theorem.

    ``C`` sets the band R**2/T in [1/C, C]; ``c_K0`` is the constant in
    K0 <= c*lambda/2 (pass the certified pulse constant when available).
    Checks are always reported in the same order; only those required by the
    chosen theorem decide the overall verdict.
    """
    if hypothesis_set not in HYPOTHESIS_SETS:
        raise ParameterError(f"unknown hypothesis set {hypothesis_set!r}")
    if not (math.isfinite(C) and C >= 1.0):
        raise ParameterError("band constant C must be >= 1")
    g = DimensionlessGroups.of(params)
    coulomb = hypothesis_set == "coulomb"
    K0 = params.K0_eff
    checks = (
        HypothesisCheck("R2/T in [1/C, C]", g.R2_over_T, f"[{1.0 / C:g}, {C:g}]",
                        1.0 / C <= g.R2_over_T <= C, coulomb),
        HypothesisCheck("Z <= lambda", g.Z_over_lambda, "<= 1", params.Z <= params.lam, coulomb),
        HypothesisCheck("K0 <= c*lambda/2", K0 / params.lam, f"<= {c_K0 / 2:g}",
                        K0 <= c_K0 * params.lam / 2.0, coulomb),
        HypothesisCheck("lambda*T >= R", params.lam * params.T / params.R, ">= 1",
                        params.lam * params.T >= params.R, coulomb),
    )
    return ValidationReport(hypothesis_set, checks, g, {"C": C, "c_K0": c_K0, "C0": params.C0})


def keldysh(Ip_eV: float, I0_1e14Wcm2: float, L_um: float) -> float:
    """Keldysh parameter for circular polarisation, gamma ~ 0.33*sqrt(Ip/(I0*L**2)).

    Ip in eV, peak intensity in 1e14 W/cm^2, wavelength in micrometres.
    """
    for name, v in (("Ip_eV", Ip_eV), ("I0_1e14Wcm2", I0_1e14Wcm2), ("L_um", L_um)):
        if not math.isfinite(v) or v <= 0:
            raise ParameterError(f"{name} must be positive, got {v}")
    return 0.33 * math.sqrt(Ip_eV / (I0_1e14Wcm2 * L_um ** 2))
