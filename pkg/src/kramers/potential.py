"""Static nuclear potentials: short-range envelope and (soft-core) Coulomb."""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

KINDS = ("short_range", "coulomb")


class PotentialError(ValueError):
    pass


@dataclass(frozen=True)
class PotentialSpec:
    kind: str = "coulomb"
    Z: float = 1.0
    V0: float = 1.0
    D: float = 1.0
    alpha: float = 1.0
    soft_a: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PotentialError(f"unknown potential kind {self.kind!r}")
        vals = (self.Z, self.V0, self.D, self.alpha, self.soft_a)
        if not all(math.isfinite(v) for v in vals):
            raise PotentialError("potential parameters must be finite")
        if self.soft_a < 0:
            raise PotentialError("soft_a must be >= 0")
        if self.kind == "coulomb" and self.Z < 0:
            raise PotentialError("Z must be >= 0")
        if self.kind == "short_range" and (self.V0 < 0 or self.D <= 0 or self.alpha <= 0):
            raise PotentialError("short_range needs V0 >= 0, D > 0, alpha > 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSpec":
        return cls(**d)

    def with_soft_a(self, a: float) -> "PotentialSpec":
        d = asdict(self)
        d["soft_a"] = float(a)
        return PotentialSpec(**d)


def radial(spec: PotentialSpec, r) -> np.ndarray:
    """Potential as a function of the distance to the nucleus."""
    r = np.asarray(r, dtype=float)
    a = spec.soft_a
    if a == 0.0 and np.any(r == 0.0):
        raise PotentialError("potential is singular at |x| = 0; set soft_a > 0")
    rs = np.sqrt(r * r + a * a) if a > 0 else r
    if spec.kind == "coulomb":
        return -spec.Z / rs
    D = spec.D
    return -spec.V0 * D / (rs * (1.0 + (r / D) ** 2) ** (spec.alpha / 2.0))


def eval(spec: PotentialSpec, x) -> np.ndarray:  # noqa: A001 - mirrors the operation name
    """V(x) for points x of shape (..., d)."""
    x = np.asarray(x, dtype=float)
    return radial(spec, np.sqrt(np.sum(x * x, axis=-1)))


def eval_shifted(spec: PotentialSpec, x, shift) -> np.ndarray:
    """V(x - shift)."""
    x = np.asarray(x, dtype=float)
    shift = np.asarray(shift, dtype=float)[: x.shape[-1]]
    return eval(spec, x - shift)


def on_grid(spec: PotentialSpec, grid, shift=None) -> np.ndarray:
    """Evaluate V(x - shift) on the lab coordinates of a grid (separable distance build)."""
    r2 = 0.0
    for i, ax in enumerate(grid.lab_axes()):
        c = 0.0 if shift is None else float(shift[i])
        shape = [1] * grid.dim
        shape[i] = grid.n
        r2 = r2 + ((ax - c) ** 2).reshape(shape)
    return radial(spec, np.sqrt(r2))
