"""Run configuration: nested dataclasses loaded from YAML.

Canonical schema (every section optional, defaults shown by ``RunConfig()``)::

    physics:    {lam, T, R, Z, V0, D, alpha, delta, theta, K0, C0}
    pulse:      {family, epsilon, omega, envelope, samples}
    potential:  {kind, soft_a}                # Z, V0, D, alpha come from physics
    grid:       {dim, n, L, center}
    evolution:  {t_final, dt, frame, absorber: {width, power, momentum_width} | null,
                 snapshot_every}
    initial_state: {kind: hydrogenic | gaussian, width}
    observable: {theta, delta, axis_mode, orientation}
    bounds:     {hypothesis_set, band_C, C_sr, C_cou, C_fks}
    sweep:      {param: lam | R | Z, values: [...]}
    output:     {dir}
    seed: 0

Dimensionless groups are derived, never read from the file.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional

import yaml

from .params import PhysParams
from .potential import PotentialSpec
from .propagator import Absorber, EvolutionPlan
from .pulse import PulseSpec
from .state import GridSpec

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Malformed or inconsistent configuration; the message names the line or field."""


@dataclass
class PhysicsConfig:
    lam: float = 10.0
    T: float = 1.0
    R: float = 1.0
    Z: float = 1.0
    V0: float = 1.0
    D: float = 1.0
    alpha: float = 1.0
    delta: float = 0.1
    theta: float = 0.2
    K0: Optional[float] = None
    C0: float = 1.0

    def to_params(self) -> PhysParams:
        return PhysParams(**asdict(self))


@dataclass
class PulseConfig:
    family: str = "linear"
    epsilon: list = field(default_factory=lambda: [1.0, 0.0, 0.0])
    omega: float = 8 * math.pi
    envelope: str = "sin2"
    samples: Optional[list] = None


@dataclass
class PotentialConfig:
    kind: str = "coulomb"
    soft_a: Optional[float] = None      # None -> half the grid spacing


@dataclass
class GridConfig:
    dim: int = 2
    n: int = 128
    L: float = 20.0
    center: list = field(default_factory=lambda: [0.0, 0.0, 0.0])


@dataclass
class AbsorberConfig:
    width: float = 0.125
    power: int = 8
    momentum_width: float = 0.0


@dataclass
class EvolutionConfig:
    t_final: float = 5.0
    dt: float = 0.005
    frame: str = "comoving"
    absorber: Optional[AbsorberConfig] = field(default_factory=AbsorberConfig)
    snapshot_every: int = 100
    save_snapshots: bool = False


@dataclass
class InitialStateConfig:
    kind: str = "hydrogenic"
    width: float = 1.0                  # gaussian only


@dataclass
class ObservableConfig:
    theta: Optional[float] = None       # None -> physics.theta
    delta: Optional[float] = None       # None -> 0.1 * lam * C_ass2
    axis_mode: str = "G_of_t"
    orientation: int = -1


@dataclass
class BoundsConfig:
    hypothesis_set: str = "coulomb"
    band_C: float = 10.0
    C_sr: list = field(default_factory=lambda: [1.0, 1.0, 1.0])
    C_cou: list = field(default_factory=lambda: [1.0, 1.0, 1.0])
    C_fks: float = 1.0


@dataclass
class SweepConfig:
    param: str = "lam"
    values: list = field(default_factory=list)


@dataclass
class OutputConfig:
    dir: str = "runs/default"


@dataclass
class RunConfig:
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    pulse: PulseConfig = field(default_factory=PulseConfig)
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    initial_state: InitialStateConfig = field(default_factory=InitialStateConfig)
    observable: ObservableConfig = field(default_factory=ObservableConfig)
    bounds: BoundsConfig = field(default_factory=BoundsConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0

    # ---- derived specs

    def pulse_spec(self) -> PulseSpec:
        p = self.pulse
        samples = None if p.samples is None else tuple(tuple(float(x) for x in r) for r in p.samples)
        return PulseSpec(p.family, lam=self.physics.lam, T=self.physics.T,
                         epsilon=tuple(float(x) for x in p.epsilon), omega=p.omega,
                         envelope=p.envelope, samples=samples)

    def grid_spec(self) -> GridSpec:
        g = self.grid
        return GridSpec(g.dim, g.n, g.L, tuple(float(x) for x in g.center))

    def potential_spec(self) -> PotentialSpec:
        ph = self.physics
        a = self.potential.soft_a
        if a is None:
            a = 0.5 * self.grid_spec().h
        return PotentialSpec(self.potential.kind, Z=ph.Z, V0=ph.V0, D=ph.D, alpha=ph.alpha,
                             soft_a=a)

    def evolution_plan(self) -> EvolutionPlan:
        e = self.evolution
        ab = None if e.absorber is None else Absorber(**asdict(e.absorber))
        return EvolutionPlan(0.0, e.t_final, e.dt, gauge="kramers", absorber=ab, frame=e.frame)

    # ---- serialisation

    def to_dict(self) -> dict:
        return asdict(self)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True, default_flow_style=False)

    def hash(self) -> str:
        """sha256 of the canonical JSON form; independent of key order in the source file."""
        blob = json.dumps(_canonical(self.to_dict()), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def replace(self, **sections) -> "RunConfig":
        return dataclasses.replace(self, **sections)

    def with_param(self, name: str, value: float) -> "RunConfig":
        """Copy with one physics parameter changed (used by sweeps)."""
        if name not in {f.name for f in dataclasses.fields(PhysicsConfig)}:
            raise ConfigError(f"sweep.param: unknown physics parameter {name!r}")
        d = self.to_dict()
        d["physics"][name] = value
        return from_dict(d)


def _canonical(o):
    if isinstance(o, dict):
        return {k: _canonical(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_canonical(v) for v in o]
    if isinstance(o, bool) or o is None or isinstance(o, str):
        return o
    if isinstance(o, int):
        return float(o)     # 1 and 1.0 are the same physical value
    if isinstance(o, float):
        return float(repr(o))
    return o


def _build(cls, data, path: str):
    if data is None:
        return None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(data).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"{path}: unknown field(s) {', '.join(unknown)}")
    kw = {}
    for name, val in data.items():
        f = fields[name]
        sub = _SECTION_TYPES.get((cls, name))
        where = f"{path}.{name}" if path else name
        if sub is not None:
            kw[name] = _build(sub, val, where)
        else:
            kw[name] = _coerce(f, val, where)
    try:
        return cls(**kw)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _coerce(f, val, where):
    default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
    if val is None:
        return None
    if isinstance(default, bool):
        if not isinstance(val, bool):
            raise ConfigError(f"{where}: expected true/false, got {val!r}")
        return val
    if isinstance(default, float) or (default is None and isinstance(val, (int, float))):
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {val!r}")
        return float(val)
    if isinstance(default, int):
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(f"{where}: expected an integer, got {val!r}")
        return val
    if isinstance(default, list):
        if not isinstance(val, list):
            raise ConfigError(f"{where}: expected a list, got {val!r}")
        return val
    if isinstance(default, str) and not isinstance(val, str):
        raise ConfigError(f"{where}: expected a string, got {val!r}")
    return val


_SECTION_TYPES = {
    (RunConfig, "physics"): PhysicsConfig, (RunConfig, "pulse"): PulseConfig,
    (RunConfig, "potential"): PotentialConfig, (RunConfig, "grid"): GridConfig,
    (RunConfig, "evolution"): EvolutionConfig, (RunConfig, "initial_state"): InitialStateConfig,
    (RunConfig, "observable"): ObservableConfig, (RunConfig, "bounds"): BoundsConfig,
    (RunConfig, "sweep"): SweepConfig, (RunConfig, "output"): OutputConfig,
    (EvolutionConfig, "absorber"): AbsorberConfig,
}


def from_dict(d: dict) -> RunConfig:
    cfg = _build(RunConfig, d or {}, "")
    check(cfg)
    return cfg


def check(cfg: RunConfig) -> None:
    """Cross-field invariants that the dataclasses alone do not express."""
    vals = cfg.sweep.values
    if vals:
        diffs = [b - a for a, b in zip(vals, vals[1:])]
        if not (all(x > 0 for x in diffs) or all(x < 0 for x in diffs)):
            raise ConfigError("sweep.values: ladder must be strictly monotone")
        if cfg.sweep.param not in {f.name for f in dataclasses.fields(PhysicsConfig)}:
            raise ConfigError(f"sweep.param: unknown physics parameter {cfg.sweep.param!r}")
    if cfg.evolution.frame not in ("lab", "comoving"):
        raise ConfigError("evolution.frame: must be 'lab' or 'comoving'")
    if cfg.initial_state.kind not in ("hydrogenic", "gaussian"):
        raise ConfigError("initial_state.kind: must be 'hydrogenic' or 'gaussian'")
    if cfg.evolution.snapshot_every < 1:
        raise ConfigError("evolution.snapshot_every: must be >= 1")
    for name, build in (("pulse", cfg.pulse_spec), ("grid", cfg.grid_spec),
                        ("potential", cfg.potential_spec), ("evolution", cfg.evolution_plan)):
        try:
            build()
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{name}: {exc}") from None


def loads(text: str, source: str = "<string>") -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"{source}:{mark.line + 1}:{mark.column + 1}" if mark else source
        raise ConfigError(f"{where}: {exc.problem}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    return from_dict(data or {})


def load(path) -> RunConfig:
    p = Path(path)
    return loads(p.read_text(), str(p))


def dump(cfg: RunConfig, path) -> None:
    Path(path).write_text(cfg.to_yaml())
