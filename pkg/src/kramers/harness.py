"""Run orchestration: validate, evolve, bounds, sweep, verify.

Every command writes into its own output directory:

    config.echo       canonical YAML of the config actually run
    observables.csv   one row per snapshot (columns in OBS_COLUMNS)
    bounds.json       BoundReport at t_final (or the reason it was skipped)
    record.json       config hash, step count, software version
    metrics.json      wall-clock timing (the only file that differs between reruns)
    verdict.json      verify only
    snapshots/        optional binary wavefunctions (evolution.save_snapshots)
"""
from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import bounds as bd
from .config import RunConfig, ConfigError, SCHEMA_VERSION, from_dict
from .observables import (ConeObservable, ObservableError, cone_norm, ejection_kinematics,
                          spreading, survival_probability)
from .params import validate
from .pulse import build_tables, check_assumptions
from .propagator import evolve_split, gauge_bridge
from .state import check_decay, gaussian_state, hydrogenic_ground_state, save_binary

OBS_COLUMNS = ("t", "norm", "N_cone", "N_cone_F1", "survival", "W",
               "v_x", "v_y", "v_z", "opening_angle")


@dataclass
class RunRecord:
    config_hash: str
    rows: list
    bounds: dict
    steps: int
    wall_s: float
    version: str = __version__
    out: Optional[str] = None

    @property
    def final(self) -> dict:
        return self.rows[-1] if self.rows else {}


def smoke_config() -> RunConfig:
    """Small 2D Coulomb run (seconds); used by the reproducibility check and the tests."""
    return from_dict({
        "physics": {"lam": 5.0, "T": 1.0},
        "potential": {"kind": "coulomb", "soft_a": 0.5},
        "grid": {"dim": 2, "n": 64, "L": 16.0},
        "evolution": {"t_final": 1.5, "dt": 0.01, "frame": "comoving", "snapshot_every": 50,
                      "absorber": {"width": 0.125, "power": 8, "momentum_width": 0.2}},
    })


def initial_state(cfg: RunConfig):
    g = cfg.grid_spec()
    st = cfg.initial_state
    if st.kind == "gaussian":
        return gaussian_state(g, st.width)
    V = cfg.potential_spec()
    if cfg.potential.kind != "coulomb":
        raise ConfigError("initial_state.kind: hydrogenic needs a coulomb potential")
    return hydrogenic_ground_state(g, V.Z, soft_a=V.soft_a)


# ------------------------------------------------------------------ validate

def cmd_validate(cfg: RunConfig) -> dict:
    """Hypotheses of the chosen theorem, pulse assumptions and initial-state decay."""
    b = cfg.bounds
    params = cfg.physics.to_params()
    tables = build_tables(cfg.pulse_spec())
    cert = check_assumptions(tables)
    rep = validate(params, b.hypothesis_set, C=b.band_C,
                   c_K0=cert.C_ass2 if cert.C_ass2 > 0 else 1.0)
    decay = check_decay(initial_state(cfg))
    decay_ok = math.isfinite(decay.R_fit) and decay.R_fit > 0 and decay.gamma_gt_5_2
    return {"passed": bool(rep.passed and cert.passed and decay_ok),
            "hypotheses": rep.to_dict(), "pulse": cert.to_dict(),
            "decay": {**decay.to_dict(), "passed": bool(decay_ok)}}


# ------------------------------------------------------------------ bounds

def cmd_bounds(cfg: RunConfig, t: Optional[float] = None) -> bd.BoundReport:
    """Analytic quantities only; no grid is allocated."""
    b = cfg.bounds
    params = cfg.physics.to_params()
    tables = build_tables(cfg.pulse_spec())
    t = cfg.evolution.t_final if t is None else t
    return bd.bound_report(params, tables, t, C_sr=b.C_sr, C_cou=b.C_cou, C_fks=b.C_fks)


# ------------------------------------------------------------------ evolve

def _nan_on_error(fn):
    try:
        return fn()
    except ObservableError:
        return math.nan


def _observe(psi, t, psi0, tables, cones) -> dict:
    row = {"t": t, "norm": psi.norm}
    row["N_cone"] = _nan_on_error(lambda: cone_norm(psi, t, cones[0], tables)) if t > 0 else math.nan
    row["N_cone_F1"] = _nan_on_error(lambda: cone_norm(psi, t, cones[1], tables)) if t > 0 else math.nan
    row["survival"] = survival_probability(gauge_bridge(psi, t, tables, to="ritz"), psi0)
    row["W"] = spreading(psi)
    try:
        kin = ejection_kinematics(psi, tables, t)
        v, ang = kin.mean_velocity, kin.opening_angle
    except (ObservableError, ZeroDivisionError, FloatingPointError):
        v, ang = np.full(3, math.nan), math.nan
    row.update(v_x=float(v[0]), v_y=float(v[1]), v_z=float(v[2]), opening_angle=ang)
    return {k: float(v) for k, v in row.items()}


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=bd._jsonable) + "\n")


def cmd_evolve(cfg: RunConfig, out=None) -> RunRecord:
    """One Kramers-gauge trajectory on [0, t_final] with the observable time series."""
    t_start = time.perf_counter()
    out = Path(out if out is not None else cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.echo").write_text(cfg.to_yaml())

    tables = build_tables(cfg.pulse_spec())
    psi0 = initial_state(cfg)
    plan = cfg.evolution_plan()
    ob = cfg.observable
    theta = cfg.physics.theta if ob.theta is None else ob.theta
    delta = 0.1 * cfg.physics.lam * tables.C_ass2 if ob.delta is None else ob.delta
    cones = (ConeObservable(delta, theta, ob.axis_mode, ob.orientation),
             ConeObservable(delta, theta, "F1_fixed", ob.orientation))

    every = cfg.evolution.snapshot_every
    snap_steps = list(range(every, plan.n_steps, every)) + [plan.n_steps]
    traj = evolve_split(psi0, plan, tables, cfg.potential_spec(),
                        snapshot_times=[s * plan.dt for s in snap_steps])
    rows = [_observe(psi, t, psi0, tables, cones) for t, psi in zip(traj.times, traj.states)]

    with open(out / "observables.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=OBS_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(r[k]) for k in OBS_COLUMNS})

    if cfg.physics.lam > 0:
        bounds = cmd_bounds(cfg).to_dict()
    else:
        bounds = {"skipped": "lam = 0: no pulse, bounds undefined"}
    _write_json(out / "bounds.json", bounds)

    if cfg.evolution.save_snapshots:
        sdir = out / "snapshots"
        sdir.mkdir(exist_ok=True)
        for i, psi in enumerate(traj.states):
            save_binary(psi, sdir / f"psi_{i:04d}.kwf")

    rec = RunRecord(cfg.hash(), rows, bounds, traj.steps, time.perf_counter() - t_start, out=str(out))
    _write_json(out / "record.json", {"config_hash": rec.config_hash, "steps": rec.steps,
                                      "version": rec.version, "schema": SCHEMA_VERSION,
                                      "columns": list(OBS_COLUMNS)})
    _write_json(out / "metrics.json", {"wall_s": rec.wall_s, "steps": rec.steps})
    return rec


# ------------------------------------------------------------------ sweep

def _rung_dir(param: str, value: float) -> str:
    return f"{param}_{value:g}"


def _run_rung(args):
    cfg_dict, out = args
    return cmd_evolve(from_dict(cfg_dict), out)


def cmd_sweep(cfg: RunConfig, out=None, workers: int = 1) -> dict:
    """One trajectory per ladder value, fanned out over processes; fits the deficit exponent."""
    sw = cfg.sweep
    if not sw.values:
        raise ConfigError("sweep.values: empty ladder")
    out = Path(out if out is not None else cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.echo").write_text(cfg.to_yaml())
    jobs = [(cfg.with_param(sw.param, v).to_dict(), str(out / _rung_dir(sw.param, v)))
            for v in sw.values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            records = list(ex.map(_run_rung, jobs))
    else:
        records = [_run_rung(j) for j in jobs]

    rows = []
    for v, rec in zip(sw.values, records):
        f = rec.final
        rows.append({sw.param: float(v), "N_final": f["N_cone"], "deficit": 1.0 - f["N_cone"],
                     "survival": f["survival"],
                     "kappa": rec.bounds.get("kappa", {}).get("value", math.nan)})
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) for k, v in r.items()})
    deficits = [r["deficit"] for r in rows]
    summary = {"param": sw.param, "values": [float(v) for v in sw.values], "deficits": deficits,
               "deficit_decreasing": all(b < a for a, b in zip(deficits, deficits[1:]))}
    if all(d > 0 and math.isfinite(d) for d in deficits) and len(deficits) >= 2:
        fit = bd.fit_scaling(sw.values, deficits)
        summary["deficit_exponent"] = {"exponent": fit.exponent, "stderr": fit.stderr}
    _write_json(out / "sweep.json", summary)
    return {"records": records, "summary": summary}


# ------------------------------------------------------------------ verify

def cmd_verify(scale: str = "desk", out=None, only=None, echo=print) -> dict:
    from .verify import run_all
    return run_all(scale, only=only, out=out, echo=echo)
