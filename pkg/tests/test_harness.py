import csv
import json
import math

import pytest

from kramers import harness
from kramers.bounds import kappa_linear_minimizer
from kramers.cli import run
from kramers.config import from_dict, loads


def small(**over):
    d = {"physics": {"lam": 5.0}, "potential": {"soft_a": 0.5},
         "grid": {"dim": 2, "n": 32, "L": 12.0},
         "evolution": {"t_final": 0.5, "dt": 0.01, "snapshot_every": 25,
                       "absorber": {"width": 0.125, "power": 8, "momentum_width": 0.2}}}
    for k, v in over.items():
        d.setdefault(k, {}).update(v)
    return from_dict(d)


def test_evolve_outputs(tmp_path):
    rec = harness.cmd_evolve(small(), tmp_path)
    for f in ("config.echo", "observables.csv", "bounds.json", "record.json", "metrics.json"):
        assert (tmp_path / f).exists()
    rows = list(csv.DictReader(open(tmp_path / "observables.csv")))
    assert list(rows[0]) == list(harness.OBS_COLUMNS)
    assert float(rows[-1]["t"]) == pytest.approx(0.5)
    assert rec.steps == 50
    assert loads((tmp_path / "config.echo").read_text()) == small()
    assert json.loads((tmp_path / "record.json").read_text())["config_hash"] == small().hash()


def test_evolve_lambda_zero_survival(tmp_path):
    cfg = small(physics={"lam": 0.0}, evolution={"absorber": None, "frame": "lab", "t_final": 2.0})
    rec = harness.cmd_evolve(cfg, tmp_path)
    assert rec.final["survival"] >= 1 - 1e-4
    assert "skipped" in json.loads((tmp_path / "bounds.json").read_text())


def test_evolve_reproducible(tmp_path):
    harness.cmd_evolve(small(), tmp_path / "a")
    harness.cmd_evolve(small(), tmp_path / "b")
    for f in ("observables.csv", "bounds.json", "config.echo", "record.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_snapshots(tmp_path):
    harness.cmd_evolve(small(evolution={"save_snapshots": True}), tmp_path)
    assert len(list((tmp_path / "snapshots").glob("*.kwf"))) == 2


def test_bounds_reproduces_closed_form():
    cfg = small(physics={"lam": 1000.0})
    rep = harness.cmd_bounds(cfg)
    assert rep.s0 ** 2 == pytest.approx(kappa_linear_minimizer(1.0, 1.0, 1000.0) ** 2, rel=1e-8)


def test_validate_pass_and_fail():
    assert harness.cmd_validate(small(physics={"lam": 20.0}))["passed"]
    # K0 <= c lam / 2 fails at lam = 5
    assert not harness.cmd_validate(small())["passed"]
    rep = harness.cmd_validate(small(physics={"lam": 0.5, "Z": 1.0}))
    assert not rep["passed"]


def test_sweep(tmp_path):
    cfg = small(sweep={"param": "lam", "values": [5.0, 10.0]})
    res = harness.cmd_sweep(cfg, tmp_path, workers=2)
    assert (tmp_path / "lam_5" / "observables.csv").exists()
    assert (tmp_path / "lam_10" / "observables.csv").exists()
    s = json.loads((tmp_path / "sweep.json").read_text())
    assert s["values"] == [5.0, 10.0] and len(s["deficits"]) == 2
    # parallel and serial runs write identical rung files
    harness.cmd_sweep(cfg, tmp_path / "serial", workers=1)
    assert ((tmp_path / "lam_10" / "observables.csv").read_bytes()
            == (tmp_path / "serial" / "lam_10" / "observables.csv").read_bytes())


# ---------------------------------------------------------------- CLI exit codes

def _write(tmp_path, text):
    p = tmp_path / "c.yaml"
    p.write_text(text)
    return str(p)


def test_cli_bounds_ok(tmp_path, capsys):
    cfg = _write(tmp_path, "physics: {lam: 1000}\n")
    assert run(["bounds", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "bounds.json").read_text())["kappa"]["value"] > 0


def test_cli_malformed_is_3(tmp_path, capsys):
    cfg = _write(tmp_path, "physics: {lam: [1\n")
    assert run(["bounds", "--config", cfg]) == 3
    assert "c.yaml:" in capsys.readouterr().err


def test_cli_unknown_field_is_3(tmp_path, capsys):
    assert run(["bounds", "--config", _write(tmp_path, "physics: {lamb: 1}\n")]) == 3


def test_cli_missing_file_is_3(tmp_path):
    assert run(["bounds", "--config", str(tmp_path / "nope.yaml")]) == 3


def test_cli_validation_failure_is_1(tmp_path):
    cfg = _write(tmp_path, "physics: {lam: 0.5}\npotential: {soft_a: 0.5}\ngrid: {n: 32, L: 12}\n")
    assert run(["validate", "--config", cfg, "--out", str(tmp_path / "o")]) == 1


def test_cli_denominator_abort_is_2(tmp_path, monkeypatch):
    from kramers.propagator import DenominatorAbort

    def boom(*a, **k):
        raise DenominatorAbort("denominator below floor")
    monkeypatch.setattr(harness, "cmd_evolve", boom)
    assert run(["evolve", "--config", _write(tmp_path, "{}\n"), "--out", str(tmp_path)]) == 2


def test_cli_verify_subset(tmp_path, capsys):
    code = run(["verify", "--scale", "smoke", "--only", "3", "--out", str(tmp_path)])
    assert code == 0
    v = json.loads((tmp_path / "verdict.json").read_text())
    assert v["criteria"][0]["id"] == 3 and v["passed"]
    assert "[PASS] criterion 3" in capsys.readouterr().out
