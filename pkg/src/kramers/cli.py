"""Command-line entry point: ``kramers-ion {validate|evolve|bounds|sweep|verify}``.

Exit codes: 0 pass, 1 hypothesis/validation failure, 2 numerical abort, 3 config or I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import config as cfgmod
from . import harness
from .propagator import NumericalAbort
from .pulse import PulseError
from .numerics import QuadratureError
from .bounds import _jsonable

EXIT_OK, EXIT_FAIL, EXIT_ABORT, EXIT_IO = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kramers-ion", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    for name, help_ in (("validate", "check hypotheses, pulse assumptions and state decay"),
                        ("evolve", "run one trajectory and write observables"),
                        ("bounds", "analytic bound report (no grid)"),
                        ("sweep", "ladder of trajectories over one parameter"),
                        ("verify", "run the acceptance criteria")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", type=Path, default=None, help="YAML run config")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--scale", choices=("smoke", "desk", "full"), default="desk")
        if name == "verify":
            p.add_argument("--only", type=int, nargs="*", default=None, help="criterion ids")
    return ap


def _load(args) -> cfgmod.RunConfig:
    if args.config is None:
        return cfgmod.RunConfig()
    return cfgmod.load(args.config)


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.cmd == "verify":
            verdict = harness.cmd_verify(args.scale, out=args.out or Path("runs/verify"),
                                         only=args.only)
            return EXIT_OK if verdict["passed"] else EXIT_FAIL
        cfg = _load(args)
        out = args.out or Path(cfg.output.dir)
        if args.cmd == "validate":
            rep = harness.cmd_validate(cfg)
            out.mkdir(parents=True, exist_ok=True)
            (out / "validate.json").write_text(json.dumps(rep, indent=2, sort_keys=True, default=_jsonable))
            print(json.dumps({"passed": rep["passed"]}))
            return EXIT_OK if rep["passed"] else EXIT_FAIL
        if args.cmd == "bounds":
            rep = harness.cmd_bounds(cfg)
            out.mkdir(parents=True, exist_ok=True)
            (out / "bounds.json").write_text(rep.to_json() + "\n")
            print(rep.to_json())
            return EXIT_OK
        if args.cmd == "evolve":
            rec = harness.cmd_evolve(cfg, out)
            print(json.dumps(rec.final))
            return EXIT_OK
        if args.cmd == "sweep":
            res = harness.cmd_sweep(cfg, out, workers=args.workers)
            print(json.dumps(res["summary"]))
            return EXIT_OK
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalAbort, QuadratureError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (ValueError, PulseError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
