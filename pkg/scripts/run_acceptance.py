#!/usr/bin/env python
"""Run the acceptance criteria and write verdict.json.

    python scripts/run_acceptance.py --scale desk --out runs/verify
    python scripts/run_acceptance.py --only 3 4 --scale smoke
"""
import argparse
import sys

from kramers.verify import run_all

ap = argparse.ArgumentParser()
ap.add_argument("--scale", default="desk", choices=("smoke", "desk", "full"))
ap.add_argument("--only", type=int, nargs="*")
ap.add_argument("--out", default="runs/verify")
args = ap.parse_args()
verdict = run_all(args.scale, only=args.only, out=args.out)
sys.exit(0 if verdict["passed"] else 1)
