#!/usr/bin/env python
"""Ionization ladder from a sweep config; prints N_cone, survival and the deficit fit.

    python scripts/ionization_sweep.py configs/sweep_lambda.yaml --workers 4
"""
import argparse

from kramers.config import load
from kramers.harness import cmd_sweep

ap = argparse.ArgumentParser()
ap.add_argument("config")
ap.add_argument("--out", default=None)
ap.add_argument("--workers", type=int, default=1)
args = ap.parse_args()

cfg = load(args.config)
res = cmd_sweep(cfg, args.out, workers=args.workers)
s = res["summary"]
print(f"{s['param']:>8} {'N_cone':>10} {'survival':>10} {'opening':>10}")
for v, rec in zip(s["values"], res["records"]):
    f = rec.final
    print(f"{v:8.3g} {f['N_cone']:10.5f} {f['survival']:10.3g} {f['opening_angle']:10.4f}")
if "deficit_exponent" in s:
    print("deficit exponent", round(s["deficit_exponent"]["exponent"], 3))
