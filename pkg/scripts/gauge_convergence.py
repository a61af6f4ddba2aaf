#!/usr/bin/env python
"""Kramers vs Ritz gauge difference under successive (dt, h) halving."""
import argparse

from kramers.verify import gauge_difference

ap = argparse.ArgumentParser()
ap.add_argument("--n", type=int, default=128)
ap.add_argument("--L", type=float, default=48.0)
ap.add_argument("--dt", type=float, default=0.01)
ap.add_argument("--levels", type=int, default=3)
args = ap.parse_args()

prev = None
for k in range(args.levels):
    n, dt = args.n * 2 ** k, args.dt / 2 ** k
    d = gauge_difference(n, args.L, dt)
    ratio = "" if prev is None else f"  ratio {prev / d:.3g}"
    print(f"n={n:5d} dt={dt:.5f} rel diff {d:.3e}{ratio}")
    prev = d
