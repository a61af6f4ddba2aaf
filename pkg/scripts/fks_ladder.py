#!/usr/bin/env python
"""||(U - U_0)(T, 0) psi_0|| against kappa_lambda for the short-range potential.

Compares the measured decay exponent with the one carried by the bound.
"""
import argparse

from kramers import bounds as bd
from kramers.verify import fks_ladder

ap = argparse.ArgumentParser()
ap.add_argument("--dim", type=int, default=1)
ap.add_argument("--n", type=int, default=4096)
ap.add_argument("--L", type=float, default=64.0)
ap.add_argument("--dt", type=float, default=5e-4)
ap.add_argument("--lams", type=float, nargs="+", default=[5, 10, 20, 40, 80])
args = ap.parse_args()

diffs, kappas = fks_ladder(args.dim, args.n, args.L, args.dt, args.lams)
print(f"{'lam':>8} {'diff':>10} {'kappa':>10} {'ratio':>8}")
for l, d, k in zip(args.lams, diffs, kappas):
    print(f"{l:8.3g} {d:10.4g} {k:10.4g} {d / k:8.3f}")
print("diff exponent  ", round(bd.fit_scaling(args.lams, diffs).exponent, 4))
print("kappa exponent ", round(bd.fit_scaling(args.lams, kappas).exponent, 4))
