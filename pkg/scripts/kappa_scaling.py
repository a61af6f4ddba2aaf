#!/usr/bin/env python
"""kappa_lambda along a geometric lambda ladder, with the closed-form linear-pulse asymptote.

Prints a table and the fitted exponent (expected -1/4 once R lam >> 1).
"""
import argparse

import numpy as np

from kramers import bounds as bd
from kramers.pulse import PulseSpec, build_tables

ap = argparse.ArgumentParser()
ap.add_argument("--lam-min", type=float, default=1.0)
ap.add_argument("--lam-max", type=float, default=1e6)
ap.add_argument("--num", type=int, default=13)
ap.add_argument("--R", type=float, default=1.0)
ap.add_argument("--T", type=float, default=1.0)
args = ap.parse_args()

lams = np.geomspace(args.lam_min, args.lam_max, args.num)
ks = []
print(f"{'lam':>12} {'kappa':>12} {'asymptote':>12} {'s0':>10}")
for lam in lams:
    k = bd.kappa_lambda(build_tables(PulseSpec("linear", lam=lam, T=args.T)), args.R, args.T)
    ks.append(k.value)
    print(f"{lam:12.4g} {k.value:12.5g} {bd.kappa_linear_asymptote(args.R, args.T, lam):12.5g} {k.s0:10.4g}")
for lo in (0, args.num // 2):
    fit = bd.fit_scaling(lams[lo:], ks[lo:])
    print(f"fit lam >= {lams[lo]:.3g}: exponent {fit.exponent:.4f} +- {fit.stderr:.4f}")
