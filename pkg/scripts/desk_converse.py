"""Maximized single-use coherent information of the desk-scale channel M.

Points inside the converse zone (p >= (1 + kappa)^-1 for n = 1) should give
values at optimizer precision of zero; points outside may be positive.
"""
import argparse

import numpy as np

from pbitswitch.construction import ChannelParams, converse_threshold, numeric_converse_check


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--restarts", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--grid", type=int, default=5)
    args = ap.parse_args()
    base = ChannelParams(n=1, kappa=0.25, p=0.8, q=1 / 3, d=2, r=1, m=1, N=1)
    print("kappa,p,threshold,in_converse_zone,max_coherent_info")
    for kappa in np.linspace(0, 1, args.grid):
        for p in np.linspace(0, 1, args.grid):
            params = base.replace(kappa=float(kappa), p=float(p))
            val = numeric_converse_check(params, restarts=args.restarts, seed=args.seed)
            thr = converse_threshold(1, float(kappa))
            print(f"{kappa:.17g},{p:.17g},{thr:.17g},{str(p >= thr - 1e-12).lower()},{val:.17g}")


if __name__ == "__main__":
    main()
