"""Print the certified parameter choice for n = 1..n_max as a table."""
import argparse
import math

from pbitswitch.construction import (
    achievability_lower_bound,
    delta_bound,
    parameter_checks,
    pick_parameters,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=6)
    args = ap.parse_args()
    cols = ("n", "p", "N", "m", "r", "d", "log10_dim", "delta", "lower", "certified")
    print(" ".join(f"{c:>12}" for c in cols))
    for n in range(1, args.n_max + 1):
        P = pick_parameters(n)
        delta = delta_bound(P.m)
        lower, _ = achievability_lower_bound(P.kappa, P.p, P.N, delta)
        # shield dimension of the full approximate pbit, per side: d^(r m N)
        log10_dim = P.r * P.m * P.N * math.log10(P.d)
        ok = all(parameter_checks(P).values())
        row = (n, f"{P.p:.6f}", P.N, P.m, P.r, P.d, f"{log10_dim:.3e}", f"{delta:.5f}", f"{lower:.5f}", ok)
        print(" ".join(f"{str(v):>12}" for v in row))


if __name__ == "__main__":
    main()
