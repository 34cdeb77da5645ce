"""Branchwise decomposition of Bob's post-processed state at desk scale.

For each (kappa, p) prints the coherent information of eta, the three branch
values, and the trace distance between eta and the state obtained by running
the achievability input through N+1 channel uses and Bob's processing.
"""
import argparse

from pbitswitch import linalg
from pbitswitch.construction import ChannelParams, eta_decomposition, eta_state, simulate_eta
from pbitswitch.pbit import PbitSpec, perfect_pbit, symmetric_state


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--perfect", action="store_true", help="use a perfect pbit instead of zeta")
    args = ap.parse_args()
    base = ChannelParams(n=1, kappa=0.25, p=0.8, q=1 / 3, d=2, r=1, m=1, N=1)
    source = None
    if args.perfect:
        source = perfect_pbit(PbitSpec.trivial(symmetric_state(2, labels=("A1", "B1"))))
    print("kappa,p,value,I_first_use_erased,I_alice_share_lost,I_both_shares,trace_distance")
    for kappa in (0.0, 0.25, 0.5):
        for p in (0.2, 0.5, 0.8):
            params = base.replace(kappa=kappa, p=p)
            dec = eta_decomposition(params, choi_source=source)
            dist = linalg.trace_norm(
                simulate_eta(params, choi_source=source).matrix - eta_state(params, source).matrix
            )
            vals = ",".join(f"{v:.12f}" for v in dec.branch_values)
            print(f"{kappa},{p},{dec.value:.12f},{vals},{dist:.2e}")


if __name__ == "__main__":
    main()
