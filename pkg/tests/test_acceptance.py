"""The eight acceptance criteria, one test each.

A PASS/FAIL line per criterion is printed in the pytest terminal summary, or
on stdout when this file is run directly with ``python3 tests/test_acceptance.py``.
"""
import functools
import math
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
from conftest import ACCEPTANCE  # noqa: E402

from pbitswitch import channels as ch  # noqa: E402
from pbitswitch import coherent as ci  # noqa: E402
from pbitswitch import construction as cons  # noqa: E402
from pbitswitch import linalg as la  # noqa: E402
from pbitswitch import pbit as pb  # noqa: E402
from pbitswitch.linalg import SystemLayout  # noqa: E402

DESK = cons.ChannelParams(n=1, kappa=0.25, p=0.8, q=1 / 3, d=2, r=1, m=1, N=1)
INSTANCES = 100
TOL = 1e-9
OPT_TOL = 1e-3


def criterion(num, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run():
            start = time.perf_counter()
            try:
                detail = fn()
            except BaseException as exc:
                ACCEPTANCE[num] = (title, False, f"{type(exc).__name__}: {exc}")
                raise
            elapsed = time.perf_counter() - start
            ACCEPTANCE[num] = (title, True, f"{detail} ({elapsed:.2f}s)")
        return run
    return wrap


@criterion(1, "parameter instantiation for n=1")
def test_parameter_instantiation():
    start = time.perf_counter()
    params = cons.pick_parameters(1)
    checks = cons.parameter_checks(params)
    elapsed = time.perf_counter() - start
    assert (params.kappa, params.N, params.m, params.r, params.d) == (0.25, 8, 68, 143, 2288)
    assert abs(params.p - 0.8) < 1e-15 and abs(params.q - 1 / 3) < 1e-15
    assert checks["ppt"] and checks["delta_requirement"] and checks["converse_threshold"]
    assert elapsed < 1.0
    return f"N={params.N} m={params.m} r={params.r} d={params.d}, checks {checks}"


@criterion(2, "bound arithmetic")
def test_bound_arithmetic():
    d68, d67, t68 = cons.delta_bound(68), cons.delta_bound(67), pb.tau_bound(68)
    assert 0.3080 < d68 < 0.3081 and d68 < 1 / 3
    assert d67 > 1 / 3
    assert 1.006e-3 < t68 < 1.007e-3
    return f"delta(68)={d68:.10f} delta(67)={d67:.10f} tau(68)={t68:.10e}"


@criterion(3, "desk-scale converse")
def test_desk_converse():
    zeta = cons.grouped_zeta(DESK.zeta)
    pt_min = float(np.linalg.eigvalsh(la.partial_transpose(zeta, ["b", "B1"]).matrix)[0])
    assert pt_min >= -1e-10, "zeta not PPT"
    value = cons.numeric_converse_check(DESK, restarts=32, iters=500, seed=0)
    assert value <= 1e-4
    return f"min PT eigenvalue {pt_min:.2e}, max I_coh {value:.3e} over 32 restarts"


@criterion(4, "erasure optimizer calibration")
def test_erasure_calibration():
    errs = []
    for p in (0.2, 0.4, 0.5, 0.6, 0.8):
        res = ci.maximize_coherent_information(ch.erasure_channel(p, 2), restarts=16)
        errs.append(abs(res.value - max(0.0, 1 - 2 * p)))
    assert max(errs) <= OPT_TOL
    return f"max error {max(errs):.2e}"


def _rho(rng, d, label="A"):
    return la.random_density_matrix(SystemLayout.of((label, d)), rng)


@criterion(5, "identity suites")
def test_identity_suites():
    rng = np.random.default_rng(20240501)
    worst = {}

    def note(name, value):
        worst[name] = max(worst.get(name, 0.0), value)

    shield = SystemLayout.of(("A", 2), ("B", 2))
    for _ in range(INSTANCES):
        d = int(rng.integers(2, 5))
        rho = _rho(rng, d)
        note("total erasure", abs(ci.coherent_information(ch.total_erasure_channel(d), rho)
                       + la.von_neumann_entropy(rho)))

        branches = [ch.random_channel(2, 2, rng, 2) for _ in range(3)]
        probs = rng.dirichlet(np.ones(3))
        lhs, rhs = ci.verify_flagged_identity(branches, probs, _rho(rng, 2))
        note("flagged channel", abs(lhs - rhs))

        states = [la.random_density_matrix(SystemLayout.of(("R", 2), ("B", 2)), rng) for _ in range(3)]
        lhs, rhs = ci.verify_flagged_state_identity(states, probs, ["R"], ["B"])
        note("flagged state", abs(lhs - rhs))

        switch = [ch.random_channel(2, 2, rng, 2) for _ in range(2)]
        top, per = ci.verify_switch_lemma(switch, restarts=4, iters=300)
        note("switch", abs(top - max(per)))

        gamma = pb.perfect_pbit(pb.PbitSpec.random(shield, rng))
        note("pbit value", abs(ci.coherent_information_of_state(gamma, ["a"], ["b", "A", "B"]) - 1))
        replaced = pb.discard_and_replace(gamma, ["A"])
        note("shield discarded", max(0.0, -ci.coherent_information_of_state(replaced, ["a"], ["b", "A", "B"])))

        first, second = ch.random_channel(2, 3, rng), ch.random_channel(SystemLayout.of(("B", 3)), 2, rng)
        before, after = ci.verify_data_processing(first, second, _rho(rng, 2))
        note("data processing", max(0.0, after - before))

        chan = ch.random_channel(3, 3, rng)
        a, b = _rho(rng, 3), _rho(rng, 3)
        gain = la.trace_norm(ch.apply(chan, a).matrix - ch.apply(chan, b).matrix) - la.trace_norm(a.matrix - b.matrix)
        note("monotonicity", max(0.0, gain))

    tolerances = {name: (OPT_TOL if name == "switch" else TOL) for name in worst}
    bad = {k: v for k, v in worst.items() if v > tolerances[k]}
    assert not bad, bad
    return ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f" over {INSTANCES} instances"


@criterion(6, "epsilon and delta chain at desk scale")
def test_epsilon_delta_chain():
    eps = pb.epsilon_closed_form(1 / 3, 1, 1)
    assert abs(eps - 1 / 3) <= 1e-15  # float rounding of (1/3)/(2/3)
    from_state = 0.5 - pb.block_offdiagonal_norm(pb.zeta_state(DESK.zeta))
    assert abs(from_state - eps) <= TOL
    grid = np.linspace(1e-8, 1 / 32, 1002)[1:-1]
    gaps = []
    for e in grid:
        val = pb.delta_of_epsilon(float(e))
        gaps.append(val.exact - val.simplified)
    assert max(gaps) <= 0
    return f"|eps - eps(state)| {abs(from_state - eps):.1e}, max exact - simplified {max(gaps):.3f} on {len(grid)} points"


def _perfect_source():
    return pb.perfect_pbit(pb.PbitSpec.trivial(pb.symmetric_state(2, labels=("A1", "B1"))))


@criterion(7, "achievability bookkeeping")
def test_achievability_bookkeeping():
    worst_dist, worst_dec = 0.0, 0.0
    for kappa in (0.0, 0.25, 0.5):
        for p in (0.2, 0.8):
            params = DESK.replace(kappa=kappa, p=p)
            eta = cons.eta_state(params)
            sim = cons.simulate_eta(params)
            worst_dist = max(worst_dist, la.trace_norm(sim.matrix - eta.matrix))
            dec = cons.eta_decomposition(params)
            _, i2, i3 = dec.branch_values
            pN = p**params.N
            expected = kappa * -1 + (1 - kappa) * pN * i2 + (1 - kappa) * (1 - pN) * i3
            worst_dec = max(worst_dec, abs(dec.value - expected))
    assert worst_dist <= 1e-8 and worst_dec <= TOL

    params = DESK.replace(kappa=0.0, p=0.2)
    source = _perfect_source()
    dec = cons.eta_decomposition(params, choi_source=source)
    _, i2, i3 = dec.branch_values
    value = cons.numeric_achievability_check(params, against_channel=True, choi_source=source)
    assert abs(i3 - 1) <= TOL and i2 >= -TOL
    assert abs(value - (0.8 * 1 + 0.2 * i2)) <= TOL
    assert value >= 0.8 - TOL
    return f"max trace distance {worst_dist:.1e}, max decomposition error {worst_dec:.1e}, perfect pbit value {value:.12f}"


@criterion(8, "feasibility region")
def test_feasibility_region():
    start = time.perf_counter()
    reports = cons.feasibility_scan(1, 11)
    elapsed = time.perf_counter() - start
    assert len(reports) == 121
    assert all(not r.achievable for r in reports if r.kappa >= 0.5)
    assert all(r.converse for r in reports if r.p == 1.0)
    # The 11-point axis holds multiples of 0.1, so (0.25, 0.8) is classified directly.
    point = cons.feasibility_point(1, 0.25, 0.8)
    assert point.zone == "both"
    assert elapsed < 1.0
    both = sum(r.zone == "both" for r in reports)
    return f"121 rows, {both} in zone both, (0.25, 0.8) -> {point.zone}"


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    failed = 0
    for t in tests:
        try:
            t()
        except BaseException:
            failed += 1
    for num in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[num]
        print(f"{'PASS' if passed else 'FAIL'} [{num}] {title}: {detail}")
    sys.exit(1 if failed else 0)
