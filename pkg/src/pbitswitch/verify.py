"""Seeded invariant suites behind ``pbitswitch verify``.

Each check returns ``(passed, detail)``. ``faults`` names deliberate
corruptions used to prove a suite can fail.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import channels as ch
from . import coherent as ci
from . import construction as cons
from . import linalg as la
from . import pbit as pb
from .linalg import DensityMatrix, SystemLayout

log = logging.getLogger(__name__)

SUITES = ("linalg", "channels", "coherent", "pbit", "construction")
KNOWN_FAULTS = ("flagged-sign",)


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str


class Context:
    def __init__(self, seed: int, trials: int, faults=()):
        self.seed = seed
        self.trials = trials
        self.faults = set(faults)

    def rng(self, name: str) -> np.random.Generator:
        # Per-check streams keep results independent of which suites run.
        key = sum(ord(c) * 31**i for i, c in enumerate(name)) % (2**32)
        return np.random.default_rng([self.seed, key])


def _worst(values) -> float:
    return float(max(values)) if values else 0.0


# -- linalg -------------------------------------------------------------------


def _linalg_tensor_trace(ctx):
    rng = ctx.rng("tensor_trace")
    errs = []
    for _ in range(ctx.trials):
        a = la.random_hermitian(SystemLayout.of(("x", 2)), rng)
        b = la.random_hermitian(SystemLayout.of(("y", 3)), rng)
        errs.append(abs(la.tensor(a, b).trace() - a.trace() * b.trace()))
    return _worst(errs) <= 1e-10, f"max error {_worst(errs):.2e}"


def _linalg_ptrace_tensor(ctx):
    rng = ctx.rng("ptrace_tensor")
    errs = []
    for _ in range(ctx.trials):
        a = la.random_hermitian(SystemLayout.of(("x", 3)), rng)
        b = la.random_hermitian(SystemLayout.of(("y", 2)), rng)
        red = la.partial_trace(la.tensor(a, b), ["y"])
        errs.append(float(np.max(np.abs(red.matrix - b.trace() * a.matrix))))
    return _worst(errs) <= 1e-10, f"max error {_worst(errs):.2e}"


def _linalg_pt_spectrum(ctx):
    rng = ctx.rng("pt_spectrum")
    errs = []
    for _ in range(ctx.trials):
        rho = la.random_density_matrix(SystemLayout.from_dims([2, 3]), rng)
        w = np.linalg.eigvalsh(la.partial_transpose(rho, [1]).matrix)
        errs.append(abs(w.sum() - 1))
    return _worst(errs) <= 1e-10, f"max error {_worst(errs):.2e}"


def _linalg_entropy_unitary(ctx):
    rng = ctx.rng("entropy_unitary")
    errs = []
    for _ in range(ctx.trials):
        rho = la.random_density_matrix(4, rng)
        u = la.random_unitary(4, rng)
        rot = DensityMatrix._trusted(rho.layout, u @ rho.matrix @ u.conj().T)
        errs.append(abs(la.von_neumann_entropy(rot) - la.von_neumann_entropy(rho)))
    return _worst(errs) <= 1e-9, f"max error {_worst(errs):.2e}"


def _linalg_trace_norm(ctx):
    rng = ctx.rng("trace_norm")
    gaps = [
        abs(h.trace()) - la.trace_norm(h)
        for h in (la.random_hermitian(4, rng) for _ in range(ctx.trials))
    ]
    return _worst(gaps) <= 1e-12, f"max |tr|-norm {_worst(gaps):.2e}"


def _linalg_h_bound(ctx):
    xs = np.linspace(0.5 / 1000, 0.5, 1000)
    gaps = [la.binary_entropy(x) - x * math.log2(1 / x**2) for x in xs]
    return _worst(gaps) <= 1e-12, f"max h(x) - x log2(1/x^2) = {_worst(gaps):.2e}"


# -- channels -----------------------------------------------------------------


def _channels_valid(ctx):
    rng = ctx.rng("valid")
    worst_psd, worst_tp = 0.0, 0.0
    for _ in range(ctx.trials):
        a = ch.random_channel(2, 2, rng)
        b = ch.random_channel(2, 2, rng)
        p = float(rng.uniform())
        built = [
            ch.compose(ch.erasure_channel(p, 2), a),
            ch.flagged_channel([(p, a), (1 - p, b)]),
            ch.switched_channel([a, b]),
            ch.tensor_channels(a, b.relabel({"A": "A2", "B": "B2"})),
        ]
        for c in built:
            worst_psd = min(worst_psd, c.min_choi_eigenvalue())
            worst_tp = max(worst_tp, c.trace_preservation_error())
    ok = worst_psd >= -1e-10 and worst_tp <= 1e-9
    return ok, f"min eig {worst_psd:.2e}, TP error {worst_tp:.2e}"


def _channels_kraus_oracle(ctx):
    rng = ctx.rng("kraus")
    errs = []
    for _ in range(ctx.trials):
        c = ch.random_channel(3, 2, rng)
        rho = la.random_density_matrix(SystemLayout.of(("A", 3)), rng)
        out = ch.apply(c, rho).matrix
        kraus = c.kraus()
        oracle = sum(k @ rho.matrix @ k.conj().T for k in kraus)
        errs.append(float(np.max(np.abs(out - oracle))))
    return _worst(errs) <= 1e-9, f"max error {_worst(errs):.2e}"


def _channels_flag_marginal(ctx):
    rng = ctx.rng("flag_marginal")
    errs = []
    for _ in range(ctx.trials):
        a, b = ch.random_channel(2, 2, rng), ch.random_channel(2, 2, rng)
        p = float(rng.uniform())
        rho = la.random_density_matrix(SystemLayout.of(("A", 2)), rng)
        flagged = ch.apply(ch.flagged_channel([(p, a), (1 - p, b)]), rho)
        marg = la.partial_trace(flagged, ["F"]).matrix
        mix = p * ch.apply(a, rho).matrix + (1 - p) * ch.apply(b, rho).matrix
        errs.append(float(np.max(np.abs(marg - mix))))
    return _worst(errs) <= 1e-10, f"max error {_worst(errs):.2e}"


# -- coherent information -----------------------------------------------------


def _rand_state(rng, d=2):
    return la.random_density_matrix(SystemLayout.of(("A", d)), rng)


def _coherent_total_erasure(ctx):
    rng = ctx.rng("total_erasure")
    errs = []
    for _ in range(ctx.trials):
        rho = _rand_state(rng, 4)
        val = ci.coherent_information(ch.total_erasure_channel(4), rho)
        errs.append(abs(val + la.von_neumann_entropy(rho)))
    return _worst(errs) <= 1e-9, f"max error {_worst(errs):.2e}"


def _coherent_flagged(ctx):
    rng = ctx.rng("flagged")
    errs = []
    sign = -1.0 if "flagged-sign" in ctx.faults else 1.0
    for _ in range(ctx.trials):
        branches = [ch.random_channel(2, 2, rng, kraus_count=2) for _ in range(3)]
        probs = rng.dirichlet(np.ones(3))
        lhs, rhs = ci.verify_flagged_identity(branches, probs, _rand_state(rng))
        errs.append(abs(lhs - sign * rhs))
    return _worst(errs) <= 1e-9, f"max |lhs - rhs| {_worst(errs):.2e}"


def _coherent_identity(ctx):
    rng = ctx.rng("identity")
    errs = []
    for _ in range(ctx.trials):
        rho = _rand_state(rng, 3)
        errs.append(abs(ci.coherent_information(ch.identity_channel(3), rho) - la.von_neumann_entropy(rho)))
    return _worst(errs) <= 1e-9, f"max error {_worst(errs):.2e}"


def _coherent_data_processing(ctx):
    rng = ctx.rng("dpi")
    gaps = []
    for _ in range(ctx.trials):
        first, second = ch.random_channel(2, 2, rng, 2), ch.random_channel(2, 2, rng, 2)
        before, after = ci.verify_data_processing(first, second, _rand_state(rng))
        gaps.append(after - before)
    return _worst(gaps) <= 1e-9, f"max after - before {_worst(gaps):.2e}"


def _coherent_monotonicity(ctx):
    rng = ctx.rng("mono")
    gaps = []
    for _ in range(ctx.trials):
        c = ch.random_channel(3, 2, rng)
        rho, sigma = _rand_state(rng, 3), _rand_state(rng, 3)
        out = la.trace_norm(ch.apply(c, rho).matrix - ch.apply(c, sigma).matrix)
        gaps.append(out - la.trace_norm(rho.matrix - sigma.matrix))
    return _worst(gaps) <= 1e-9, f"max gain {_worst(gaps):.2e}"


def _coherent_switch_reduction(ctx):
    rng = ctx.rng("switch")
    errs = []
    for _ in range(max(1, ctx.trials // 10)):
        branches = [ch.random_channel(2, 2, rng, 2) for _ in range(2)]
        top, per = ci.verify_switch_lemma(branches, restarts=4, iters=300)
        errs.append(abs(top - max(per)))
    return _worst(errs) <= 1e-3, f"max |switched - best branch| {_worst(errs):.2e}"


# -- pbit ---------------------------------------------------------------------


DESK_ZETA = [(1 / 3, 2, 1, 1, 1), (1 / 3, 2, 1, 2, 1), (0.2, 2, 1, 1, 1), (0.25, 3, 1, 1, 1),
             (0.3, 3, 2, 1, 1), (0.2, 3, 1, 1, 2)]


def _pbit_ppt(ctx):
    worst = math.inf
    count = 0
    for q, d, r, m, N in DESK_ZETA:
        zp = pb.ZetaParams(q, d, r, m, N)
        if not zp.ppt_condition():
            continue
        z = pb.zeta_state(zp)
        bob = [lab for lab in z.layout.labels if lab.startswith(("b", "B"))]
        worst = min(worst, float(np.linalg.eigvalsh(la.partial_transpose(z, bob).matrix)[0]))
        count += 1
    return worst >= -1e-10, f"{count} tuples, min PT eigenvalue {worst:.2e}"


def _random_spec(rng):
    return pb.PbitSpec.random(SystemLayout.of(("A", 2), ("B", 2)), rng)


def _pbit_value_one(ctx):
    rng = ctx.rng("pbit_value")
    errs = []
    for _ in range(ctx.trials):
        gamma = pb.perfect_pbit(_random_spec(rng))
        errs.append(abs(ci.coherent_information_of_state(gamma, ["a"], ["b", "A", "B"]) - 1))
    return _worst(errs) <= 1e-9, f"max |I - 1| {_worst(errs):.2e}"


def _pbit_shield_discarded(ctx):
    rng = ctx.rng("shield_discard")
    vals = []
    for _ in range(ctx.trials):
        gamma = pb.perfect_pbit(_random_spec(rng))
        replaced = pb.discard_and_replace(gamma, ["A"])
        vals.append(ci.coherent_information_of_state(replaced, ["a"], ["b", "A", "B"]))
    low = min(vals)
    return low >= -1e-9, f"min I {low:.2e}"


def _pbit_epsilon(ctx):
    errs = []
    for q, d, r, m, N in [(1 / 3, 2, 1, 1, 1), (0.2, 2, 1, 2, 1), (1 / 3, 2, 2, 1, 1)]:
        z = pb.zeta_state(pb.ZetaParams(q, d, r, m, N))
        errs.append(abs(pb.epsilon_of_state(z) - pb.epsilon_closed_form(q, r * N, m)))
    return _worst(errs) <= 1e-9, f"max error {_worst(errs):.2e}"


def _pbit_bernoulli(ctx):
    rng = ctx.rng("bernoulli")
    xs = rng.uniform(0, 1, ctx.trials)
    ms = rng.integers(1, 200, ctx.trials)
    gaps = [(1 - mx) - (1 - x) ** m for x, m in zip(xs, ms) for mx in [m * x]]
    return _worst(gaps) <= 1e-12, f"max violation {_worst(gaps):.2e}"


# -- construction -------------------------------------------------------------


DESK = cons.ChannelParams(n=1, kappa=0.25, p=0.8, q=1 / 3, d=2, r=1, m=1, N=1)


def _cons_threshold(ctx):
    errs = []
    for n in range(1, 7):
        for kappa in np.linspace(0, 1, 11):
            p = cons.converse_threshold(n, float(kappa))
            errs.append(abs(cons.converse_upper_bound(n, n, float(kappa), p, 1.0)[1]))
    return _worst(errs) <= 1e-12, f"max |uniform bound| {_worst(errs):.2e}"


def _cons_pick(ctx):
    bad = [n for n in range(1, 7) if not all(cons.parameter_checks(cons.pick_parameters(n)).values())]
    return not bad, f"failing n: {bad}" if bad else "n = 1..6 certified"


def _cons_eta(ctx):
    errs = []
    for kappa in (0.0, 0.25, 0.5):
        for p in (0.2, 0.8):
            dec = cons.eta_decomposition(DESK.replace(kappa=kappa, p=p))
            errs.append(abs(dec.value - dec.branch_sum))
    return _worst(errs) <= 1e-9, f"max error {_worst(errs):.2e}"


def _cons_simulated_eta(ctx):
    errs = []
    for kappa in (0.0, 0.25, 0.5):
        for p in (0.2, 0.8):
            params = DESK.replace(kappa=kappa, p=p)
            sim = cons.simulate_eta(params)
            errs.append(la.trace_norm(sim.matrix - cons.eta_state(params).matrix))
    return _worst(errs) <= 1e-8, f"max trace distance {_worst(errs):.2e}"


def _cons_converse(ctx):
    val = cons.numeric_converse_check(DESK, restarts=8, iters=300, seed=ctx.seed)
    return val <= 1e-4, f"max I_coh {val:.3e}"


CHECKS: dict[str, list[tuple[str, Callable]]] = {
    "linalg": [
        ("tensor trace multiplies", _linalg_tensor_trace),
        ("partial trace undoes tensor", _linalg_ptrace_tensor),
        ("partial transpose keeps trace", _linalg_pt_spectrum),
        ("entropy unitarily invariant", _linalg_entropy_unitary),
        ("trace norm dominates trace", _linalg_trace_norm),
        ("binary entropy bound", _linalg_h_bound),
    ],
    "channels": [
        ("constructions are CPTP", _channels_valid),
        ("apply matches Kraus oracle", _channels_kraus_oracle),
        ("flag marginal is mixture", _channels_flag_marginal),
    ],
    "coherent": [
        ("total erasure gives -S", _coherent_total_erasure),
        ("flagged decomposition", _coherent_flagged),
        ("identity gives S", _coherent_identity),
        ("data processing", _coherent_data_processing),
        ("trace distance monotone", _coherent_monotonicity),
        ("switch reduction", _coherent_switch_reduction),
    ],
    "pbit": [
        ("approximate pbit is PPT", _pbit_ppt),
        ("perfect pbit value 1", _pbit_value_one),
        ("shield discarded value >= 0", _pbit_shield_discarded),
        ("epsilon closed form", _pbit_epsilon),
        ("(1-x)^m >= 1-mx", _pbit_bernoulli),
    ],
    "construction": [
        ("threshold zeroes converse bound", _cons_threshold),
        ("parameter picker certified", _cons_pick),
        ("eta flagged decomposition", _cons_eta),
        ("channel reproduces eta", _cons_simulated_eta),
        ("desk-scale converse", _cons_converse),
    ],
}


def run_suite(suite: str = "all", seed: int = 0, trials: int = 20, faults=()) -> list[CheckResult]:
    unknown = set(faults) - set(KNOWN_FAULTS)
    if unknown:
        raise ValueError(f"unknown faults {sorted(unknown)}")
    names = SUITES if suite == "all" else (suite,)
    ctx = Context(seed, trials, faults)
    results = []
    for name in names:
        for label, check in CHECKS[name]:
            try:
                passed, detail = check(ctx)
            except Exception as exc:  # a crashing check is a failing check
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            results.append(CheckResult(name, label, bool(passed), detail))
            log.info("%s %s/%s: %s", "PASS" if passed else "FAIL", name, label, detail)
    return results
