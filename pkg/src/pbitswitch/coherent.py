"""Coherent information of channels and states, and its maximization."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.optimize import minimize

from . import linalg
from .channels import (
    QuantumChannel,
    apply,
    check_dim_cap,
    compose,
    flagged_channel,
    switched_channel,
)
from .errors import LayoutError
from .linalg import DensityMatrix, Operator, SystemLayout, von_neumann_entropy

log = logging.getLogger(__name__)

REFERENCE_LABEL = "R_ref"


def purification(rho: Operator, ref_label: str = REFERENCE_LABEL) -> DensityMatrix:
    """``sum_i sqrt(l_i) |v_i>|i>_R`` with ``dim R = dim rho``."""
    w, v = linalg.eig_hermitian(rho)
    w = np.clip(w, 0.0, None)
    vec = (v * np.sqrt(w)).reshape(-1)
    layout = rho.layout + SystemLayout.of((ref_label, rho.dim))
    return DensityMatrix._trusted(layout, np.outer(vec, vec.conj()))


def coherent_information_of_state(
    state: Operator,
    ref_factors: Iterable[Union[str, int]],
    out_factors: Iterable[Union[str, int]],
) -> float:
    """``I(R>B) = S(B) - S(RB)``; factors outside both sets are traced out."""
    layout = state.layout
    ref = layout.indices(ref_factors)
    out = layout.indices(out_factors)
    if set(ref) & set(out):
        raise LayoutError("reference and output factors overlap")
    s_out = von_neumann_entropy(linalg.keep_only(state, out))
    s_joint = von_neumann_entropy(linalg.keep_only(state, sorted(ref + out)))
    return s_out - s_joint


def coherent_information(channel: QuantumChannel, rho: Operator) -> float:
    if rho.layout.dims != channel.in_layout.dims:
        raise LayoutError(
            f"input dims {rho.layout.dims} do not match channel input {channel.in_layout.dims}"
        )
    rho = rho.with_layout(channel.in_layout) if rho.layout != channel.in_layout else rho
    ref = REFERENCE_LABEL
    while ref in channel.out_layout.labels:
        ref += "_"
    phi = purification(rho, ref)
    joint = apply(channel, phi)
    outs = list(channel.out_layout.labels)
    return coherent_information_of_state(joint, [ref], outs)


def verify_flagged_identity(
    branches: Sequence[QuantumChannel], probs: Sequence[float], rho: Operator
) -> tuple[float, float]:
    flagged = flagged_channel(list(zip(probs, branches)))
    lhs = coherent_information(flagged, rho)
    rhs = sum(p * coherent_information(ch, rho) for p, ch in zip(probs, branches))
    return lhs, float(rhs)


def flagged_state(states: Sequence[Operator], probs: Sequence[float], flag: str = "F") -> DensityMatrix:
    """``sum_i p_i rho_i (x) |i><i|_F`` with the flag appended last."""
    k = len(states)
    layout = states[0].layout + SystemLayout.of((flag, k))
    mat = sum(p * np.kron(st.matrix, np.diag(np.eye(k)[i])) for i, (p, st) in enumerate(zip(probs, states)))
    return DensityMatrix._trusted(layout, mat)


def verify_flagged_state_identity(
    states: Sequence[Operator], probs: Sequence[float], ref_factors, out_factors
) -> tuple[float, float]:
    """``I(R > B F)`` of the flagged mixture next to ``sum_i p_i I(R > B)_i``."""
    mixed = flagged_state(states, probs, flag="F_flag")
    lhs = coherent_information_of_state(mixed, ref_factors, list(out_factors) + ["F_flag"])
    rhs = sum(p * coherent_information_of_state(st, ref_factors, out_factors)
              for p, st in zip(probs, states))
    return lhs, float(rhs)


def verify_data_processing(
    first: QuantumChannel, second: QuantumChannel, rho: Operator
) -> tuple[float, float]:
    before = coherent_information(first, rho)
    after = coherent_information(compose(second, first), rho)
    return before, after


# -- optimization ------------------------------------------------------------


class _Objective:
    """Coherent information as ``S(N(rho)) - S(N^c(rho))`` with its gradient."""

    def __init__(self, channel: QuantumChannel):
        self.kraus = channel.kraus()
        self.d = channel.d_in

    def outputs(self, rho: np.ndarray):
        k = self.kraus
        out = np.einsum("koi,ij,kpj->op", k, rho, k.conj(), optimize=True)
        env = np.einsum("koi,ij,loj->kl", k, rho, k.conj(), optimize=True)
        return out, env

    def value(self, rho: np.ndarray) -> float:
        out, env = self.outputs(rho)
        return _entropy(out) - _entropy(env)

    def value_and_grad(self, rho: np.ndarray):
        """Value and the Hermitian matrix ``Q`` with ``dI = tr(Q drho)``."""
        k = self.kraus
        out, env = self.outputs(rho)
        s_out, log_out = _entropy_and_log(out)
        s_env, log_env = _entropy_and_log(env)
        grad_out = np.einsum("kpi,pq,kqj->ij", k.conj(), log_out, k, optimize=True)
        grad_env = np.einsum("lk,loi,koj->ij", log_env, k.conj(), k, optimize=True)
        q = -grad_out + grad_env
        return s_out - s_env, (q + q.conj().T) / 2


def _entropy(mat: np.ndarray) -> float:
    w = np.linalg.eigvalsh((mat + mat.conj().T) / 2)
    return linalg._entropy_from_eigs(w)


def _entropy_and_log(mat: np.ndarray, floor: float = 1e-14):
    w, v = np.linalg.eigh((mat + mat.conj().T) / 2)
    s = linalg._entropy_from_eigs(w)
    logw = np.log2(np.clip(w, floor, None))
    return s, (v * logw) @ v.conj().T


def _rho_from_params(x: np.ndarray, d: int):
    g = (x[: d * d] + 1j * x[d * d :]).reshape(d, d)
    m = g @ g.conj().T
    t = float(np.trace(m).real)
    return g, m / t, t


def _params_from_rho(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    g = v * np.sqrt(np.clip(w, 0.0, None))
    return np.concatenate([g.real.reshape(-1), g.imag.reshape(-1)])


@dataclass
class CoherentInfoResult:
    value: float
    input_state: DensityMatrix
    restarts: int
    iterations: int
    grad_norm: float
    history: list = field(default_factory=list)

    @property
    def diagnostics(self) -> dict:
        return {
            "restarts": self.restarts,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "restart_values": list(self.history),
        }


def _ascend(obj: _Objective, rho0: np.ndarray, max_iters: int, tol: float):
    d = obj.d

    def fun(x):
        g, rho, t = _rho_from_params(x, d)
        val, q = obj.value_and_grad(rho)
        qc = q - np.trace(q @ rho).real * np.eye(d)
        w = qc @ g * (2.0 / t)
        grad = np.concatenate([w.real.reshape(-1), w.imag.reshape(-1)])
        return -val, -grad

    x0 = _params_from_rho(rho0)
    res = minimize(fun, x0, jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iters, "gtol": tol, "ftol": 1e-15})
    _, rho, _ = _rho_from_params(res.x, d)
    _, grad = fun(res.x)
    return rho, obj.value(rho), int(res.nit), float(np.linalg.norm(grad))


def seed_states(d: int, restarts: int, seed: int = 0) -> list[np.ndarray]:
    """Deterministic starting points: maximally mixed, pure ``|0>``, then Ginibre draws.

    Restart ``i`` draws from its own child of ``SeedSequence(seed)`` so the
    list does not depend on evaluation order.
    """
    starts = [np.eye(d, dtype=complex) / d]
    pure = np.zeros((d, d), dtype=complex)
    pure[0, 0] = 1.0
    starts.append(pure)
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        m = g @ g.conj().T
        starts.append(m / np.trace(m).real)
    return starts


def maximize_coherent_information(
    channel: QuantumChannel,
    restarts: int = 16,
    max_iters: int = 500,
    tol: float = 1e-6,
    seed: int = 0,
    dim_cap: int | None = None,
) -> CoherentInfoResult:
    """Multistart ascent of ``rho -> I_coh(channel, rho)``.

    The returned value is re-evaluated exactly at the returned input, so it is
    a lower bound on the true maximum up to floating point.
    """
    check_dim_cap(channel.d_in, dim_cap, "optimizer input")
    obj = _Objective(channel)
    best = None
    history = []
    total_iters = 0
    for start in seed_states(channel.d_in, restarts, seed):
        rho, val, nit, gnorm = _ascend(obj, start, max_iters, tol)
        # Starting points are themselves candidates; the pure start pins the floor at 0.
        start_val = obj.value(start)
        if start_val > val:
            rho, val = start, start_val
        total_iters += nit
        history.append(val)
        if best is None or val > best[1] + 1e-9:
            best = (rho, val, gnorm)
    rho, _, gnorm = best
    rho = (rho + rho.conj().T) / 2
    rho = rho / np.trace(rho).real
    state = DensityMatrix._trusted(channel.in_layout, rho)
    value = coherent_information(channel, state)
    log.debug("max I_coh %.12g over %d starts", value, len(history))
    return CoherentInfoResult(value, state, len(history), total_iters, gnorm, history)


def verify_switch_lemma(
    branches: Sequence[QuantumChannel], restarts: int = 8, iters: int = 500, seed: int = 0
) -> tuple[float, list[float]]:
    switched = switched_channel(branches)
    top = maximize_coherent_information(switched, restarts, iters, seed=seed).value
    per_branch = [
        maximize_coherent_information(ch, restarts, iters, seed=seed).value for ch in branches
    ]
    return top, per_branch
