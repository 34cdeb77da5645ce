"""The switched channel M, its converse/achievability bounds and desk-scale checks.

Channel layout: input ``(S, a, A1..AN)``, output ``(S, F, b, B1..BN)`` where
each share ``Ai``/``Bi`` fuses the ``r*m`` factors of dimension ``d``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import linalg
from .channels import (
    DEFAULT_DIM_CAP,
    QuantumChannel,
    apply,
    channel_from_choi_state,
    check_dim_cap,
    compose,
    erasure_channel,
    switched_channel,
    tensor_channels,
)
from .coherent import coherent_information_of_state, maximize_coherent_information
from .errors import DimensionCapError, PreconditionError
from .linalg import DensityMatrix, Operator, SystemLayout, binary_entropy
from .pbit import (
    ZetaParams,
    r_for_m,
    ppt_condition,
    share_factors,
    zeta_state,
)

N_SEARCH_MAX_M = 10_000
ETA_LABELS = ("a", "b", "A1p", "B1", "G", "F0")


@dataclass(frozen=True)
class ChannelParams:
    n: int
    kappa: float
    p: float
    q: float
    d: int
    r: int
    m: int
    N: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        for name in ("kappa", "p"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} = {val} outside [0, 1]")
        ZetaParams(self.q, self.d, self.r, self.m, self.N)

    @property
    def zeta(self) -> ZetaParams:
        return ZetaParams(self.q, self.d, self.r, self.m, self.N)

    def in_converse_regime(self) -> bool:
        return self.p >= converse_threshold(self.n, self.kappa) - 1e-12

    def in_achievability_regime(self) -> bool:
        return 0.0 < self.kappa < 0.5 and 0.0 < self.p < 1.0

    def ppt_condition(self) -> bool:
        return ppt_condition(self.q, self.d, self.r, self.N)

    def replace(self, **changes) -> "ChannelParams":
        return ChannelParams(**{**asdict(self), **changes})

    def to_json(self) -> dict:
        return {
            "n": int(self.n),
            "kappa": float(self.kappa),
            "p": float(self.p),
            "q": float(self.q),
            "d": int(self.d),
            "r": int(self.r),
            "m": int(self.m),
            "N": int(self.N),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ChannelParams":
        return cls(
            n=int(doc["n"]),
            kappa=float(doc["kappa"]),
            p=float(doc["p"]),
            q=float(doc["q"]),
            d=int(doc["d"]),
            r=int(doc["r"]),
            m=int(doc["m"]),
            N=int(doc["N"]),
        )


# -- channel -----------------------------------------------------------------


def share_labels(N: int, side: str) -> list[str]:
    return [f"{side}{i}" for i in range(1, N + 1)]


def grouped_zeta(zp: ZetaParams, dim_cap=None) -> DensityMatrix:
    """The approximate pbit on ``(a, b, A1..AN, B1..BN)`` with each share fused."""
    zeta = zeta_state(zp, dim_cap=dim_cap)
    return group_shares(zeta, zp)


def group_shares(state: Operator, zp: ZetaParams) -> Operator:
    order = ["a", "b"]
    for side in ("A", "B"):
        for i in range(1, zp.N + 1):
            order += share_factors(zp, i, side)
    out = linalg.permute(state, order)
    for side in ("A", "B"):
        for i in range(1, zp.N + 1):
            out = linalg.merge_factors(out, share_factors(zp, i, side), f"{side}{i}")
    return out


def gamma_channel(choi_source: Operator, N: int, dim_cap=None) -> QuantumChannel:
    """Channel ``aA -> bB`` whose Choi state is ``choi_source`` on ``(a, b, A.., B..)``."""
    return channel_from_choi_state(
        choi_source,
        ["a"] + share_labels(N, "A"),
        ["b"] + share_labels(N, "B"),
        dim_cap=dim_cap,
    )


def build_M(
    params: ChannelParams, dim_cap: int | None = None, choi_source: Optional[Operator] = None
) -> QuantumChannel:
    """Switch 0 -> ``E_kappa o Gamma``; switch 1 -> ``E_p``; the switch is kept."""
    cap = DEFAULT_DIM_CAP if dim_cap is None else dim_cap
    if choi_source is None:
        choi_source = grouped_zeta(params.zeta, dim_cap=cap)
    gamma = gamma_channel(choi_source, params.N, dim_cap=cap)
    noisy = compose(erasure_channel(params.kappa, gamma.out_layout), gamma)
    erase = erasure_channel(params.p, gamma.in_layout, gamma.out_layout)
    check_dim_cap(2 * gamma.d_in * 2 * noisy.d_out, cap)
    return switched_channel([noisy, erase])


def channel_use(M: QuantumChannel, use: int) -> QuantumChannel:
    """``M`` with every label tagged by the use index, e.g. ``A1`` -> ``A1^0``."""
    return M.relabel(lambda lab: f"{lab}^{use}")


# -- converse ----------------------------------------------------------------


def converse_threshold(n: int, kappa: float) -> float:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa {kappa} outside [0, 1]")
    return (1.0 + kappa**n) ** (-1.0 / n)


def converse_upper_bound(n: int, l: int, kappa: float, p: float, entropy: float) -> tuple[float, float]:
    """``(l-resolved bound, uniform bound)`` on the coherent information ``I_l``."""
    if not 0 <= l <= n:
        raise ValueError(f"need 0 <= l <= n, got l={l}, n={n}")
    if entropy < 0:
        raise ValueError("entropy must be >= 0")
    if not (0.0 <= kappa <= 1.0 and 0.0 <= p <= 1.0):
        raise ValueError("kappa and p must lie in [0, 1]")
    resolved = (-(kappa**l) * p ** (n - l) + 1 - p ** (n - l)) * entropy
    uniform = (1 - (1 + kappa**n) * p**n) * entropy
    assert resolved <= uniform + 1e-15 * max(1.0, entropy)
    return resolved, uniform


def numeric_converse_check(
    params: ChannelParams, restarts: int = 32, iters: int = 500, seed: int = 0, dim_cap=None
) -> float:
    """Maximized coherent information of ``M^{(x) n}`` (one number, not divided by n)."""
    cap = DEFAULT_DIM_CAP if dim_cap is None else dim_cap
    M = build_M(params, dim_cap=cap)
    channel = channel_use(M, 1)
    for use in range(2, params.n + 1):
        channel = tensor_channels(channel, channel_use(M, use), dim_cap=cap)
    return maximize_coherent_information(channel, restarts, iters, seed=seed, dim_cap=cap).value


# -- bound arithmetic --------------------------------------------------------


def alicki_fannes_delta(tau: float) -> float:
    if not 0.0 <= tau < 1.0:
        raise ValueError(f"tau must lie in [0, 1), got {tau}")
    return 4 * tau + 2 * binary_entropy(tau)


def delta_bound_valid(m: int) -> bool:
    return m > 5 and 16 * math.sqrt(m) * 2.0 ** (-m / 4) <= 0.5


def log_delta_bound(m: int) -> float:
    return math.log(72) - m / 4 * math.log(2) + 1.5 * math.log(m)


def delta_bound(m: int) -> float:
    if not delta_bound_valid(m):
        raise ValueError(f"delta bound needs 16 sqrt(m) 2^(-m/4) <= 1/2, fails at m={m}")
    return 72 * 2.0 ** (-m / 4) * m**1.5


def achievability_lower_bound(kappa: float, p: float, N: int, delta: float) -> tuple[float, bool]:
    """``((1-k)(1-p^N-D) - k, D < 1 - p^N - k/(1-k))``."""
    pN = p**N
    value = (1 - kappa) * (1 - pN - delta) - kappa
    if kappa >= 1.0:
        return value, False
    return value, delta < 1 - pN - kappa / (1 - kappa)


def smallest_m(target: float, m_max: int = N_SEARCH_MAX_M) -> Optional[int]:
    """Smallest valid ``m <= m_max`` with ``delta_bound(m) < target``."""
    if target <= 0:
        return None
    m = 6
    while not delta_bound_valid(m):
        m += 1
    if m > m_max:
        return None
    log_t = math.log(target)
    if log_delta_bound(m_max) >= log_t:
        return None
    lo, hi = m, m_max  # decreasing on the valid range
    while lo < hi:
        mid = (lo + hi) // 2
        if log_delta_bound(mid) < log_t:
            hi = mid
        else:
            lo = mid + 1
    return lo


def pick_parameters(n: int) -> ChannelParams:
    """kappa = 1/4, p at the converse threshold, N = 2n4^n, d = 2Nr, q = 1/3."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    kappa = 0.25
    p = converse_threshold(n, kappa)
    N = 2 * n * 4**n
    m = smallest_m(1.0 / 3.0)
    r = r_for_m(m)
    d = 2 * N * r
    params = ChannelParams(n=n, kappa=kappa, p=p, q=1.0 / 3.0, d=d, r=r, m=m, N=N)
    checks = parameter_checks(params)
    if not all(checks.values()):
        raise PreconditionError(f"parameter checks failed: {checks}")
    return params


def log_p_power(n: int, kappa: float, N: int) -> float:
    """``ln(p^N)`` at the converse threshold, without forming ``p`` first."""
    return -(N / n) * math.log1p(kappa**n)


def parameter_checks(params: ChannelParams) -> dict[str, bool]:
    n, kappa, N = params.n, params.kappa, params.N
    threshold = converse_threshold(n, kappa)
    pN = math.exp(log_p_power(n, kappa, N)) if abs(params.p - threshold) <= 1e-15 else params.p**N
    delta = delta_bound(params.m)
    lower = (1 - kappa) * (1 - pN - delta) - kappa
    return {
        "converse_threshold": abs(params.p - threshold) <= 1e-12,
        "ppt": params.ppt_condition(),
        "delta_requirement": lower > 0 and delta < 1 - pN - kappa / (1 - kappa),
    }


# -- achievability -----------------------------------------------------------


def _ket(pieces, order: list[str]) -> tuple[SystemLayout, np.ndarray]:
    """Kronecker product of ``(labels, dims, vector)`` pieces, reordered to ``order``."""
    labels, dims, vec = [], [], np.ones(1, dtype=complex)
    for labs, ds, v in pieces:
        labels += labs
        dims += ds
        vec = np.kron(vec, v)
    perm = [labels.index(lab) for lab in order]
    vec = vec.reshape(dims).transpose(perm).reshape(-1)
    return SystemLayout(tuple((labels[i], dims[i]) for i in perm)), vec


def _basis(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def input_labels(N: int, use: int) -> list[str]:
    return [f"S^{use}", f"a^{use}"] + [f"A{i}^{use}" for i in range(1, N + 1)]


def achievability_input(params: ChannelParams, dim_cap=None) -> DensityMatrix:
    """Pure input: switch 0 then switches 1, ``Phi+`` on ``(a, a^0)`` and ``(A_i^0, A_1^i)``."""
    N = params.N
    D = params.zeta.share_dim()
    cap = DEFAULT_DIM_CAP if dim_cap is None else dim_cap
    log_dim = math.log(2) + (N + 1) * (2 * math.log(2) + N * math.log(D))
    if log_dim > math.log(cap) + 1e-9:
        raise DimensionCapError(round(math.exp(log_dim)), cap, "achievability input")
    pieces = [
        (["S^0"], [2], _basis(2, 0)),
        (["a", "a^0"], [2, 2], linalg.max_entangled_vector(2)),
    ]
    for i in range(1, N + 1):
        pieces += [
            ([f"S^{i}"], [2], _basis(2, 1)),
            ([f"a^{i}"], [2], _basis(2, 0)),
            ([f"A{i}^0", f"A1^{i}"], [D, D], linalg.max_entangled_vector(D)),
        ]
        pieces += [([f"A{j}^{i}"], [D], _basis(D, 0)) for j in range(2, N + 1)]
    order = ["a"] + [lab for u in range(N + 1) for lab in input_labels(N, u)]
    layout, vec = _ket(pieces, order)
    return DensityMatrix._trusted(layout, np.outer(vec, vec.conj()))


def first_share_state(choi_source: Operator, N: int) -> Operator:
    """Marginal of the grouped Choi state on ``(a, b, A1, B1)``."""
    return linalg.keep_only(choi_source, ["a", "b", "A1", "B1"])


def _diag(values) -> np.ndarray:
    return np.diag(np.asarray(values, dtype=complex))


def _eta_branches(params: ChannelParams, first: Operator):
    """The three flagged terms as unnormalized-weight pairs ``(weight, state)``."""
    kappa, p, N = params.kappa, params.p, params.N
    D = first.layout.dims[2]
    pN = p**N
    layout = SystemLayout.of(("a", 2), ("b", 2), ("A1p", D), ("B1", D), ("G", 2), ("F0", 2))
    one, zero = _diag([0, 1]), _diag([1, 0])
    # erased first use: a, b, A1p, B1 all maximally mixed; G set by the other flags
    t1 = np.kron(np.eye(4 * D * D) / (4 * D * D), _diag([1 - pN, pN]))
    t1 = np.kron(t1, one)
    rho_abB = linalg.keep_only(first, ["a", "b", "B1"])
    t2 = np.kron(rho_abB.matrix, np.eye(D) / D)  # (a, b, B1, A1p)
    t2 = linalg.permute(
        Operator._trusted(SystemLayout.of(("a", 2), ("b", 2), ("B1", D), ("A1p", D)), t2),
        ["a", "b", "A1p", "B1"],
    ).matrix
    t2 = np.kron(np.kron(t2, one), zero)
    t3 = np.kron(np.kron(linalg.keep_only(first, ["a", "b", "A1", "B1"]).matrix, zero), zero)
    weights = (kappa, (1 - kappa) * pN, (1 - kappa) * (1 - pN))
    states = [Operator._trusted(layout, t) for t in (t1, t2, t3)]
    return weights, states


def eta_state(params: ChannelParams, choi_source: Optional[Operator] = None, dim_cap=None) -> DensityMatrix:
    """Bob's post-processed state, assembled term by term."""
    if choi_source is None:
        choi_source = grouped_zeta(params.zeta, dim_cap=dim_cap)
    weights, states = _eta_branches(params, first_share_state(choi_source, params.N))
    mat = sum(w * s.matrix for w, s in zip(weights, states))
    return DensityMatrix._trusted(states[0].layout, (mat + mat.conj().T) / 2)


@dataclass
class EtaDecomposition:
    value: float
    branch_sum: float
    weights: tuple
    branch_values: tuple


def eta_decomposition(
    params: ChannelParams, choi_source: Optional[Operator] = None, dim_cap=None
) -> EtaDecomposition:
    """``I(a > rest)`` of eta next to the branchwise flagged sum."""
    if choi_source is None:
        choi_source = grouped_zeta(params.zeta, dim_cap=dim_cap)
    first = first_share_state(choi_source, params.N)
    weights, states = _eta_branches(params, first)
    eta = eta_state(params, choi_source)
    rest = list(ETA_LABELS[1:])
    value = coherent_information_of_state(eta, ["a"], rest)
    branch_values = tuple(
        coherent_information_of_state(s, ["a"], ["b", "A1p", "B1", "G"]) for s in states
    )
    total = sum(w * v for w, v in zip(weights, branch_values) if w > 0)
    return EtaDecomposition(value, float(total), weights, branch_values)


def _fix_classical(op: Operator, fixed: dict[str, int]) -> Operator:
    """Compress onto ``|v><v|`` of the named factors, dropping them."""
    layout = op.layout
    k = len(layout)
    tens = op.matrix.reshape(layout.dims * 2)
    index = [slice(None)] * (2 * k)
    for lab, v in fixed.items():
        pos = layout.index(lab)
        index[pos] = v
        index[k + pos] = v
    keep = [i for i in range(k) if layout.labels[i] not in fixed]
    sub = tens[tuple(index)]
    new_layout = layout.select(keep)
    n = new_layout.total_dim
    return Operator._trusted(new_layout, sub.reshape(n, n))


def bob_postprocess(state: Operator, N: int) -> DensityMatrix:
    """Bob reads flags ``F^1..F^N``, picks the first unerased use (use 1 if none) and relabels."""
    total = None
    for flags in itertools.product((0, 1), repeat=N):
        j = next((i + 1 for i, f in enumerate(flags) if f == 0), 1)
        branch = _fix_classical(state, {f"F^{i + 1}": f for i, f in enumerate(flags)})
        kept = linalg.keep_only(branch, ["a", "b^0", f"B1^{j}", f"B{j}^0", "F^0"])
        g = np.zeros((2, 2), dtype=complex)
        g[flags[j - 1], flags[j - 1]] = 1.0
        mat = np.kron(kept.matrix, g)
        layout = kept.layout + SystemLayout.of(("G", 2))
        piece = linalg.permute(Operator._trusted(layout, mat), ["a", "b^0", f"B1^{j}", f"B{j}^0", "G", "F^0"])
        total = piece.matrix if total is None else total + piece.matrix
    dims = piece.layout.dims
    layout = SystemLayout(tuple(zip(ETA_LABELS, dims)))
    return DensityMatrix._trusted(layout, (total + total.conj().T) / 2)


def simulate_eta(params: ChannelParams, choi_source: Optional[Operator] = None, dim_cap=None) -> DensityMatrix:
    """``P o M^{(x) N+1}`` applied to the achievability input, one channel use at a time."""
    cap = DEFAULT_DIM_CAP if dim_cap is None else dim_cap
    M = build_M(params, dim_cap=cap, choi_source=choi_source)
    state = achievability_input(params, dim_cap=cap)
    for use in range(params.N + 1):
        state = apply(channel_use(M, use), state)
        check_dim_cap(state.dim, cap, "achievability output state")
    return bob_postprocess(state, params.N)


def numeric_achievability_check(
    params: ChannelParams,
    against_channel: bool = False,
    choi_source: Optional[Operator] = None,
    tol: float = 1e-8,
    dim_cap=None,
) -> float:
    """``I(a > b A1' B1 G F0)`` of eta; optionally cross-checked against the channel."""
    if choi_source is None:
        choi_source = grouped_zeta(params.zeta, dim_cap=dim_cap)
    eta = eta_state(params, choi_source)
    if against_channel:
        simulated = simulate_eta(params, choi_source, dim_cap=dim_cap)
        dist = linalg.trace_norm(simulated.matrix - eta.matrix)
        if dist > tol:
            raise PreconditionError(f"channel-derived state differs from eta by {dist:.3g}")
    return coherent_information_of_state(eta, ["a"], list(ETA_LABELS[1:]))


# -- feasibility region ------------------------------------------------------


ZONES = ("both", "converse-only", "achievable-only", "neither")


@dataclass
class FeasibilityReport:
    kappa: float
    p: float
    n: int
    converse_threshold: float
    converse: bool
    achievable: bool
    zone: str
    N: Optional[int] = None
    m: Optional[int] = None
    delta_bound: float = math.nan
    lower_bound: float = math.nan
    ppt_satisfied: bool = False
    params: Optional[ChannelParams] = field(default=None, repr=False)


def classify(converse: bool, achievable: bool) -> str:
    if converse and achievable:
        return "both"
    if converse:
        return "converse-only"
    if achievable:
        return "achievable-only"
    return "neither"


def n_ladder(n: int) -> list[int]:
    top = 2 * n * 4**n
    ladder = [1 << k for k in range(top.bit_length()) if (1 << k) <= top]
    if ladder[-1] != top:
        ladder.append(top)
    return ladder


def feasibility_point(n: int, kappa: float, p: float) -> FeasibilityReport:
    threshold = converse_threshold(n, kappa)
    converse = p >= threshold - 1e-12
    report = FeasibilityReport(kappa, p, n, threshold, converse, False, classify(converse, False))
    if not (kappa < 0.5 and 0.0 < p < 1.0):
        return report
    for N in n_ladder(n):
        rhs = 1 - p**N - kappa / (1 - kappa)
        m = smallest_m(rhs)
        if m is None:
            continue
        r = r_for_m(m)
        delta = delta_bound(m)
        lower, _ = achievability_lower_bound(kappa, p, N, delta)
        params = ChannelParams(n=n, kappa=kappa, p=p, q=1.0 / 3.0, d=2 * N * r, r=r, m=m, N=N)
        report.achievable = True
        report.zone = classify(converse, True)
        report.N, report.m = N, m
        report.delta_bound, report.lower_bound = delta, lower
        report.ppt_satisfied = params.ppt_condition()
        report.params = params
        break
    return report


def feasibility_scan(n: int, grid: int) -> list[FeasibilityReport]:
    """Grid over ``(kappa, p)`` in ``[0, 1]^2``, kappa-major."""
    if grid < 2:
        raise ValueError(f"grid must be >= 2, got {grid}")
    # i / (grid - 1) is the correctly rounded grid value, unlike linspace.
    axis = [i / (grid - 1) for i in range(grid)]
    return [feasibility_point(n, k, p) for k in axis for p in axis]


CSV_HEADER = ("kappa", "p", "converse", "achievable", "zone", "delta_bound", "lower_bound")


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def reports_to_csv(reports: list[FeasibilityReport]) -> str:
    lines = [",".join(CSV_HEADER)]
    for rep in reports:
        lines.append(",".join(_fmt(getattr(rep, col)) for col in CSV_HEADER))
    return "\n".join(lines) + "\n"


def params_to_json(params: ChannelParams, checks: Optional[dict] = None) -> str:
    doc = params.to_json()
    if checks is not None:
        doc["checks"] = checks
    return json.dumps(doc, indent=2)
