"""Hiding states, private bits and the approximate-pbit Choi state.

Factor ordering of the approximate pbit: key ``a, b`` first, then one
``A_i_j_k, B_i_j_k`` pair per shield coordinate in lexicographic
``(i, j, k)`` order (all 1-based).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg
from .channels import DEFAULT_DIM_CAP
from .errors import DimensionCapError, PreconditionError
from .linalg import DensityMatrix, Operator, SystemLayout, binary_entropy

KEY_LAYOUT = SystemLayout.of(("a", 2), ("b", 2))
PPT_LOG_SLACK = 1e-12


def _swap(d: int) -> np.ndarray:
    f = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            f[i * d + j, j * d + i] = 1.0
    return f


def _pair_layout(d: int, labels=("A", "B")) -> SystemLayout:
    return SystemLayout.of((labels[0], d), (labels[1], d))


def symmetric_state(d: int, labels=("A", "B")) -> DensityMatrix:
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    proj = (np.eye(d * d) + _swap(d)) / 2
    return DensityMatrix._trusted(_pair_layout(d, labels), proj * 2 / (d * (d + 1)))


def antisymmetric_state(d: int, labels=("A", "B")) -> DensityMatrix:
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    proj = (np.eye(d * d) - _swap(d)) / 2
    return DensityMatrix._trusted(_pair_layout(d, labels), proj * 2 / (d * (d - 1)))


def _kron_power(mat: np.ndarray, times: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for _ in range(times):
        out = np.kron(out, mat)
    return out


def hiding_pair(d: int, N: int, r: int, dim_cap: int | None = None):
    """``(omega, sigma)`` on ``N*r`` interleaved ``A_t, B_t`` pairs."""
    count = N * r
    cap = DEFAULT_DIM_CAP if dim_cap is None else dim_cap
    if count * math.log(d * d) > math.log(cap) + 1e-9:
        raise DimensionCapError(f"{d * d}^{count}", cap, "hiding states")
    plus = symmetric_state(d).matrix
    minus = antisymmetric_state(d).matrix
    omega = _kron_power((plus + minus) / 2, count)
    sigma = _kron_power(plus, count)
    factors = []
    for t in range(1, count + 1):
        factors += [(f"A{t}", d), (f"B{t}", d)]
    layout = SystemLayout(tuple(factors))
    return DensityMatrix._trusted(layout, omega), DensityMatrix._trusted(layout, sigma)


# -- perfect pbits -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PbitSpec:
    shield_layout: SystemLayout
    twisting: tuple  # four unitaries indexed by 2*i + j for key basis |i>|j>
    shield_state: DensityMatrix

    def __post_init__(self):
        n = self.shield_layout.total_dim
        twisting = tuple(np.asarray(u, dtype=complex) for u in self.twisting)
        if len(twisting) != 4:
            raise ValueError("need four twisting unitaries")
        for u in twisting:
            if u.shape != (n, n) or np.max(np.abs(u @ u.conj().T - np.eye(n))) > 1e-10:
                raise PreconditionError("twisting operator is not unitary on the shield")
        if self.shield_state.layout.dims != self.shield_layout.dims:
            raise PreconditionError("shield state does not live on the shield layout")
        object.__setattr__(self, "twisting", twisting)

    @classmethod
    def trivial(cls, shield_state: DensityMatrix) -> "PbitSpec":
        n = shield_state.dim
        return cls(shield_state.layout, (np.eye(n),) * 4, shield_state)

    @classmethod
    def random(cls, shield_layout: SystemLayout, rng: np.random.Generator) -> "PbitSpec":
        n = shield_layout.total_dim
        us = tuple(linalg.random_unitary(n, rng) for _ in range(4))
        return cls(shield_layout, us, linalg.random_density_matrix(shield_layout, rng))


def perfect_pbit(spec: PbitSpec) -> DensityMatrix:
    """``U (Phi+ (x) sigma) U^dag`` with the key-controlled twisting ``U``."""
    sigma = spec.shield_state.matrix
    n = sigma.shape[0]
    out = np.zeros((4 * n, 4 * n), dtype=complex)
    for k in (0, 1):
        uk = spec.twisting[3 * k]
        for l in (0, 1):
            ul = spec.twisting[3 * l]
            row, col = 3 * k, 3 * l  # |kk> sits at flat key index 3k
            out[row * n:(row + 1) * n, col * n:(col + 1) * n] = uk @ sigma @ ul.conj().T / 2
    out = (out + out.conj().T) / 2
    return DensityMatrix._trusted(KEY_LAYOUT + spec.shield_layout, out)


def pbit_key_recovery_check(spec: PbitSpec) -> float:
    """Fidelity of the key with ``Phi+`` after Bob undoes the twisting on ``b`` and the shield."""
    gamma = perfect_pbit(spec)
    n = spec.shield_layout.total_dim
    untwist = np.zeros((2 * n, 2 * n), dtype=complex)
    for j in (0, 1):
        untwist[j * n:(j + 1) * n, j * n:(j + 1) * n] = spec.twisting[3 * j].conj().T
    full = np.kron(np.eye(2), untwist)
    rotated = Operator._trusted(gamma.layout, full @ gamma.matrix @ full.conj().T)
    key = linalg.keep_only(rotated, ["a", "b"])
    return linalg.fidelity_with_pure(key, linalg.max_entangled_vector(2))


def discard_and_replace(state: Operator, factors: Sequence[str]) -> DensityMatrix:
    """Swap the named factors for maximally mixed ones, keeping the layout order."""
    layout = state.layout
    reduced = linalg.partial_trace(state, factors)
    mixed = DensityMatrix.maximally_mixed(layout.select(layout.indices(factors)))
    joined = linalg.tensor(reduced, mixed)
    return linalg.permute(joined, list(layout.labels))


# -- the approximate pbit ----------------------------------------------------


@dataclass(frozen=True)
class ZetaParams:
    q: float
    d: int
    r: int
    m: int
    N: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        if min(self.r, self.m, self.N) < 1:
            raise ValueError("r, m and N must be >= 1")
        if not 0.0 < self.q < 0.5:
            raise ValueError(f"q must lie in (0, 1/2), got {self.q}")

    @property
    def shield_pairs(self) -> int:
        return self.N * self.r * self.m

    def log_state_dim(self) -> float:
        return math.log(4) + 2 * self.shield_pairs * math.log(self.d)

    def state_dim(self) -> int:
        return 4 * self.d ** (2 * self.shield_pairs)

    def share_dim(self) -> int:
        """Dimension of one share ``A_i`` (all ``j, k`` factors)."""
        return self.d ** (self.r * self.m)

    def ppt_condition(self) -> bool:
        """``0 < q <= 1/3`` and ``(1-q)/q >= (d/(d-1))^(rN)``, compared in logs."""
        return ppt_condition(self.q, self.d, self.r, self.N)


def ppt_condition(q: float, d: int, r: int, N: int) -> bool:
    if not 0.0 < q <= 1.0 / 3.0:
        return False
    lhs = math.log((1.0 - q) / q)
    rhs = r * N * math.log1p(1.0 / (d - 1))
    return lhs >= rhs - PPT_LOG_SLACK * max(1.0, rhs)


def shield_labels(N: int, r: int, m: int) -> list[tuple[str, str]]:
    return [
        (f"A{i}_{j}_{k}", f"B{i}_{j}_{k}")
        for i in range(1, N + 1)
        for j in range(1, r + 1)
        for k in range(1, m + 1)
    ]


def zeta_normalization(q: float, m: int) -> float:
    return 2 * q**m + 2 * (0.5 - q) ** m


def zeta_state(params: ZetaParams, dim_cap: int | None = None) -> DensityMatrix:
    q, d, r, m, N = params.q, params.d, params.r, params.m, params.N
    cap = DEFAULT_DIM_CAP if dim_cap is None else dim_cap
    if params.log_state_dim() > math.log(cap) + 1e-9:
        required = params.state_dim() if params.shield_pairs <= 64 else f"4*{d}^{2 * params.shield_pairs}"
        raise DimensionCapError(required, cap, "approximate pbit state")
    omega, sigma = hiding_pair(d, N, r, dim_cap=cap)
    w, s = omega.matrix, sigma.matrix
    diag_block = _kron_power(q / 2 * (w + s), m)
    off_block = _kron_power(q / 2 * (w - s), m)
    anti_block = _kron_power((0.5 - q) * s, m)
    key_diag = np.diag([1.0, 0, 0, 1.0])
    key_off = np.zeros((4, 4))
    key_off[0, 3] = key_off[3, 0] = 1.0
    key_anti = np.diag([0, 1.0, 1.0, 0])
    mat = np.kron(key_diag, diag_block) + np.kron(key_off, off_block) + np.kron(key_anti, anti_block)
    norm = zeta_normalization(q, m)
    numeric = float(np.trace(mat).real)
    if abs(numeric - norm) > 1e-9 * max(1.0, norm):
        raise PreconditionError(f"trace {numeric} differs from analytic normalization {norm}")
    mat = mat / norm
    # Built k-major: within each k, the (i, j) pairs in order.
    built = [("a", 2), ("b", 2)]
    for k in range(1, m + 1):
        for i in range(1, N + 1):
            for j in range(1, r + 1):
                built += [(f"A{i}_{j}_{k}", d), (f"B{i}_{j}_{k}", d)]
    state = DensityMatrix._trusted(SystemLayout(tuple(built)), mat)
    order = ["a", "b"] + [lab for pair in shield_labels(N, r, m) for lab in pair]
    return linalg.permute(state, order)


def share_factors(params: ZetaParams, i: int, side: str) -> list[str]:
    return [f"{side}{i}_{j}_{k}" for j in range(1, params.r + 1) for k in range(1, params.m + 1)]


def reduced_first_share(zeta: Operator, params: ZetaParams) -> Operator:
    """Trace out shares ``2..N`` of both shield halves."""
    if params.N == 1:
        return zeta
    traced = []
    for i in range(2, params.N + 1):
        traced += share_factors(params, i, "A") + share_factors(params, i, "B")
    return linalg.partial_trace(zeta, traced)


def block_offdiagonal_norm(zeta: Operator) -> float:
    """Trace norm of the ``<00| . |11>`` key block; the key must be the first two factors."""
    if zeta.layout.dims[:2] != (2, 2):
        raise ValueError("key qubits a, b must be the leading factors")
    n = zeta.dim // 4
    return linalg.trace_norm(zeta.matrix[0:n, 3 * n:4 * n])


def epsilon_closed_form(q: float, r: int, m: int) -> float:
    if not 0.0 < q < 0.5:
        raise ValueError(f"q must lie in (0, 1/2), got {q}")
    if r < 1 or m < 1:
        raise ValueError("r and m must be >= 1")
    ratio = ((1 - 2 * q) / (2 * q)) ** m
    return 0.5 * (1 - (1 - 2.0**-r) ** m / (1 + ratio))


def epsilon_of_state(zeta: Operator) -> float:
    return 0.5 - block_offdiagonal_norm(zeta)


class DeltaValue(NamedTuple):
    exact: float
    simplified: float  # nan outside 0 < eps < 1/32


def delta_of_epsilon(eps: float) -> DeltaValue:
    if not 0.0 < eps < 1.0 / 8.0:
        raise ValueError(f"eps must lie in (0, 1/8), got {eps}")
    x = 2 * math.sqrt(2 * eps)
    exact = 2 * math.sqrt(8 * math.sqrt(2 * eps) + binary_entropy(x)) + x
    if eps < 1.0 / 32.0:
        s = math.sqrt(8 * eps)
        simplified = 2**2.5 * math.sqrt(s * math.log2(1 / (8 * eps)))
    else:
        simplified = math.nan
    return DeltaValue(exact, simplified)


def tau_bound(m: int) -> float:
    """Trace distance of the first-share state to a perfect pbit, for ``m > 5``."""
    if m <= 5:
        raise ValueError(f"bound needs m > 5, got {m}")
    return 16 * math.sqrt(m) * 2.0 ** (-m / 4)


def r_for_m(m: int) -> int:
    """``r = 2m + ceil(log2 m)`` in exact integer arithmetic."""
    return 2 * m + (m - 1).bit_length()
