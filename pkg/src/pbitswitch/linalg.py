"""Dense linear algebra over labeled multipartite systems.

Every operator carries a :class:`SystemLayout`: an ordered list of
``(label, dim)`` factors. Matrix indices follow the Kronecker order of the
layout, first factor most significant.
"""
from __future__ import annotations

import math
import string
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import LayoutError, PreconditionError

HERMITIAN_TOL = 1e-12
SYMMETRIZE_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
ENTROPY_CUTOFF = 1e-12

# PSD checks in the DensityMatrix constructor are skipped above this size.
PSD_CHECK_MAX_DIM = 1024


@dataclass(frozen=True)
class SystemLayout:
    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(lab), int(dim)) for lab, dim in self.factors)
        object.__setattr__(self, "factors", factors)
        labels = [lab for lab, _ in factors]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate labels in layout {labels}")
        for lab, dim in factors:
            if dim < 1:
                raise LayoutError(f"factor {lab!r} has dimension {dim}")

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> "SystemLayout":
        return cls(tuple(pairs))

    @classmethod
    def from_dims(cls, dims: Sequence[int], prefix: str = "q") -> "SystemLayout":
        return cls(tuple((f"{prefix}{i}", d) for i, d in enumerate(dims)))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def __len__(self):
        return len(self.factors)

    def __add__(self, other: "SystemLayout") -> "SystemLayout":
        clash = set(self.labels) & set(other.labels)
        if clash:
            raise LayoutError(f"label collision: {sorted(clash)}")
        return SystemLayout(self.factors + other.factors)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutError(f"no factor labeled {label!r} in {self.labels}") from None

    def indices(self, labels: Iterable[Union[str, int]]) -> list[int]:
        """Resolve a mix of labels and integer positions to positions."""
        out = []
        for item in labels:
            if isinstance(item, (int, np.integer)):
                if not 0 <= item < len(self):
                    raise LayoutError(f"factor index {item} out of range for {len(self)} factors")
                out.append(int(item))
            else:
                out.append(self.index(item))
        return out

    def select(self, indices: Iterable[int]) -> "SystemLayout":
        return SystemLayout(tuple(self.factors[i] for i in indices))

    def relabel(self, mapping: Union[Mapping[str, str], Callable[[str], str]]) -> "SystemLayout":
        if callable(mapping):
            fn = mapping
        else:
            fn = lambda lab: mapping.get(lab, lab)  # noqa: E731
        return SystemLayout(tuple((fn(lab), dim) for lab, dim in self.factors))

    def to_json(self) -> list[dict]:
        return [{"label": lab, "dim": dim} for lab, dim in self.factors]

    @classmethod
    def from_json(cls, items: Sequence[Mapping]) -> "SystemLayout":
        return cls(tuple((item["label"], item["dim"]) for item in items))


def _as_layout(layout) -> SystemLayout:
    if isinstance(layout, SystemLayout):
        return layout
    if isinstance(layout, int):
        return SystemLayout.of(("x", layout))
    return SystemLayout(tuple(layout))


@dataclass(frozen=True, eq=False)
class Operator:
    """A square complex matrix acting on ``layout``."""

    layout: SystemLayout
    matrix: np.ndarray

    def __post_init__(self):
        layout = _as_layout(self.layout)
        mat = np.array(self.matrix, dtype=complex)
        n = layout.total_dim
        if mat.shape != (n, n):
            raise LayoutError(f"matrix shape {mat.shape} does not fit layout of dim {n}")
        mat.flags.writeable = False
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def dagger(self) -> "Operator":
        return Operator(self.layout, self.matrix.conj().T)

    def hermitian_drift(self) -> float:
        if self.matrix.size == 0:
            return 0.0
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermitian_drift() <= tol

    def is_unitary(self, tol: float = 1e-10) -> bool:
        prod = self.matrix @ self.matrix.conj().T
        return float(np.max(np.abs(prod - np.eye(self.dim)))) <= tol

    def relabel(self, mapping) -> "Operator":
        return type(self)._trusted(self.layout.relabel(mapping), self.matrix)

    def with_layout(self, layout: SystemLayout) -> "Operator":
        """Same matrix, new layout of equal dims."""
        layout = _as_layout(layout)
        if layout.dims != self.layout.dims:
            raise LayoutError(f"dims {layout.dims} differ from {self.layout.dims}")
        return type(self)._trusted(layout, self.matrix)

    def allclose(self, other: "Operator", atol: float = 1e-10) -> bool:
        return self.layout.dims == other.layout.dims and np.allclose(
            self.matrix, other.matrix, atol=atol, rtol=0
        )

    def __add__(self, other: "Operator") -> "Operator":
        _same_dims(self, other)
        return Operator(self.layout, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        _same_dims(self, other)
        return Operator(self.layout, self.matrix - other.matrix)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.layout, self.matrix * scalar)

    __rmul__ = __mul__

    @classmethod
    def _trusted(cls, layout: SystemLayout, matrix: np.ndarray) -> "Operator":
        obj = object.__new__(cls)
        mat = np.asarray(matrix, dtype=complex)
        if mat.flags.writeable:
            mat = mat.copy()
            mat.flags.writeable = False
        object.__setattr__(obj, "layout", layout)
        object.__setattr__(obj, "matrix", mat)
        return obj


def _same_dims(a: Operator, b: Operator):
    if a.layout.dims != b.layout.dims:
        raise LayoutError(f"dims {a.layout.dims} and {b.layout.dims} differ")


class DensityMatrix(Operator):
    """Hermitian, unit-trace, positive semidefinite operator."""

    def __post_init__(self):
        super().__post_init__()
        drift = self.hermitian_drift()
        if drift > HERMITIAN_TOL:
            raise PreconditionError(f"density matrix not Hermitian (drift {drift:.3g})")
        tr = self.trace()
        if abs(tr - 1) > TRACE_TOL:
            raise PreconditionError(f"density matrix trace {tr.real:.15g} != 1")
        if self.dim <= PSD_CHECK_MAX_DIM:
            lo = float(np.linalg.eigvalsh(self.matrix)[0])
            if lo < -PSD_TOL:
                raise PreconditionError(f"density matrix has eigenvalue {lo:.3g}")

    @classmethod
    def maximally_mixed(cls, layout) -> "DensityMatrix":
        layout = _as_layout(layout)
        n = layout.total_dim
        return cls._trusted(layout, np.eye(n) / n)

    @classmethod
    def basis(cls, layout, index: Union[int, Sequence[int]]) -> "DensityMatrix":
        """Projector onto a computational basis vector (flat index or digits)."""
        layout = _as_layout(layout)
        if not isinstance(index, (int, np.integer)):
            index = int(np.ravel_multi_index(tuple(index), layout.dims))
        mat = np.zeros((layout.total_dim,) * 2, dtype=complex)
        mat[index, index] = 1.0
        return cls._trusted(layout, mat)

    @classmethod
    def pure(cls, layout, vector) -> "DensityMatrix":
        layout = _as_layout(layout)
        v = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise PreconditionError("zero vector")
        v = v / norm
        return cls(layout, np.outer(v, v.conj()))

    @classmethod
    def from_operator(cls, op: Operator) -> "DensityMatrix":
        """Validate ``op`` as a state, symmetrizing small Hermitian drift."""
        mat = symmetrize(op)
        return cls(op.layout, mat)


def symmetrize(op: Operator) -> np.ndarray:
    drift = op.hermitian_drift()
    if drift > SYMMETRIZE_TOL:
        raise PreconditionError(f"operator not Hermitian (drift {drift:.3g})")
    return (op.matrix + op.matrix.conj().T) / 2


def _rewrap(template: Operator, layout: SystemLayout, matrix: np.ndarray) -> Operator:
    if isinstance(template, DensityMatrix):
        return DensityMatrix._trusted(layout, matrix)
    return Operator._trusted(layout, matrix)


def tensor(a: Operator, b: Operator) -> Operator:
    layout = a.layout + b.layout
    mat = np.kron(a.matrix, b.matrix)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix._trusted(layout, mat)
    return Operator._trusted(layout, mat)


def tensor_all(ops: Sequence[Operator]) -> Operator:
    out = ops[0]
    for op in ops[1:]:
        out = tensor(out, op)
    return out


def _letters(count: int) -> str:
    pool = string.ascii_letters
    if count > len(pool):
        raise LayoutError(f"too many factors ({count // 2}) for einsum bookkeeping")
    return pool[:count]


def partial_trace(op: Operator, traced: Iterable[Union[str, int]]) -> Operator:
    """Trace out the factors named in ``traced`` (labels or positions)."""
    layout = op.layout
    idx = set(layout.indices(traced))
    keep = [i for i in range(len(layout)) if i not in idx]
    if not idx:
        return op
    k = len(layout)
    letters = _letters(2 * k)
    row = list(letters[:k])
    col = list(letters[k:])
    for i in idx:
        col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    tens = op.matrix.reshape(layout.dims * 2)
    res = np.einsum("".join(row) + "".join(col) + "->" + out, tens)
    new_layout = layout.select(keep)
    n = new_layout.total_dim
    return _rewrap(op, new_layout, res.reshape(n, n))


def keep_only(op: Operator, kept: Iterable[Union[str, int]]) -> Operator:
    """Partial trace onto ``kept``, returned in the order given."""
    kept_idx = op.layout.indices(kept)
    traced = [i for i in range(len(op.layout)) if i not in kept_idx]
    reduced = partial_trace(op, traced)
    remaining = [i for i in range(len(op.layout)) if i in kept_idx]
    order = [remaining.index(i) for i in kept_idx]
    return permute(reduced, order)


def partial_transpose(op: Operator, transposed: Iterable[Union[str, int]]) -> Operator:
    layout = op.layout
    idx = layout.indices(transposed)
    k = len(layout)
    axes = list(range(2 * k))
    for i in set(idx):
        axes[i], axes[k + i] = axes[k + i], axes[i]
    tens = op.matrix.reshape(layout.dims * 2).transpose(axes)
    n = layout.total_dim
    return Operator._trusted(layout, tens.reshape(n, n))


def permute(op: Operator, order: Sequence[Union[str, int]]) -> Operator:
    """Reorder factors so that new factor ``j`` is old factor ``order[j]``."""
    layout = op.layout
    perm = layout.indices(order)
    if sorted(perm) != list(range(len(layout))):
        raise LayoutError(f"{order} is not a permutation of {layout.labels}")
    if perm == list(range(len(layout))):
        return op
    k = len(layout)
    tens = op.matrix.reshape(layout.dims * 2).transpose(perm + [k + p for p in perm])
    new_layout = layout.select(perm)
    n = new_layout.total_dim
    return _rewrap(op, new_layout, tens.reshape(n, n))


def merge_factors(op: Operator, labels: Sequence[str], new_label: str) -> Operator:
    """Fuse adjacent factors ``labels`` (in that order) into one factor."""
    layout = op.layout
    idx = layout.indices(labels)
    if idx != list(range(idx[0], idx[0] + len(idx))):
        raise LayoutError(f"factors {labels} are not adjacent and in order")
    dim = math.prod(layout.dims[i] for i in idx)
    factors = layout.factors[: idx[0]] + ((new_label, dim),) + layout.factors[idx[-1] + 1 :]
    return _rewrap(op, SystemLayout(factors), op.matrix)


def eig_hermitian(op: Operator) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching eigenvector columns."""
    w, v = np.linalg.eigh(symmetrize(op))
    return w[::-1].copy(), v[:, ::-1].copy()


def _entropy_from_eigs(w: np.ndarray, cutoff: float = ENTROPY_CUTOFF) -> float:
    w = w[w > cutoff]
    return float(-np.sum(w * np.log2(w)))


def von_neumann_entropy(rho: Operator, cutoff: float = ENTROPY_CUTOFF) -> float:
    """Entropy in bits; eigenvalues at or below ``cutoff`` count as zero."""
    w = np.linalg.eigvalsh(symmetrize(rho))
    if w.size and w[0] < -PSD_TOL:
        raise PreconditionError(f"negative eigenvalue {w[0]:.3g} in entropy argument")
    return _entropy_from_eigs(w, cutoff)


def trace_norm(op: Union[Operator, np.ndarray]) -> float:
    mat = op.matrix if isinstance(op, Operator) else np.asarray(op)
    return float(np.sum(np.linalg.svd(mat, compute_uv=False)))


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def fidelity_with_pure(rho: Operator, vector) -> float:
    v = np.asarray(vector, dtype=complex).reshape(-1)
    return float(np.real(v.conj() @ rho.matrix @ v))


def max_entangled_vector(d: int) -> np.ndarray:
    """``sum_i |i>|i> / sqrt(d)`` as a flat vector of length d*d."""
    return np.eye(d, dtype=complex).reshape(-1) / math.sqrt(d)


def max_entangled(d: int, labels=("X", "Y")) -> DensityMatrix:
    v = max_entangled_vector(d)
    return DensityMatrix._trusted(
        SystemLayout.of((labels[0], d), (labels[1], d)), np.outer(v, v.conj())
    )


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density_matrix(layout, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    layout = _as_layout(layout)
    n = layout.total_dim
    k = n if rank is None else rank
    g = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    m = g @ g.conj().T
    m = (m + m.conj().T) / 2
    return DensityMatrix._trusted(layout, m / np.trace(m).real)


def random_hermitian(layout, rng: np.random.Generator) -> Operator:
    layout = _as_layout(layout)
    n = layout.total_dim
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return Operator(layout, (g + g.conj().T) / 2)
