import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbitswitch import linalg as la
from pbitswitch.errors import LayoutError, PreconditionError
from pbitswitch.linalg import DensityMatrix, Operator, SystemLayout


def brute_partial_trace(mat, dims, traced):
    """Index-by-index sum, independent of the einsum implementation."""
    kept = [i for i in range(len(dims)) if i not in traced]
    kdims = [dims[i] for i in kept]
    tdims = [dims[i] for i in traced]
    out = np.zeros((int(np.prod(kdims)),) * 2, dtype=complex)

    def flat(idx):
        f = 0
        for i, d in zip(idx, dims):
            f = f * d + i
        return f

    def kflat(idx):
        f = 0
        for i, d in zip(idx, kdims):
            f = f * d + i
        return f

    for kr in itertools.product(*map(range, kdims)):
        for kc in itertools.product(*map(range, kdims)):
            acc = 0j
            for t in itertools.product(*map(range, tdims)):
                row, col = [0] * len(dims), [0] * len(dims)
                for pos, i in enumerate(kept):
                    row[i], col[i] = kr[pos], kc[pos]
                for pos, i in enumerate(traced):
                    row[i] = col[i] = t[pos]
                acc += mat[flat(row), flat(col)]
            out[kflat(kr), kflat(kc)] = acc
    return out


@pytest.mark.parametrize("traced", [[0], [1], [2], [0, 2], [1, 2]])
def test_partial_trace_matches_brute_force(rng, traced):
    dims = [2, 3, 2]
    op = la.random_hermitian(SystemLayout.from_dims(dims), rng)
    got = la.partial_trace(op, traced)
    assert np.allclose(got.matrix, brute_partial_trace(op.matrix, dims, traced), atol=1e-12)


def test_partial_transpose_matches_index_swap(rng):
    op = la.random_hermitian(SystemLayout.of(("x", 2), ("y", 3)), rng)
    t = op.matrix.reshape(2, 3, 2, 3).transpose(0, 3, 2, 1).reshape(6, 6)
    assert np.allclose(la.partial_transpose(op, ["y"]).matrix, t)


def test_permute_and_keep_only_order(rng):
    a = la.random_density_matrix(SystemLayout.of(("a", 2)), rng)
    b = la.random_density_matrix(SystemLayout.of(("b", 3)), rng)
    ab = la.tensor(a, b)
    ba = la.permute(ab, ["b", "a"])
    assert ba.layout.labels == ("b", "a")
    assert np.allclose(ba.matrix, np.kron(b.matrix, a.matrix))
    assert np.allclose(la.keep_only(ab, ["b"]).matrix, b.matrix)


def test_merge_factors(rng):
    op = la.random_density_matrix(SystemLayout.of(("x", 2), ("y", 2), ("z", 3)), rng)
    merged = la.merge_factors(op, ["y", "z"], "yz")
    assert merged.layout.dims == (2, 6)
    assert np.allclose(merged.matrix, op.matrix)
    with pytest.raises(LayoutError):
        la.merge_factors(op, ["x", "z"], "xz")


def test_layout_rejects_duplicates_and_unknown():
    lay = SystemLayout.of(("a", 2), ("b", 3))
    with pytest.raises(LayoutError):
        lay + SystemLayout.of(("a", 2))
    with pytest.raises(LayoutError):
        lay.index("c")
    assert SystemLayout.from_json(lay.to_json()) == lay


def test_density_matrix_validation():
    lay = SystemLayout.of(("a", 2))
    with pytest.raises(PreconditionError):
        DensityMatrix(lay, np.diag([1.5, -0.5]))
    with pytest.raises(PreconditionError):
        DensityMatrix(lay, np.diag([0.5, 0.6]))
    with pytest.raises(PreconditionError):
        DensityMatrix(lay, np.array([[0.5, 0.3], [0.1, 0.5]]))


def test_entropy_known_values():
    assert la.von_neumann_entropy(DensityMatrix.maximally_mixed(SystemLayout.of(("a", 8)))) == pytest.approx(3)
    assert la.von_neumann_entropy(la.max_entangled(3)) == pytest.approx(0, abs=1e-12)
    phi = la.max_entangled(2)
    assert la.von_neumann_entropy(la.keep_only(phi, ["X"])) == pytest.approx(1)


def test_max_entangled_partial_transpose_eigenvalue():
    pt = la.partial_transpose(la.max_entangled(2), ["Y"])
    assert np.linalg.eigvalsh(pt.matrix)[0] == pytest.approx(-0.5)


def test_trace_norm_and_fidelity(rng):
    assert la.trace_norm(np.diag([1.0, -2.0, 0.5])) == pytest.approx(3.5)
    v = la.max_entangled_vector(2)
    assert la.fidelity_with_pure(la.max_entangled(2), v) == pytest.approx(1)


def test_random_unitary_is_unitary(rng):
    u = la.random_unitary(5, rng)
    assert np.allclose(u @ u.conj().T, np.eye(5))


def test_operator_is_read_only(rng):
    op = la.random_hermitian(SystemLayout.of(("a", 2)), rng)
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 1


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-9, max_value=0.5))
def test_binary_entropy_bound(x):
    assert la.binary_entropy(x) <= x * math.log2(1 / x**2) + 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_entropy_subadditive(seed):
    rng = np.random.default_rng(seed)
    rho = la.random_density_matrix(SystemLayout.of(("a", 2), ("b", 3)), rng)
    s_ab = la.von_neumann_entropy(rho)
    s_a = la.von_neumann_entropy(la.keep_only(rho, ["a"]))
    s_b = la.von_neumann_entropy(la.keep_only(rho, ["b"]))
    assert s_ab <= s_a + s_b + 1e-9
    assert abs(s_a - s_b) <= s_ab + 1e-9
