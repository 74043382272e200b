import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holepair.opkernel import (
    SM, SP, SX, SZ, Adjoint, DensityMatrix, OpSum, SparseOp, StateVec, apply_local, embed_local, op_algebra, op_apply,
)


def random_sparse(rng, dim, density=0.2):
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m[rng.random((dim, dim)) > density] = 0
    return SparseOp(m)


def test_embed_sz_on_second_site():
    op = embed_local(SZ, 1, [2, 2])
    assert np.array_equal(op.toarray(), np.diag([-1, -1, 1, 1]).astype(complex))


def test_embed_identity():
    op = embed_local(np.eye(3), 1, [2, 3, 2])
    assert op == SparseOp.identity(12)


def test_embed_lowering_on_first_site():
    rows, cols, vals = embed_local(SM, 0, [2, 2]).entries
    assert list(zip(rows, cols, vals)) == [(0, 1, 1), (2, 3, 1)]


def test_embed_rejects_bad_shape():
    with pytest.raises(ValueError):
        embed_local(np.eye(3), 0, [2, 2])


def test_entries_sorted_without_zeros():
    op = SparseOp(np.array([[0, 2], [3, 0]], dtype=complex) + np.array([[0, -2], [0, 0]]))
    rows, cols, vals = op.entries
    assert list(zip(rows, cols)) == [(1, 0)] and op.nnz == 1


def test_difference_cancels():
    A = SparseOp(SX)
    assert op_algebra([(1, [A]), (-1, [A])]).nnz == 0


def test_adjoint_of_lowering():
    assert op_algebra([(1, [Adjoint(SparseOp(SM))])]) == SparseOp(SP)


def test_triple_product_matches_dense(rng):
    fs = [random_sparse(rng, 16) for _ in range(3)]
    got = op_algebra([(1, fs)]).toarray()
    ref = fs[0].toarray() @ fs[1].toarray() @ fs[2].toarray()
    assert np.max(np.abs(got - ref)) <= 1e-14 * max(1, np.abs(ref).max())


def test_apply_identity_and_lowering(rng):
    v = StateVec((2, 2), rng.standard_normal(4))
    assert np.array_equal(op_apply(SparseOp.identity(4), v).amplitudes, v.amplitudes)
    one = StateVec((2,), [0, 1])
    assert np.array_equal(op_apply(SparseOp(SM), one).amplitudes, [1, 0])


def test_apply_matches_dense(rng):
    A = random_sparse(rng, 256, 0.05)
    v = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    got = op_apply(A, StateVec((2,) * 8, v)).amplitudes
    assert np.max(np.abs(got - A.toarray() @ v)) <= 1e-13


def test_apply_dimension_mismatch():
    with pytest.raises(ValueError):
        op_apply(SparseOp.identity(4), StateVec((2,), [1, 0]))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 1024))
def test_product_associativity(seed, dim):
    rng = np.random.default_rng(seed)
    A, B = random_sparse(rng, dim, min(1.0, 8 / dim)), random_sparse(rng, dim, min(1.0, 8 / dim))
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    lhs = (A @ B).csr @ v
    rhs = A.csr @ (B.csr @ v)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(np.linalg.norm(rhs), 1e-300)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_double_adjoint_exact(seed):
    A = random_sparse(np.random.default_rng(seed), 12)
    assert A.adjoint().adjoint() == A


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 3), st.integers(0, 3))
def test_disjoint_embeddings_commute(seed, i, j):
    if i == j:
        return
    rng = np.random.default_rng(seed)
    dims = [2, 3, 2, 2]
    a = rng.standard_normal((dims[i], dims[i])) + 1j * rng.standard_normal((dims[i], dims[i]))
    b = rng.standard_normal((dims[j], dims[j])) + 1j * rng.standard_normal((dims[j], dims[j]))
    A, B = embed_local(a, i, dims), embed_local(b, j, dims)
    assert A @ B == B @ A


def test_opsum_apply_matches_sparse(rng):
    dims = (2, 3, 2)
    ops = OpSum(dims).add(0.5, {0: SX, 2: SZ}).add(1j, {1: np.diag([1, 2, 3])})
    v = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    assert np.allclose(ops.apply(v), ops.to_sparse().csr @ v, atol=1e-14)
    assert np.allclose(ops.adjoint().to_sparse().toarray(), ops.to_sparse().toarray().conj().T)


def test_apply_local_matches_embedding(rng):
    dims = (3, 2, 2)
    m = rng.standard_normal((2, 2))
    v = rng.standard_normal(12)
    assert np.allclose(apply_local({2: m}, dims, v), embed_local(m, 2, dims).csr @ v)


def test_statevec_rejects_wrong_length():
    with pytest.raises(ValueError):
        StateVec((2, 2), np.ones(3))


def test_density_matrix_checks():
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[1, 1], [0, 0]]))
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(2))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.5, -0.5]))
    assert DensityMatrix(np.eye(2) / 2).dim == 2
