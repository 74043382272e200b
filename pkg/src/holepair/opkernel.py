"""Sparse and dense operator algebra on mixed-radix tensor-product spaces.

Basis convention: site 0 is the least significant digit of the flat index.
For a two-chain layout the sites are ordered ``A1, B1, A2, B2, ...`` so that
within each dimer the A qubit is less significant than the B qubit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SparseOp",
    "StateVec",
    "DensityMatrix",
    "OpSum",
    "embed_local",
    "op_algebra",
    "op_apply",
    "apply_local",
    "SM",
    "SP",
    "SX",
    "SY",
    "SZ",
    "I2",
]

SM = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
SP = SM.T.copy()
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([-1.0, 1.0]).astype(complex)  # |1><1| - |0><0|
I2 = np.eye(2, dtype=complex)


def _canonical(m) -> sp.csr_matrix:
    m = sp.csr_matrix(m, dtype=complex)
    m.sum_duplicates()
    m.eliminate_zeros()
    m.sort_indices()
    return m


class SparseOp:
    """Immutable complex sparse square operator in canonical CSR form.

    Entries are kept sorted by (row, col), duplicates summed and exact zeros
    dropped, so two equal operators always carry identical buffers.
    """

    __slots__ = ("_m",)

    def __init__(self, matrix):
        m = _canonical(matrix)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got {m.shape}")
        if m.nnz and not np.all(np.isfinite(m.data)):
            raise ValueError("operator has non-finite entries")
        self._m = m

    @classmethod
    def from_entries(cls, dim: int, rows, cols, values) -> "SparseOp":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.size and (rows.min() < 0 or rows.max() >= dim or cols.min() < 0 or cols.max() >= dim):
            raise ValueError("entry index out of range")
        return cls(sp.coo_matrix((np.asarray(values, dtype=complex), (rows, cols)), shape=(dim, dim)))

    @classmethod
    def identity(cls, dim: int) -> "SparseOp":
        return cls(sp.identity(dim, dtype=complex, format="csr"))

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    @property
    def csr(self) -> sp.csr_matrix:
        return self._m

    @property
    def nnz(self) -> int:
        return self._m.nnz

    @property
    def entries(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(rows, cols, values) in lexicographic order."""
        coo = self._m.tocoo()
        return coo.row.astype(np.int64), coo.col.astype(np.int64), coo.data.copy()

    def toarray(self) -> np.ndarray:
        return self._m.toarray()

    def adjoint(self) -> "SparseOp":
        return SparseOp(self._m.conj().T)

    dag = adjoint

    def _check(self, other: "SparseOp"):
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __matmul__(self, other):
        if isinstance(other, SparseOp):
            self._check(other)
            return SparseOp(self._m @ other._m)
        if isinstance(other, StateVec):
            return op_apply(self, other)
        return NotImplemented

    def __add__(self, other: "SparseOp") -> "SparseOp":
        self._check(other)
        return SparseOp(self._m + other._m)

    def __sub__(self, other: "SparseOp") -> "SparseOp":
        self._check(other)
        return SparseOp(self._m - other._m)

    def __mul__(self, c) -> "SparseOp":
        return SparseOp(self._m * complex(c))

    __rmul__ = __mul__

    def __neg__(self) -> "SparseOp":
        return SparseOp(-self._m)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseOp) or other.dim != self.dim:
            return False
        a, b = self._m, other._m
        return (
            a.nnz == b.nnz
            and np.array_equal(a.indptr, b.indptr)
            and np.array_equal(a.indices, b.indices)
            and np.array_equal(a.data, b.data)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"SparseOp(dim={self.dim}, nnz={self.nnz})"


@dataclass(frozen=True)
class StateVec:
    """Pure state with explicit per-site local dimensions (site 0 first)."""

    dims: tuple
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if any(d < 1 for d in dims):
            raise ValueError("local dimensions must be positive")
        if amp.size != int(np.prod(dims, dtype=np.int64)):
            raise ValueError(f"length {amp.size} does not match dims {dims}")
        if not np.all(np.isfinite(amp)):
            raise ValueError("non-finite amplitudes")
        amp.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVec":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVec(self.dims, self.amplitudes / n)

    def inner(self, other: "StateVec") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> "DensityMatrix":
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()))

    def tensor(self) -> np.ndarray:
        """Amplitudes as an array with axis k holding site ``n-1-k``."""
        return self.amplitudes.reshape(self.dims[::-1])


@dataclass(frozen=True)
class DensityMatrix:
    """Dense Hermitian positive matrix; ``normalized`` enables the trace check."""

    elements: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        r = np.array(self.elements, dtype=complex)
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(r - r.conj().T), initial=0.0) > 1e-12:
            raise ValueError("density matrix is not Hermitian within 1e-12")
        if self.normalized and abs(np.trace(r) - 1) > 1e-10:
            raise ValueError(f"trace {np.trace(r).real:.3e} differs from 1")
        if r.shape[0] and np.linalg.eigvalsh(r).min() < -1e-10:
            raise ValueError("density matrix has a negative eigenvalue below -1e-10")
        r.setflags(write=False)
        object.__setattr__(self, "elements", r)

    @property
    def dim(self) -> int:
        return self.elements.shape[0]


def embed_local(local_op, site: int, dims: Sequence[int]) -> SparseOp:
    """I (x) ... (x) local_op (x) ... (x) I with ``site`` counted from the least significant end."""
    dims = [int(d) for d in dims]
    if not 0 <= site < len(dims):
        raise ValueError(f"site {site} out of range for {len(dims)} sites")
    a = np.asarray(local_op, dtype=complex)
    if a.shape != (dims[site], dims[site]):
        raise ValueError(f"local operator shape {a.shape} does not match local dimension {dims[site]}")
    high = int(np.prod(dims[site + 1:], dtype=np.int64))
    low = int(np.prod(dims[:site], dtype=np.int64))
    m = sp.kron(sp.identity(high, dtype=complex, format="csr"), sp.csr_matrix(a), format="csr")
    m = sp.kron(m, sp.identity(low, dtype=complex, format="csr"), format="csr")
    return SparseOp(m)


class Adjoint:
    """Term modifier marking a factor to be conjugate-transposed."""

    __slots__ = ("op",)

    def __init__(self, op: SparseOp):
        self.op = op


def op_algebra(terms: Iterable) -> SparseOp:
    """Sum of ``coefficient * prod(factors)``; factors may be wrapped in :class:`Adjoint`."""
    total = None
    dim = None
    for coef, factors in terms:
        prod = None
        for f in factors:
            m = f.op.adjoint() if isinstance(f, Adjoint) else f
            if dim is None:
                dim = m.dim
            elif m.dim != dim:
                raise ValueError(f"dimension mismatch: {m.dim} vs {dim}")
            prod = m.csr if prod is None else prod @ m.csr
        if prod is None:
            raise ValueError("empty factor list")
        term = prod * complex(coef)
        total = term if total is None else total + term
    if total is None:
        raise ValueError("no terms given")
    return SparseOp(total)


def op_apply(op: SparseOp, state: StateVec) -> StateVec:
    if op.dim != state.dim:
        raise ValueError(f"dimension mismatch: operator {op.dim}, state {state.dim}")
    return StateVec(state.dims, op.csr @ state.amplitudes)


def apply_local(factors: dict, dims: Sequence[int], vec: np.ndarray) -> np.ndarray:
    """Apply a product of single-site matrices ``{site: matrix}`` to a flat vector."""
    n = len(dims)
    t = vec.reshape(tuple(dims[::-1]))
    for site, m in factors.items():
        ax = n - 1 - site
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [ax])), 0, ax)
    return t.reshape(-1)


class OpSum:
    """Operator kept as a list of local product terms.

    Each term is ``(coefficient, {site: local matrix})``.  It can be applied
    to a vector without materializing the full matrix, or converted to a
    :class:`SparseOp`.
    """

    def __init__(self, dims: Sequence[int], terms=None):
        self.dims = tuple(int(d) for d in dims)
        self.terms: list = list(terms or [])

    def add(self, coef, factors: dict) -> "OpSum":
        for s, m in factors.items():
            if np.shape(m) != (self.dims[s], self.dims[s]):
                raise ValueError(f"factor on site {s} has shape {np.shape(m)}")
        self.terms.append((complex(coef), {int(s): np.asarray(m, dtype=complex) for s, m in factors.items()}))
        return self

    def __add__(self, other: "OpSum") -> "OpSum":
        if other.dims != self.dims:
            raise ValueError("dims mismatch")
        return OpSum(self.dims, self.terms + other.terms)

    def adjoint(self) -> "OpSum":
        return OpSum(self.dims, [(c.conjugate(), {s: m.conj().T for s, m in f.items()}) for c, f in self.terms])

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    def apply(self, vec) -> np.ndarray:
        v = vec.amplitudes if isinstance(vec, StateVec) else np.asarray(vec, dtype=complex)
        out = np.zeros(self.dim, dtype=complex)
        for c, f in self.terms:
            out += c * apply_local(f, self.dims, v)
        return out

    def to_sparse(self) -> SparseOp:
        total = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for c, f in self.terms:
            m = sp.identity(1, dtype=complex, format="csr")
            pending = 1  # identity dimension not yet folded in
            for site in range(len(self.dims) - 1, -1, -1):
                loc = f.get(site)
                if loc is None:
                    pending *= self.dims[site]
                    continue
                m = sp.kron(m, sp.identity(pending, dtype=complex, format="csr"), format="csr")
                m = sp.kron(m, sp.csr_matrix(loc), format="csr")
                pending = 1
            m = sp.kron(m, sp.identity(pending, dtype=complex, format="csr"), format="csr")
            total = total + c * m
        return SparseOp(total)
