"""Vectorized Lindblad generators, steady states and the dissipative gap.

Density matrices are flattened in numpy's row-major order, vec(rho)[a*d + b]
= rho[a, b], so that vec(A rho B) = (A kron B^T) vec(rho).  Full spectra are
computed on the real matrix that L becomes in an orthonormal basis of
Hermitian matrices, which halves memory and is several times faster than the
complex eigensolver.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .opkernel import DensityMatrix, SparseOp

__all__ = [
    "DENSE_AUTO_LIMIT",
    "DENSE_MAX",
    "Liouvillian",
    "SpectrumResult",
    "liouvillian",
    "vec",
    "unvec",
    "apply",
    "steady_states",
    "spectrum_gap",
    "residual_norm",
    "hermitian_basis",
    "real_form",
]

DENSE_AUTO_LIMIT = 1024  # d^2 up to which the dense kernel is the steady-state default
SPECTRUM_DENSE_AUTO = 10000  # d^2 up to which the full dense spectrum is the default
DENSE_MAX = 20000  # d^2 beyond which the dense path is refused
ZERO_REL = 1e-8
SHIFT_RE = 1e-6


def _norm1(m: sp.spmatrix) -> float:
    return float(abs(m).sum(axis=0).max()) if m.nnz else 0.0


@dataclass(frozen=True)
class Liouvillian:
    d: int
    matrix: SparseOp
    imag_bound: float  # upper bound on |Im lambda| over the spectrum

    @property
    def dim(self) -> int:
        return self.d * self.d

    @property
    def scale(self) -> float:
        """Cheap upper bound on the spectral radius."""
        return max(_norm1(self.matrix.csr), 1e-300)


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    zero_multiplicity: int
    gap: float
    method: str
    converged: bool = True
    covered_to: float = math.inf  # |Im| range over which no eigenvalue can be missing
    notes: tuple = field(default_factory=tuple)

    @property
    def tau_rel(self) -> float:
        return 1 / self.gap if self.gap > 0 else math.inf


def _spread(h: sp.spmatrix) -> float:
    """E_max - E_min of a Hermitian matrix."""
    d = h.shape[0]
    if d <= 2048:
        e = np.linalg.eigvalsh(h.toarray())
        return float(e[-1] - e[0])
    hi = spla.eigsh(h, k=1, which="LA", return_eigenvectors=False)[0]
    lo = spla.eigsh(h, k=1, which="SA", return_eigenvectors=False)[0]
    return float(hi - lo) * (1 + 1e-8)


def _norm2_sq(m: sp.spmatrix) -> float:
    if m.shape[0] <= 2048:
        return float(np.linalg.norm(m.toarray(), 2) ** 2)
    return _norm1(m) * _norm1(m.conj().T)


def liouvillian(H: SparseOp, jumps: Sequence[SparseOp] = ()) -> Liouvillian:
    """L = -i(H x I - I x H^T) + sum_k [c x conj(c) - (c^dag c x I + I x (c^dag c)^T)/2].

    The stored ``imag_bound`` follows from the numerical range: the coherent
    part contributes at most the spread of H, each dissipator at most 2|c|^2.
    """
    d = H.dim
    I = sp.identity(d, dtype=complex, format="csr")
    h = H.csr
    L = -1j * (sp.kron(h, I) - sp.kron(I, h.T))
    bound = _spread(h) if h.nnz else 0.0
    for c in jumps:
        if c.dim != d:
            raise ValueError(f"jump dimension {c.dim} does not match H dimension {d}")
        m = c.csr
        cdc = (m.conj().T @ m).tocsr()
        L = L + sp.kron(m, m.conj()) - 0.5 * sp.kron(cdc, I) - 0.5 * sp.kron(I, cdc.T)
        bound += 2 * _norm2_sq(m)
    return Liouvillian(d, SparseOp(L), bound)


def vec(rho) -> np.ndarray:
    r = rho.elements if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return np.ascontiguousarray(r, dtype=complex).reshape(-1)


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape(d, d)


def apply(L: Liouvillian, rho) -> np.ndarray:
    return unvec(L.matrix.csr @ vec(rho), L.d)


def residual_norm(L: Liouvillian, rho) -> float:
    """Frobenius norm of L(rho)."""
    r = rho.elements if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if r.shape != (L.d, L.d):
        raise ValueError(f"state shape {r.shape} does not match d = {L.d}")
    return float(np.linalg.norm(L.matrix.csr @ vec(r)))


def hermitian_basis(d: int) -> sp.csr_matrix:
    """Unitary T whose rows are conj(vec) of an orthonormal Hermitian basis.

    Rows: |a><a|, (|a><b| + |b><a|)/sqrt2 and i(|a><b| - |b><a|)/sqrt2 for a < b.
    T^* L T^T is then real for any Lindblad generator L.
    """
    a, b = np.triu_indices(d, 1)
    m = a.size
    r = math.sqrt(0.5)
    diag = np.arange(d) * (d + 1)
    rows = np.concatenate([np.arange(d), d + np.repeat(np.arange(m), 2), d + m + np.repeat(np.arange(m), 2)])
    ab, ba = a * d + b, b * d + a
    cols = np.concatenate([diag, np.stack([ab, ba], 1).ravel(), np.stack([ab, ba], 1).ravel()])
    vals = np.concatenate([np.ones(d), np.full(2 * m, r), np.tile([1j * r, -1j * r], m)])
    # conj(vec) of each basis element
    return sp.csr_matrix((vals.conj(), (rows, cols)), shape=(d * d, d * d))


def real_form(L: Liouvillian) -> np.ndarray:
    """Dense real matrix similar to L."""
    T = hermitian_basis(L.d)
    R = (T @ L.matrix.csr @ T.conj().T).toarray()
    if R.size and np.abs(R.imag).max() > 1e-12 * max(L.scale, 1.0):
        raise ValueError("generator is not Hermiticity preserving")
    return np.ascontiguousarray(R.real)


def _check_memory(n: int, bytes_per_entry: int, copies: float) -> None:
    need = n * n * bytes_per_entry * copies
    try:
        avail = os.sysconf("SC_AVPHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError, AttributeError):  # pragma: no cover - non-POSIX
        return
    if need > avail:
        raise MemoryError(f"dense path needs about {need / 2**30:.1f} GiB, {avail / 2**30:.1f} GiB available")


def _to_density(x: np.ndarray) -> DensityMatrix | None:
    """Hermitize, clip small negative eigenvalues and normalize the trace."""
    x = 0.5 * (x + x.conj().T)
    tr = np.trace(x).real
    if abs(tr) < 1e-12 * max(np.abs(x).max(), 1e-300):
        return None
    x = x / tr
    w, v = np.linalg.eigh(x)
    w = np.where(w < 0, 0.0, w)
    x = (v * w) @ v.conj().T
    x = 0.5 * (x + x.conj().T)
    return DensityMatrix(x / np.trace(x).real)


def _v0(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def _null_basis(L: Liouvillian, method: str, seed: int, k: int = 6) -> tuple[np.ndarray, float]:
    """Columns spanning the numerical kernel, with the threshold used."""
    A = L.matrix.csr
    if method == "dense":
        _check_memory(L.dim, 16, 4)
        M = A.toarray()
        u, s, vh = np.linalg.svd(M)
        thr = ZERO_REL * s[0] if s.size else 0.0
        return vh[s <= thr].conj().T, thr
    thr = ZERO_REL * L.scale
    k = min(k, L.dim - 2)
    w, v = spla.eigs(A.tocsc(), k=k, sigma=SHIFT_RE, which="LM", v0=_v0(L.dim, seed))
    keep = np.abs(w) < thr
    basis = v[:, keep]
    if basis.shape[1] > 1:
        basis = sla.orth(basis)
    return basis, thr


def steady_states(L: Liouvillian, method: str = "auto", seed: int = 53710) -> tuple[list[DensityMatrix], int]:
    """Kernel of L as density matrices plus its dimension.

    For a unique kernel the single state is returned.  For a degenerate kernel
    the list holds the normalized positive parts of a Hermitian spanning set;
    only the multiplicity is basis-independent.
    """
    method = _pick(L, method)
    basis, _ = _null_basis(L, method, seed)
    mult = basis.shape[1]
    if mult == 0:
        raise RuntimeError("no kernel vector below the zero threshold")
    herm = []
    for col in basis.T:
        x = unvec(col, L.d)
        herm += [0.5 * (x + x.conj().T), 0.5j * (x.conj().T - x)]
    flat = np.array([h.reshape(-1) for h in herm]).T
    # real span of the Hermitian parts has dimension mult
    q, r, piv = sla.qr(np.vstack([flat.real, flat.imag]), mode="economic", pivoting=True)
    rank = int(np.sum(np.abs(np.diag(r)) > 1e-10 * max(abs(r[0, 0]), 1e-300)))
    states = []
    for i in piv[: max(rank, 1)]:
        dm = _to_density(herm[i])
        if dm is not None:
            states.append(dm)
    if mult == 1 and not states:
        raise RuntimeError("kernel vector has zero trace")
    return states[:mult], mult


def _pick(L: Liouvillian, method: str) -> str:
    if method == "auto":
        return "dense" if L.dim <= DENSE_AUTO_LIMIT else "sparse"
    if method == "dense" and L.dim > DENSE_MAX:
        raise ValueError(f"dense path limited to d^2 <= {DENSE_MAX}")
    if method not in ("dense", "sparse"):
        raise ValueError(f"unknown method {method!r}")
    return method


def _sort(w: np.ndarray) -> np.ndarray:
    return w[np.lexsort((w.imag, w.real))]


def _gap_of(w: np.ndarray, thr: float) -> tuple[int, float]:
    zero = np.abs(w) < thr
    nz = w[~zero]
    return int(zero.sum()), float(-nz.real.max()) if nz.size else math.inf


def spectrum_gap(
    L: Liouvillian,
    k: int | str = "full",
    method: str = "auto",
    seed: int = 53710,
    certify: bool = True,
    max_shifts: int = 400,
) -> SpectrumResult:
    """Eigenvalues near zero and the dissipative gap.

    Dense (the default up to d^2 = SPECTRUM_DENSE_AUTO): full spectrum of the
    real form.  Sparse: shift-invert at sigma = eps + i y.  The k
    returned eigenvalues are the k nearest to sigma, so the disc of radius r =
    max|lambda - sigma| holds every eigenvalue inside it.  With ``certify`` the
    shifts climb the imaginary axis until the discs cover the strip
    -gap <= Re <= 0 up to the a-priori bound on |Im lambda|; the spectrum is
    conjugation symmetric so y >= 0 suffices.
    """
    if method == "auto":
        method = "dense" if L.dim <= SPECTRUM_DENSE_AUTO else "sparse"
    method = _pick(L, method)
    A = L.matrix.csr
    if method == "dense":
        _check_memory(L.dim, 8, 2.5)
        w = _sort(np.linalg.eigvals(real_form(L)))
        thr = ZERO_REL * max(np.abs(w).max(), 1e-300)
        mult, gap = _gap_of(w, thr)
        return SpectrumResult(w, mult, gap, "dense")
    kk = 30 if k == "full" else int(k)
    kk = min(kk, L.dim - 2)
    thr = ZERO_REL * L.scale
    Ac = A.tocsc()
    v0 = _v0(L.dim, seed)
    found: list[np.ndarray] = []
    notes = []
    y, covered, converged = 0.0, 0.0, True
    for it in range(max_shifts):
        sigma = SHIFT_RE + 1j * y
        try:
            w = _near(Ac, sigma, kk, v0)
        except spla.ArpackNoConvergence as exc:  # keep what converged
            w = 1 / exc.eigenvalues + sigma
            converged = False
            notes.append(f"no convergence at shift {sigma:.4g}")
        found.append(w)
        allw = np.concatenate(found)
        if not certify:
            covered = float(np.abs(w - sigma).max()) if w.size else 0.0
            break
        _, gap = _gap_of(allw, thr)
        r = float(np.abs(w - sigma).max())
        reach = gap + SHIFT_RE if math.isfinite(gap) else 0.0
        if r <= reach:
            notes.append("disc does not reach the gap line; coverage stops")
            converged = False
            break
        half = math.sqrt(r * r - reach * reach)
        lo, hi = y - half, y + half
        if lo > covered:
            # hole in coverage: step back toward the covered edge
            y = covered + 0.5 * half
            continue
        covered = max(covered, hi)
        if covered >= L.imag_bound:
            break
        y = covered + 0.9 * half
    else:
        converged = False
        notes.append("shift budget exhausted")
    tol = 1e-9 * L.scale
    mult = int(np.sum(np.abs(found[0]) < thr)) if found else 0
    merged = _merge(found, tol)
    mirror = merged[np.abs(merged.imag) > tol].conj()
    allw = _sort(np.concatenate([merged, mirror]))
    _, gap = _gap_of(allw, thr)
    return SpectrumResult(allw, mult, gap, "sparse", converged, covered, tuple(notes))


def _near(A: sp.csc_matrix, sigma: complex, k: int, v0: np.ndarray) -> np.ndarray:
    """The k eigenvalues of A closest to sigma by shift-invert Arnoldi."""
    lu = spla.splu(A - sigma * sp.identity(A.shape[0], dtype=complex, format="csc"))
    op = spla.LinearOperator(A.shape, matvec=lu.solve, dtype=complex)
    mu = spla.eigs(op, k=k, which="LM", v0=v0, return_eigenvectors=False)
    return 1 / mu + sigma


def _merge(batches: list, tol: float) -> np.ndarray:
    """Union of shift batches; values repeated across batches are kept once."""
    out = np.zeros(0, dtype=complex)
    for w in batches:
        if out.size:
            dist = np.abs(w[:, None] - out[None, :]).min(axis=1)
            w = w[dist > tol]
        out = np.concatenate([out, w])
    return out
