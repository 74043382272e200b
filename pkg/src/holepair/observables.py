"""Reduced states, fidelities, entropies and direct correlation functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .models import a_site, two_chain_dims
from .opkernel import SZ, DensityMatrix, StateVec, apply_local

__all__ = [
    "Bipartition",
    "reduce",
    "fidelity",
    "root_fidelity",
    "purity",
    "entanglement_entropy",
    "von_neumann",
    "expect",
    "Correlation",
    "direct_correlation",
]

State = Union[StateVec, DensityMatrix]


@dataclass(frozen=True)
class Bipartition:
    """Sites (flat qubit/qudit indices) kept by a partial trace."""

    keep: tuple

    def __init__(self, keep: Iterable[int]):
        object.__setattr__(self, "keep", tuple(sorted(set(int(k) for k in keep))))

    def check(self, n_sites: int) -> None:
        if not self.keep or len(self.keep) >= n_sites or self.keep[0] < 0 or self.keep[-1] >= n_sites:
            raise ValueError(f"keep={self.keep} is not a nonempty proper subset of {n_sites} sites")

    def complement(self, n_sites: int) -> "Bipartition":
        return Bipartition(s for s in range(n_sites) if s not in self.keep)


def _dims_of(state: State, dims: Sequence[int] | None) -> tuple:
    if isinstance(state, StateVec):
        return state.dims
    if dims is None:
        raise ValueError("dims are required for a DensityMatrix")
    return tuple(dims)


def _axes(n: int, sites: Sequence[int]) -> list[int]:
    # tensor axis k holds site n-1-k
    return [n - 1 - s for s in sites]


def reduce(state: State, keep: Bipartition | Iterable[int], dims: Sequence[int] | None = None) -> DensityMatrix:
    """Partial trace onto ``keep``; the reduced basis keeps the little-endian site order."""
    keep = keep if isinstance(keep, Bipartition) else Bipartition(keep)
    dims = _dims_of(state, dims)
    n = len(dims)
    keep.check(n)
    gone = [s for s in range(n) if s not in keep.keep]
    kept_desc = sorted(keep.keep, reverse=True)  # most significant first
    dk = int(np.prod([dims[s] for s in keep.keep]))
    if isinstance(state, StateVec):
        t = state.tensor()
        order = _axes(n, kept_desc) + _axes(n, gone)
        m = np.transpose(t, order).reshape(dk, -1)
        rho = m @ m.conj().T
    else:
        r = state.elements.reshape(tuple(dims[::-1]) * 2)
        ka, ga = _axes(n, kept_desc), _axes(n, gone)
        order = ka + ga + [a + n for a in ka] + [a + n for a in ga]
        dg = int(np.prod([dims[s] for s in gone]))
        r = np.transpose(r, order).reshape(dk, dg, dk, dg)
        rho = np.einsum("igjg->ij", r)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real)


def _check_pure(psi: StateVec) -> np.ndarray:
    if abs(psi.norm() - 1) > 1e-10:
        raise ValueError(f"state norm {psi.norm():.3e} deviates from 1")
    return psi.amplitudes


def fidelity(rho: DensityMatrix, psi: StateVec) -> float:
    """<psi|rho|psi>."""
    v = _check_pure(psi)
    if rho.dim != v.size:
        raise ValueError("dimension mismatch")
    return float(min(max(np.vdot(v, rho.elements @ v).real, 0.0), 1.0))


def root_fidelity(rho: DensityMatrix, psi: StateVec) -> float:
    """sqrt(<psi|rho|psi>), the Uhlmann fidelity against a pure state."""
    return math.sqrt(fidelity(rho, psi))


def purity(rho: DensityMatrix) -> float:
    r = rho.elements
    return float(np.vdot(r, r).real)


def von_neumann(rho: DensityMatrix, cutoff: float = 1e-14) -> float:
    w = np.linalg.eigvalsh(rho.elements)
    w = np.where(w < 0, 0.0, w)
    w = w[w > cutoff]
    return float(-np.sum(w * np.log(w)))


def entanglement_entropy(state: StateVec, cut: Bipartition | Iterable[int]) -> float:
    """Entropy in nats of the reduced state on ``cut`` from the Schmidt spectrum."""
    cut = cut if isinstance(cut, Bipartition) else Bipartition(cut)
    n = len(state.dims)
    cut.check(n)
    gone = [s for s in range(n) if s not in cut.keep]
    t = state.tensor()
    dk = int(np.prod([state.dims[s] for s in cut.keep]))
    m = np.transpose(t, _axes(n, sorted(cut.keep, reverse=True)) + _axes(n, gone)).reshape(dk, -1)
    s = np.linalg.svd(m, compute_uv=False) ** 2
    s = s / s.sum()
    s = s[s > 1e-14]
    return float(-np.sum(s * np.log(s)))


def expect(state: State, factors: dict, dims: Sequence[int] | None = None) -> complex:
    """Expectation of a product of local matrices ``{site: matrix}``."""
    dims = _dims_of(state, dims)
    if isinstance(state, StateVec):
        v = state.amplitudes
        return complex(np.vdot(v, apply_local(factors, dims, v)))
    r = state.elements
    cols = np.array([apply_local(factors, dims, r[:, i]) for i in range(r.shape[1])]).T
    return complex(np.trace(cols))


@dataclass(frozen=True)
class Correlation:
    value: float
    degenerate: bool


def direct_correlation(state: State, j: int, k: int, N: int | None = None, tol: float = 1e-12) -> Correlation:
    """Connected A-chain sz-sz correlation with the onsite-fluctuation denominator.

    For j != k this is the A-chain form with denominator
    sqrt((<sz_j> + <sz_j>^2)(<sz_k> + <sz_k>^2)).  For j == k the A-chain
    numerator is not the onsite fluctuation, so the hole-number form (which
    the A-chain form equals off the diagonal) is used and gives exactly 1.
    Sites are counted from 1.
    """
    if N is None:
        if not isinstance(state, StateVec):
            raise ValueError("N is required for a DensityMatrix")
        N = len(state.dims) // 2
    dims = state.dims if isinstance(state, StateVec) else two_chain_dims(N)
    zj = expect(state, {a_site(j): SZ}, dims).real
    zk = expect(state, {a_site(k): SZ}, dims).real
    den = (zj + zj * zj) * (zk + zk * zk)
    if den <= tol:
        return Correlation(float("nan"), True)
    if j == k:
        return Correlation(1.0, False)
    zz = expect(state, {a_site(j): SZ, a_site(k): SZ}, dims).real
    return Correlation(float((zz - zj * zk) / math.sqrt(den)), False)
