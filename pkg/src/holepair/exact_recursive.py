"""Length recursion for the pure steady state and its diagonal correlations.

The recursion has a classical reading: scanning the chain from the right,
site n is either a particle (weight q_n) or the right half of a hole pair on
(n-1, n) (weight p_n); site 1 alone may also be a single hole.  Because
p_n + q_n = 1, these weights define a Markov tiling process whose
configuration probabilities are exactly the squared amplitudes of the state.
Every operator diagonal in the hole/particle basis is therefore a tiling
average, which is what the kernels evaluate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .dimer import HOLE, site_vector
from .models import ModelSpec, two_chain_dims
from .opkernel import StateVec

try:
    from . import _recursion as _kern

    BACKEND = "cython"
except ImportError:  # pragma: no cover - exercised only without a compiler
    from . import _recursion_py as _kern

    BACKEND = "numpy"

__all__ = [
    "BACKEND",
    "MAX_FULL_N",
    "RecursionParams",
    "NormSequence",
    "DensityProfile",
    "CzzProfile",
    "recursion_params",
    "norm_sequence",
    "branch_weights",
    "recursive_state",
    "density_profile",
    "czz_profile",
    "hole_pair_distribution",
]

MAX_FULL_N = 12


@dataclass(frozen=True)
class RecursionParams:
    """Dimensionless inputs: w = 1/Omega_t^2, s = sqrt2 zeta/Omega_t, eta_j = J_j/Jbar."""

    N: int
    w: complex
    s: complex
    eta: np.ndarray

    @classmethod
    def from_dimensionless(cls, N: int, Omega_t, zeta=0.0, eta=None) -> "RecursionParams":
        """Build from (Omega_t, zeta); complex values are used as given."""
        if Omega_t == 0:
            raise ValueError("Omega_t must be nonzero")
        eta = np.ones(N - 1) if eta is None else np.asarray(eta, dtype=float)
        if eta.size != N - 1:
            raise ValueError("eta must have N-1 entries")
        Omega_t = complex(Omega_t)
        return cls(int(N), 1 / Omega_t**2, math.sqrt(2) * complex(zeta) / Omega_t, eta)

    @property
    def abs_Omega_t(self) -> float:
        return 1 / math.sqrt(abs(self.w))

    @property
    def abs_zeta2(self) -> float:
        return abs(self.s) ** 2 / (2 * abs(self.w))


Source = Union[ModelSpec, RecursionParams]


def recursion_params(spec: Source) -> RecursionParams:
    if isinstance(spec, RecursionParams):
        return spec
    if spec.variant != "two_chain" or spec.perturbation != "none":
        raise ValueError("recursion applies to the unperturbed two-chain model")
    if spec.Omega == 0:
        raise ValueError("Omega = 0: steady state is not unique")
    G = spec.Gamma
    # 1/Omega_t^2 = Gamma Jbar / Omega^2 and zeta/Omega_t = Gamma/Omega; both finite at Gamma = 0
    return RecursionParams(spec.N, G * spec.Jbar / spec.Omega**2, math.sqrt(2) * G / spec.Omega, spec.eta_j)


@dataclass(frozen=True)
class NormSequence:
    values: np.ndarray  # N_1^2 .. N_N^2
    params: RecursionParams


def norm_sequence(spec: Source) -> NormSequence:
    r = recursion_params(spec)
    a2 = abs(r.w) ** 2
    out = np.empty(r.N)
    out[0] = abs(r.s) ** 2 + 1
    for n in range(2, r.N + 1):
        out[n - 1] = r.eta[n - 2] ** 2 * a2 / out[n - 2] + 1
    return NormSequence(out, r)


def branch_weights(spec: Source) -> tuple[np.ndarray, np.ndarray]:
    """(p, q) indexed 1..N (index 0 unused); p_n + q_n = 1."""
    ns = norm_sequence(spec)
    r, nn = ns.params, ns.values
    N = r.N
    p = np.zeros(N + 1)
    q = np.zeros(N + 1)
    q[1:] = 1 / nn
    p[1] = abs(r.s) ** 2 / nn[0]
    if N >= 2:
        p[2:] = r.eta**2 * abs(r.w) ** 2 / (nn[1:] * nn[:-1])
    return p, q


def recursive_state(spec: Source) -> StateVec:
    """Full-space vector from the length recursion (N <= MAX_FULL_N)."""
    r = recursion_params(spec)
    if r.N > MAX_FULL_N:
        raise ValueError(f"full-space construction limited to N <= {MAX_FULL_N}")
    nn = norm_sequence(r).values
    hh = np.kron(HOLE, HOLE)
    prev2 = np.ones(1, dtype=complex)
    prev1 = (r.s * HOLE + site_vector("x", 1)) / math.sqrt(nn[0])
    for n in range(2, r.N + 1):
        a = r.eta[n - 2] * r.w / math.sqrt(nn[n - 2])
        cur = a * np.kron(hh, prev2) + (-1) ** (n // 2) * np.kron(site_vector("x", n), prev1)
        prev2, prev1 = prev1, cur / math.sqrt(nn[n - 1])
    return StateVec(two_chain_dims(r.N), prev1)


@dataclass(frozen=True)
class DensityProfile:
    particle: np.ndarray  # <n_j>, j = 1..N
    hole: np.ndarray  # m_j = 1 - <n_j>

    def mean_hole(self, skip_first: bool = False) -> float:
        h = self.hole[1:] if skip_first else self.hole
        return float(np.mean(h)) if h.size else float("nan")


def density_profile(spec: Source) -> DensityProfile:
    p, q = branch_weights(spec)
    n = np.clip(_kern.density(p, q), 0.0, 1.0)
    return DensityProfile(n, 1.0 - n)


@dataclass(frozen=True)
class CzzProfile:
    distance: int
    values: np.ndarray  # C_zz(j, j+d) for valid j; NaN where skipped
    skipped: int

    @property
    def mean(self) -> float:
        v = self.values[np.isfinite(self.values)]
        return float(np.mean(v)) if v.size else float("nan")


def czz_profile(spec: Source, distance: int, tol: float = 1e-14) -> CzzProfile:
    """Connected hole-hole correlation at fixed distance, normalized by onsite fluctuations.

    In the steady subspace <sz_A> = -m_j and <sz_A,j sz_A,k> = <h_j h_k> for
    j != k, so the A-chain form and the hole-number form coincide.
    """
    p, q = branch_weights(spec)
    N = len(p) - 1
    if not 1 <= distance < N:
        raise ValueError("distance must satisfy 1 <= d < N")
    n = np.clip(_kern.density(p, q), 0.0, 1.0)
    both = _kern.pair_particle(p, q, distance)
    nj, nk = n[:-distance], n[distance:]
    hh = 1.0 - nj - nk + both
    conn = hh - (1 - nj) * (1 - nk)
    den2 = nj * (1 - nj) * nk * (1 - nk)
    ok = den2 > tol
    vals = np.full(conn.size, np.nan)
    vals[ok] = conn[ok] / np.sqrt(den2[ok])
    return CzzProfile(distance, vals, int(np.count_nonzero(~ok)))


def hole_pair_distribution(spec: Source) -> np.ndarray:
    """P(number of holes = k), k = 0..N."""
    p, q = branch_weights(spec)
    return np.clip(_kern.hole_count(p, q), 0.0, None)
