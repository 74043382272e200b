"""Dimer-basis algebra and the analytic steady-state constructions.

Each cross-chain pair (A_j, B_j) is one 4-level site with local index a + 2b.
Labels: hole ``o`` = |00>, particle ``x`` = S on odd j and T on even j,
its partner ``m`` (the other m=0 Bell state) and the doublon ``d`` = |11>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .models import ModelSpec, a_site, b_site, two_chain_dims
from .opkernel import SM, DensityMatrix, OpSum, SparseOp, StateVec

__all__ = [
    "SINGLET",
    "TRIPLET",
    "HOLE",
    "DOUBLON",
    "site_vector",
    "dimer_product_state",
    "dimer_ladder_op",
    "ladder_opsum",
    "projector_steady_subspace",
    "hole_pair_terms",
    "hole_pair_q",
    "filled_state",
    "flipped_filled_state",
    "pair_condensate_state",
    "embed_qutrit",
    "cdw_states",
    "TowerState",
    "q_tower_state",
    "steady_basis_q",
    "q_power_norm2",
]

_r = 1 / math.sqrt(2)
# local index a + 2b: |A=0,B=1> -> 2, |A=1,B=0> -> 1
SINGLET = np.array([0, -_r, _r, 0], dtype=complex)
TRIPLET = np.array([0, _r, _r, 0], dtype=complex)
HOLE = np.array([1, 0, 0, 0], dtype=complex)
DOUBLON = np.array([0, 0, 0, 1], dtype=complex)


def site_vector(label: str, j: int) -> np.ndarray:
    """Local 4-vector for a dimer label on site j (counted from 1)."""
    odd = j % 2 == 1
    if label == "o":
        return HOLE
    if label == "x":
        return SINGLET if odd else TRIPLET
    if label == "m":
        return TRIPLET if odd else SINGLET
    if label == "d":
        return DOUBLON
    raise ValueError(f"unknown dimer label {label!r}")


def _kron_sites(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Product vector with vectors[0] on the least significant site."""
    v = np.ones(1, dtype=complex)
    for u in vectors:
        v = np.kron(u, v)
    return v


def dimer_product_state(labels: str) -> StateVec:
    """Product state from a label string, site 1 first (e.g. ``"xoo"``)."""
    N = len(labels)
    v = _kron_sites([site_vector(c, j + 1) for j, c in enumerate(labels)])
    return StateVec(two_chain_dims(N), v)


def ladder_opsum(flavor: str, j: int, N: int) -> OpSum:
    if not 1 <= j <= N:
        raise ValueError(f"site {j} outside 1..{N}")
    s = (-1) ** j
    sign = {"tau": s, "lambda": -s}[flavor]
    return OpSum(two_chain_dims(N)).add(1.0, {b_site(j): SM}).add(sign, {a_site(j): SM})


def dimer_ladder_op(flavor: str, j: int, N: int) -> SparseOp:
    """tau_j = s-_B + (-1)^j s-_A or lambda_j = s-_B - (-1)^j s-_A."""
    return ladder_opsum(flavor, j, N).to_sparse()


def projector_steady_subspace(N: int) -> SparseOp:
    """Product over sites of |o><o| + |x><x|."""
    m = sp.identity(1, dtype=complex, format="csr")
    for j in range(1, N + 1):
        x = site_vector("x", j)
        loc = sp.csr_matrix(np.outer(HOLE, HOLE) + np.outer(x, x.conj()))
        m = sp.kron(loc, m, format="csr")
    return SparseOp(m)


def hole_pair_terms(J: Sequence[float], N: int, flavor: str = "tau") -> OpSum:
    """Q = (1/(2 Jbar sqrt N)) sum_j J_j (-1)^j op_j op_{j+1}, op = tau or lambda."""
    if N < 2:
        raise ValueError("the hole-pair operator needs N >= 2")
    J = np.asarray(J, dtype=float)
    if J.size != N - 1:
        raise ValueError("J must have N-1 entries")
    Jbar = float(np.sqrt(np.mean(J**2)))
    out = OpSum(two_chain_dims(N))
    for j in range(1, N):
        c = J[j - 1] * (-1) ** j / (2 * Jbar * math.sqrt(N))
        sj = (-1) ** j if flavor == "tau" else -((-1) ** j)
        sk = -sj
        for fa, wa in ((b_site(j), 1.0), (a_site(j), sj)):
            for fb, wb in ((b_site(j + 1), 1.0), (a_site(j + 1), sk)):
                out.add(c * wa * wb, {fa: SM, fb: SM})
    return out


def hole_pair_q(J: Sequence[float], N: int) -> SparseOp:
    return hole_pair_terms(J, N).to_sparse()


def filled_state(N: int) -> StateVec:
    """|S_1 T_2 S_3 ...>."""
    return dimer_product_state("x" * N)


def flipped_filled_state(N: int) -> StateVec:
    """|T_1 S_2 T_3 ...>."""
    return dimer_product_state("m" * N)


def embed_qutrit(state: StateVec) -> StateVec:
    """Place a two-chain state into the space where B_1 has a third level."""
    N = len(state.dims) // 2
    t = state.amplitudes.reshape(-1, 2, 2)  # (rest, B1, A1)
    out = np.zeros((t.shape[0], 3, 2), dtype=complex)
    out[:, :2, :] = t
    return StateVec(two_chain_dims(N, qutrit=True), out.reshape(-1))


def pair_condensate_state(spec: ModelSpec) -> StateVec:
    """(1 + (Gamma/Omega) tau_1) exp[(sqrt N / Omega_t^2) Q] |psi_inf>, normalized.

    The exponential series is summed exactly; it terminates after floor(N/2)
    applications of Q.
    """
    if spec.variant not in ("two_chain", "qutrit_two_chain"):
        raise ValueError("pair condensate defined for the two-chain variants")
    if spec.variant == "two_chain" and spec.perturbation != "none":
        raise ValueError("no pure condensate for perturbed models")
    if spec.Omega == 0:
        raise ValueError("Omega = 0: state undefined")
    N = spec.N
    nu = 1.0 if spec.variant == "qutrit_two_chain" else spec.nu
    Gamma = complex(spec.Delta, -0.5 * nu * spec.gamma)
    v = filled_state(N).amplitudes.copy()
    if N >= 2:
        alpha = math.sqrt(N) * Gamma * spec.Jbar / spec.Omega**2
        Q = hole_pair_terms(spec.J, N)
        term, acc = v, v.copy()
        for m in range(1, N // 2 + 1):
            term = (alpha / m) * Q.apply(term)
            acc = acc + term
        v = acc
    v = v + (Gamma / spec.Omega) * ladder_opsum("tau", 1, N).apply(v)
    out = StateVec(two_chain_dims(N), v).normalized()
    return embed_qutrit(out) if spec.variant == "qutrit_two_chain" else out


def _cdw_amplitudes(J: Sequence[float], N: int) -> dict:
    """Site -> weight for the single-particle sublattice state."""
    J = np.asarray(J, dtype=float)
    Jbar = float(np.sqrt(np.mean(J**2))) if J.size else 1.0
    amps = {}
    for jj in range(0, (N + 1) // 2):
        k = N - 2 * jj
        if k < 1:
            break
        w = 1.0
        for i in range(k - 2, 0, -2):
            w *= J[i - 1]
        for i in range(k + 1, N, 2):
            w *= J[i - 1]
        w /= Jbar ** math.ceil((N - 1) / 2)
        amps[k] = (-1) ** jj * w
    return amps


def cdw_states(spec: ModelSpec) -> tuple[StateVec, DensityMatrix]:
    """Two-chain single-particle sublattice state and the matching one-chain mixture."""
    N = spec.N
    amps = _cdw_amplitudes(spec.J, N)
    norm = math.sqrt(sum(w * w for w in amps.values()))
    psi = np.zeros(4**N, dtype=complex)
    phi = np.zeros(2**N, dtype=complex)
    for k, w in amps.items():
        labels = ["o"] * N
        labels[k - 1] = "x"
        psi += (w / norm) * dimer_product_state("".join(labels)).amplitudes
        phi[1 << (k - 1)] = w / norm
    vac = np.zeros(2**N, dtype=complex)
    vac[0] = 1.0
    rho = 0.5 * (np.outer(vac, vac) + np.outer(phi, phi.conj()))
    return StateVec(two_chain_dims(N), psi), DensityMatrix(rho)


@dataclass(frozen=True)
class TowerState:
    state: StateVec
    exhausted: bool
    norm: float


def q_tower_state(n: int, reference: str, spec: ModelSpec) -> TowerState:
    """Normalized Q^n|psi_inf> (or Q~^n|psi~_inf> for ``reference='tilde'``)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    N = spec.N
    if reference in ("inf", "psi_inf"):
        v, flavor = filled_state(N).amplitudes.copy(), "tau"
    elif reference in ("tilde", "psi_tilde"):
        v, flavor = flipped_filled_state(N).amplitudes.copy(), "lambda"
    else:
        raise ValueError(f"unknown reference {reference!r}")
    if n:
        Q = hole_pair_terms(spec.J, N, flavor)
        for _ in range(n):
            v = Q.apply(v)
    nrm = float(np.linalg.norm(v))
    dims = two_chain_dims(N)
    if nrm < 1e-13:
        return TowerState(StateVec(dims, np.zeros_like(v)), True, 0.0)
    return TowerState(StateVec(dims, v / nrm), False, nrm)


def steady_basis_q(J: Sequence[float], N: int) -> OpSum:
    """Q restricted to the {o, x} space, one qubit per site with x = |1>.

    tau_j acts there as sqrt2 |o><x| for either site parity.
    """
    if N < 2:
        raise ValueError("the hole-pair operator needs N >= 2")
    J = np.asarray(J, dtype=float)
    Jbar = float(np.sqrt(np.mean(J**2)))
    low = math.sqrt(2) * SM
    out = OpSum((2,) * N)
    for j in range(1, N):
        out.add(J[j - 1] * (-1) ** j / (2 * Jbar * math.sqrt(N)), {j - 1: low, j: low})
    return out


def q_power_norm2(J: Sequence[float], N: int, m: int) -> float:
    """||Q^m psi_inf||^2 by counting m-pair coverings of the open chain.

    Each pair on bond j contributes eta_j^2 / N and every covering is reached
    in m! orders, so the result is (m!)^2 N^-m times the weighted count.
    """
    J = np.asarray(J, dtype=float)
    eta2 = J**2 / np.mean(J**2)
    # f[n][k]: weighted number of k disjoint pairs on the first n sites
    f = np.zeros((N + 1, m + 1))
    f[0, 0] = f[1, 0] = 1.0
    for n in range(2, N + 1):
        f[n] = f[n - 1]
        f[n, 1:] += eta2[n - 2] * f[n - 2, :-1]
    return math.factorial(m) ** 2 * f[N, m] / N**m
