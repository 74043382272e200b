"""Hamiltonians and jump operators for the chain, qutrit, ladder and fermion variants."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .opkernel import SM, SP, SX, SY, SZ, OpSum, SparseOp, StateVec

__all__ = [
    "VARIANTS",
    "PERTURBATIONS",
    "ModelSpec",
    "a_site",
    "b_site",
    "two_chain_dims",
    "two_chain_terms",
    "single_chain_terms",
    "qutrit_two_chain_terms",
    "ladder_terms",
    "build_two_chain",
    "build_single_chain",
    "build_qutrit_two_chain",
    "build_ladder",
    "build_fermi_hubbard_soc",
    "build",
    "total_magnetization",
    "fermi_pair_op",
    "fermi_spin_projector",
    "fermi_ferromagnet",
]

VARIANTS = ("two_chain", "single_chain", "qutrit_two_chain", "ladder", "fermi_hubbard_soc")
PERTURBATIONS = ("none", "hopping_asym", "detune_equal", "detune_opposite")

# qutrit lowering |0><1| and |1><2|
_Q01 = np.zeros((3, 3), dtype=complex)
_Q01[0, 1] = 1.0
_Q12 = np.zeros((3, 3), dtype=complex)
_Q12[1, 2] = 1.0


@dataclass(frozen=True)
class ModelSpec:
    """Parameter record for every model variant; rates are in units of gamma."""

    variant: str = "two_chain"
    N: int = 1
    Omega: float = 1.0
    Delta: float = 0.0
    gamma: float = 1.0
    nu: float = 1.0
    J: tuple = ()
    perturbation: str = "none"
    delta_pert: float = 0.0
    eta: float = 0.0
    g: float = 0.0
    mu: float = 0.0
    delta_ladder: float = 0.0
    Omega_soc: float = 0.0
    hardcore: bool = True

    def __post_init__(self):
        object.__setattr__(self, "J", tuple(float(x) for x in np.atleast_1d(self.J)) if len(np.atleast_1d(self.J)) else ())
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.perturbation not in PERTURBATIONS:
            raise ValueError(f"unknown perturbation {self.perturbation!r}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if abs(self.nu) > 1:
            raise ValueError("|nu| must not exceed 1")
        if len(self.J) != self.N - 1:
            raise ValueError(f"J must have N-1 = {self.N - 1} entries, got {len(self.J)}")
        if any(not (x > 0 and math.isfinite(x)) for x in self.J):
            raise ValueError("all hopping rates must be positive and finite")
        if not math.isfinite(self.eta):
            raise ValueError("eta must be finite")
        if self.perturbation != "none" and self.N < 2:
            raise ValueError("perturbations act on site 2 and need N >= 2")

    # derived quantities
    @property
    def Jbar(self) -> float:
        """RMS hopping rate; 1 for a single site so that ratios stay finite."""
        return float(np.sqrt(np.mean(np.square(self.J)))) if self.J else 1.0

    @property
    def eta_j(self) -> np.ndarray:
        return np.asarray(self.J, dtype=float) / self.Jbar

    @property
    def Gamma(self) -> complex:
        return complex(self.Delta, -0.5 * self.nu * self.gamma)

    @property
    def Omega_t2(self) -> complex:
        """Square of the dimensionless drive, Omega^2 / (Gamma Jbar)."""
        if self.Gamma == 0:
            raise ValueError("Gamma = 0: the dimensionless drive is undefined")
        return self.Omega**2 / (self.Gamma * self.Jbar)

    @property
    def Omega_t(self) -> complex:
        return self.Omega / cmath.sqrt(self.Gamma * self.Jbar)

    @property
    def zeta(self) -> complex:
        return cmath.sqrt(self.Gamma / self.Jbar)

    def with_(self, **kw) -> "ModelSpec":
        return replace(self, **kw)


def a_site(j: int) -> int:
    """Flat site index of qubit A_j (j counted from 1)."""
    return 2 * (j - 1)


def b_site(j: int) -> int:
    return 2 * (j - 1) + 1


def two_chain_dims(N: int, qutrit: bool = False) -> tuple:
    dims = [2] * (2 * N)
    if qutrit:
        dims[b_site(1)] = 3
    return tuple(dims)


def _xx_chain(ops: OpSum, sites: Sequence[int], J: Sequence[float], lowers=None):
    """(1/2) sum_j J_j (s+_j s-_{j+1} + h.c.) along the listed sites."""
    for k, Jk in enumerate(J):
        lo_a = SM if lowers is None else lowers[k]
        ops.add(0.5 * Jk, {sites[k]: lo_a.conj().T, sites[k + 1]: SM})
        ops.add(0.5 * Jk, {sites[k]: lo_a, sites[k + 1]: SP})


def two_chain_terms(spec: ModelSpec) -> tuple[OpSum, list[OpSum]]:
    if spec.variant != "two_chain":
        raise ValueError("two_chain variant required")
    N = spec.N
    dims = two_chain_dims(N)
    H = OpSum(dims)
    a1, b1 = a_site(1), b_site(1)
    H.add(spec.Omega / 2, {a1: SX}).add(spec.Omega / 2, {b1: SX})
    H.add(spec.Delta / 2, {a1: SZ}).add(-spec.Delta / 2, {b1: SZ})
    # (i nu gamma / 2)(s+_A s-_B - h.c.)
    c = 0.5j * spec.nu * spec.gamma
    H.add(c, {a1: SP, b1: SM}).add(-c, {a1: SM, b1: SP})
    JA = np.asarray(spec.J, dtype=float)
    JB = JA.copy()
    if spec.perturbation == "hopping_asym":
        JB = JA + spec.delta_pert
    _xx_chain(H, [a_site(j) for j in range(1, N + 1)], JA)
    _xx_chain(H, [b_site(j) for j in range(1, N + 1)], JB)
    if spec.perturbation in ("detune_equal", "detune_opposite"):
        sign = 1.0 if spec.perturbation == "detune_equal" else -1.0
        H.add(spec.delta_pert / 2, {a_site(2): SZ}).add(sign * spec.delta_pert / 2, {b_site(2): SZ})
    rg = math.sqrt(spec.gamma)
    jump = OpSum(dims).add(rg, {a1: SM}).add(rg, {b1: SM})
    return H, [jump]


def single_chain_terms(spec: ModelSpec) -> tuple[OpSum, list[OpSum]]:
    if spec.variant != "single_chain":
        raise ValueError("single_chain variant required")
    dims = (2,) * spec.N
    H = OpSum(dims)
    H.add(spec.Omega / 2, {0: SX}).add(spec.Delta / 2, {0: SZ})
    _xx_chain(H, list(range(spec.N)), spec.J)
    return H, [OpSum(dims).add(math.sqrt(spec.gamma), {0: SM})]


def qutrit_two_chain_terms(spec: ModelSpec) -> tuple[OpSum, list[OpSum]]:
    if spec.variant != "qutrit_two_chain":
        raise ValueError("qutrit_two_chain variant required")
    N = spec.N
    dims = two_chain_dims(N, qutrit=True)
    H = OpSum(dims)
    a1, b1 = a_site(1), b_site(1)
    xq = _Q01 + _Q01.T
    zq = np.diag([-1.0, 1.0, 0.0]).astype(complex)
    H.add(spec.Omega / 2, {a1: SX}).add(spec.Omega / 2, {b1: xq})
    H.add(spec.Delta / 2, {a1: SZ}).add(-spec.Delta / 2, {b1: zq})
    low_b = _Q01 + spec.eta * _Q12
    c = 0.5j * spec.gamma
    H.add(c, {a1: SP, b1: low_b}).add(-c, {a1: SM, b1: low_b.conj().T})
    _xx_chain(H, [a_site(j) for j in range(1, N + 1)], spec.J)
    lowers = [_Q01] + [SM] * (N - 2)
    _xx_chain(H, [b_site(j) for j in range(1, N + 1)], spec.J, lowers=lowers if N > 1 else None)
    rg = math.sqrt(spec.gamma)
    jump = OpSum(dims).add(rg, {a1: SM}).add(rg, {b1: low_b})
    return H, [jump]


def ladder_terms(spec: ModelSpec) -> OpSum:
    """Two XX chains with rung exchange, rung chemical potential and the even-rung splitting.

    Rung terms: g(sx sx + sy sy) + (mu/2)(1 + sz sz), so that a singlet costs
    -2g, a triplet +2g and both |00> and |11> cost mu.  The even-rung term
    delta(sx sx + sy sy) shifts S by -2 delta and T by +2 delta.
    """
    if spec.variant != "ladder":
        raise ValueError("ladder variant required")
    L = spec.N
    dims = two_chain_dims(L)
    H = OpSum(dims)
    _xx_chain(H, [a_site(j) for j in range(1, L + 1)], spec.J)
    _xx_chain(H, [b_site(j) for j in range(1, L + 1)], spec.J)
    for j in range(1, L + 1):
        a, b = a_site(j), b_site(j)
        xy = spec.g + (spec.delta_ladder if j % 2 == 0 else 0.0)
        if xy:
            H.add(xy, {a: SX, b: SX}).add(xy, {a: SY, b: SY})
        if spec.mu:
            H.add(spec.mu / 2, {a: np.eye(2, dtype=complex)}).add(spec.mu / 2, {a: SZ, b: SZ})
    return H


def build_two_chain(spec: ModelSpec) -> tuple[SparseOp, list[SparseOp]]:
    H, jumps = two_chain_terms(spec)
    return H.to_sparse(), [c.to_sparse() for c in jumps]


def build_single_chain(spec: ModelSpec) -> tuple[SparseOp, list[SparseOp]]:
    H, jumps = single_chain_terms(spec)
    return H.to_sparse(), [c.to_sparse() for c in jumps]


def build_qutrit_two_chain(spec: ModelSpec) -> tuple[SparseOp, list[SparseOp]]:
    H, jumps = qutrit_two_chain_terms(spec)
    return H.to_sparse(), [c.to_sparse() for c in jumps]


def build_ladder(spec: ModelSpec) -> SparseOp:
    return ladder_terms(spec).to_sparse()


def build(spec: ModelSpec) -> tuple[SparseOp, list[SparseOp]]:
    """(H, jumps) for any variant; closed models return an empty jump list."""
    if spec.variant == "two_chain":
        return build_two_chain(spec)
    if spec.variant == "single_chain":
        return build_single_chain(spec)
    if spec.variant == "qutrit_two_chain":
        return build_qutrit_two_chain(spec)
    if spec.variant == "ladder":
        return build_ladder(spec), []
    return build_fermi_hubbard_soc(spec), []


def total_magnetization(L: int, half: bool = True) -> SparseOp:
    """sum_j (sz_A + sz_B), halved by default so that each removed excitation counts -1."""
    dims = two_chain_dims(L)
    ops = OpSum(dims)
    w = 0.5 if half else 1.0
    for s in range(2 * L):
        ops.add(w, {s: SZ})
    return ops.to_sparse()


# ---------------------------------------------------------------------------
# hard-core spin-orbit-coupled Fermi-Hubbard chain
# per-site basis {0: empty, 1: up, 2: down}; fermion modes ordered (site, up/down)


def _fermi_modes(L: int):
    """Jordan-Wigner annihilators on 2L modes, as OpSums over qubit modes."""
    dims = (2,) * (2 * L)
    parity = -SZ  # (-1)^n with n = |1><1|
    ann = []
    for m in range(2 * L):
        f = {k: parity for k in range(m)}
        f[m] = SM
        ann.append(OpSum(dims).add(1.0, f))
    return ann


def _hardcore_index(L: int) -> np.ndarray:
    """Fock-space indices of the 3^L no-double-occupancy states, in hard-core order."""
    fock_bits = (0b00, 0b01, 0b10)  # empty, up on mode 2j, down on mode 2j+1
    idx = np.zeros(3**L, dtype=np.int64)
    for h in range(3**L):
        r, f = h, 0
        for j in range(L):
            r, d = divmod(r, 3)
            f |= fock_bits[d] << (2 * j)
        idx[h] = f
    return idx


def _restrict(op: SparseOp, idx: np.ndarray) -> SparseOp:
    return SparseOp(op.csr[idx][:, idx])


def build_fermi_hubbard_soc(spec: ModelSpec) -> SparseOp:
    """Hard-core Hamiltonian (Omega_soc/2) sum (n_up - n_dn) + J sum P(a+_{j s} a_{j+1 sbar} + h.c.)P."""
    if spec.variant != "fermi_hubbard_soc":
        raise ValueError("fermi_hubbard_soc variant required")
    if not spec.hardcore:
        raise ValueError("only the hard-core limit is supported")
    L = spec.N
    ann = _fermi_modes(L)
    dims = (2,) * (2 * L)
    H = OpSum(dims)
    for j in range(L):
        H.add(spec.Omega_soc / 2, {2 * j: SP @ SM})
        H.add(-spec.Omega_soc / 2, {2 * j + 1: SP @ SM})
    Hs = H.to_sparse()
    hop = None
    for j in range(L - 1):
        for s in (0, 1):
            cre = ann[2 * j + s].adjoint().to_sparse()
            a = ann[2 * (j + 1) + (1 - s)].to_sparse()
            t = spec.J[j] * (cre @ a)
            t = t + t.adjoint()
            hop = t if hop is None else hop + t
    full = Hs if hop is None else Hs + hop
    return _restrict(full, _hardcore_index(L))


def fermi_pair_op(L: int, spin: str) -> SparseOp:
    """Q_s = (1/sqrt L) sum_j (-1)^j a_{j,s} a_{j+1,s} restricted to the hard-core space."""
    s = {"up": 0, "down": 1}[spin]
    ann = _fermi_modes(L)
    Q = None
    for j in range(1, L):
        t = ((-1) ** j / math.sqrt(L)) * (ann[2 * (j - 1) + s].to_sparse() @ ann[2 * j + s].to_sparse())
        Q = t if Q is None else Q + t
    return _restrict(Q, _hardcore_index(L))


def fermi_spin_projector(L: int, spin: str) -> SparseOp:
    """Projector onto hard-core configurations containing only the given spin species."""
    other = {"up": 2, "down": 1}[spin]
    diag = np.ones(3**L)
    for h in range(3**L):
        r = h
        for _ in range(L):
            r, d = divmod(r, 3)
            if d == other:
                diag[h] = 0.0
                break
    return SparseOp(sp.diags(diag).astype(complex))


def fermi_ferromagnet(L: int, spin: str) -> StateVec:
    d = {"up": 1, "down": 2}[spin]
    amp = np.zeros(3**L, dtype=complex)
    amp[sum(d * 3**j for j in range(L))] = 1.0
    return StateVec((3,) * L, amp)
