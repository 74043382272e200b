"""Configuration-driven scans that regenerate the headline numbers.

Every scan takes a plain mapping ``cfg`` with optional keys ``model`` (ModelSpec
field overrides), ``grid`` (name -> list of values) and ``seed``, and returns
a :class:`ScanTable`.  Unknown model or grid names raise ``ValueError``.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field, fields
from typing import Any, Callable, Mapping, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment, minimize
from scipy.stats import poisson

from . import dimer, exact_recursive as rec, lindblad, observables as obs
from .models import ModelSpec, a_site, b_site, build, build_fermi_hubbard_soc, fermi_ferromagnet, fermi_pair_op
from .models import fermi_spin_projector, total_magnetization, two_chain_dims
from .opkernel import SM, SX, SY, SZ, OpSum, SparseOp, StateVec

__all__ = [
    "ScanTable",
    "REGISTRY",
    "DEFAULT_SEED",
    "figure_units",
    "numeric_steady_state",
    "relaxation_time",
    "scan_purity_perturbation",
    "scan_hole_correlation",
    "scan_universal_density",
    "scan_cdw",
    "optimize_qutrit",
    "optimize_eta",
    "ETA_BOUNDS",
    "scan_scar_ee",
    "replication_suite",
    "spectrum_structure_check",
    "coherent_state_check",
    "degenerate_residual_check",
    "fermi_hubbard_check",
    "rsga_identities",
    "experimental_numbers",
]

DEFAULT_SEED = 53710


@dataclass
class ScanTable:
    name: str
    columns: list  # (label, unit)
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, *row) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} cells, table has {len(self.columns)} columns")
        self.rows.append(tuple(row))

    @property
    def labels(self) -> list:
        return [c[0] for c in self.columns]

    def column(self, label: str) -> list:
        i = self.labels.index(label)
        return [r[i] for r in self.rows]

    def where(self, **match) -> list[dict]:
        out = []
        for r in self.rows:
            d = dict(zip(self.labels, r))
            if all(d[k] == v for k, v in match.items()):
                out.append(d)
        return out


# ---------------------------------------------------------------------------
# configuration plumbing

_MODEL_FIELDS = {f.name for f in fields(ModelSpec)}


def _cfg(cfg: Mapping | None, model_defaults: dict, grid_defaults: dict) -> tuple[dict, dict, int]:
    cfg = dict(cfg or {})
    extra = set(cfg) - {"model", "grid", "seed"}
    if extra:
        raise ValueError(f"unknown configuration keys: {sorted(extra)}")
    model = dict(model_defaults)
    for k, v in (cfg.get("model") or {}).items():
        if k not in _MODEL_FIELDS:
            raise ValueError(f"model.{k}: not a model parameter")
        model[k] = v
    grid = dict(grid_defaults)
    for k, v in (cfg.get("grid") or {}).items():
        if k not in grid_defaults:
            raise ValueError(f"grid.{k}: not used by this experiment (known: {sorted(grid_defaults)})")
        grid[k] = list(v)
    return model, grid, int(cfg.get("seed", DEFAULT_SEED))


def _meta(table: ScanTable, model: dict, grid: dict, seed: int, t0: float) -> ScanTable:
    table.metadata.update({"model": _jsonable(model), "grid": _jsonable(grid), "seed": seed})
    table.metadata["wall_time_s"] = time.perf_counter() - t0
    return table


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def figure_units(spec: ModelSpec) -> ModelSpec:
    """Drive and hopping amplitudes doubled; decay rate and dissipative exchange unchanged.

    Converts amplitudes quoted as the coefficient of sigma^x / 2 and the full
    exchange into the convention used by the model builders.
    """
    return spec.with_(Omega=2 * spec.Omega, J=tuple(2 * x for x in spec.J))


def numeric_steady_state(spec: ModelSpec, method: str = "auto", seed: int = DEFAULT_SEED):
    L = lindblad.liouvillian(*build(spec))
    states, mult = lindblad.steady_states(L, method=method, seed=seed)
    return states, mult, L


def relaxation_time(spec: ModelSpec, certify: bool = True, seed: int = DEFAULT_SEED) -> lindblad.SpectrumResult:
    return lindblad.spectrum_gap(lindblad.liouvillian(*build(spec)), seed=seed, certify=certify)


def _uniform_J(N: int, J: float) -> tuple:
    return (float(J),) * (N - 1)


# ---------------------------------------------------------------------------
# purity under symmetry-breaking perturbations

def scan_purity_perturbation(cfg: Mapping | None = None) -> ScanTable:
    t0 = time.perf_counter()
    model, grid, seed = _cfg(
        cfg,
        {"variant": "two_chain", "N": 2, "Omega": 0.5, "Delta": 0.1, "J": [0.25], "nu": 1.0, "gamma": 1.0},
        {"delta": list(np.round(np.linspace(0.0, 0.5, 11), 12)),
         "kind": ["hopping_asym", "detune_equal", "detune_opposite"]},
    )
    base = ModelSpec(**model)
    t = ScanTable("scan_purity_perturbation", [("delta", "gamma"), ("kind", ""), ("purity", "")])
    for kind in grid["kind"]:
        for d in grid["delta"]:
            spec = base.with_(perturbation=kind if d else "none", delta_pert=float(d))
            states, mult, _ = numeric_steady_state(spec, seed=seed)
            t.add(float(d), kind, obs.purity(states[0]))
    mono = {}
    for kind in grid["kind"]:
        p = [r["purity"] for r in t.where(kind=kind)]
        mono[kind] = bool(np.all(np.diff(p) <= 1e-12))
    t.metadata["monotone_decrease"] = mono
    return _meta(t, model, grid, seed, t0)


# ---------------------------------------------------------------------------
# recursion-based scans

def scan_hole_correlation(cfg: Mapping | None = None) -> ScanTable:
    """Chain-averaged hole correlation at fixed distance, |Gamma| = Jbar (|zeta| = 1)."""
    t0 = time.perf_counter()
    model, grid, seed = _cfg(
        cfg,
        {"N": 40},
        {"Omega_t": list(np.round(np.logspace(-0.5, 1.0, 16), 12)), "distance": [1, 2, 3], "zeta": [1.0],
         "spot_N": [8]},
    )
    N = int(model["N"])
    t = ScanTable("scan_hole_correlation", [("Omega_t", ""), ("distance", "sites"), ("czz", ""), ("skipped", "")])
    for Ot in grid["Omega_t"]:
        r = rec.RecursionParams.from_dimensionless(N, float(Ot), float(grid["zeta"][0]))
        for d in grid["distance"]:
            c = rec.czz_profile(r, int(d))
            t.add(float(Ot), int(d), c.mean, c.skipped)
    # full-space spot check of the two-site recursion
    Ns = int(grid["spot_N"][0])
    if Ns:
        r = rec.RecursionParams.from_dimensionless(Ns, 1.7, float(grid["zeta"][0]))
        psi = rec.recursive_state(r)
        diffs = []
        for d in (1, 2):
            prof = rec.czz_profile(r, d).values
            for j in range(1, Ns - d + 1):
                diffs.append(abs(obs.direct_correlation(psi, j, j + d).value - prof[j - 1]))
        t.metadata["spot_check_max_diff"] = float(max(diffs))
    return _meta(t, model, grid, seed, t0)


def universal_law(Omega_t: float, zeta2: float = 0.0, N: int | None = None) -> float:
    """2/|Omega_t|^4, plus the site-1 term when N is given."""
    bulk = 2 / Omega_t**4
    if N is None:
        return bulk
    return bulk + 2 * zeta2 / (N * (Omega_t**2 + 2 * zeta2))


def scan_universal_density(cfg: Mapping | None = None) -> ScanTable:
    t0 = time.perf_counter()
    model, grid, seed = _cfg(
        cfg,
        {},
        {"N": [11, 40, 101, 1001, 10001], "Omega_t": list(np.round(np.logspace(0, 3, 31), 12)),
         "zeta2": [0.05]},
    )
    z2 = float(grid["zeta2"][0])
    t = ScanTable(
        "scan_universal_density",
        [("N", ""), ("Omega_t", ""), ("mbar_bulk", ""), ("mbar_all", ""), ("law_bulk", ""), ("law_full", "")],
    )
    crossover = {}
    for N in grid["N"]:
        N = int(N)
        prev = None
        for Ot in grid["Omega_t"]:
            Ot = float(Ot)
            prof = rec.density_profile(rec.RecursionParams.from_dimensionless(N, Ot, math.sqrt(z2)))
            row = (N, Ot, prof.mean_hole(True), prof.mean_hole(False), universal_law(Ot), universal_law(Ot, z2, N))
            t.add(*row)
            # crossover: the site-1 term overtakes the bulk term (all-site mean = twice the bulk law)
            ratio = row[3] / row[4]
            if prev is not None and prev[1] < 2 <= ratio and N not in crossover:
                x0, x1 = math.log(prev[0]), math.log(Ot)
                f = (2 - prev[1]) / (ratio - prev[1])
                crossover[N] = math.exp(x0 + f * (x1 - x0)) ** 2
            prev = (Ot, ratio)
    t.metadata["crossover_Omega_t2"] = {str(k): v for k, v in crossover.items()}
    t.metadata["crossover_prediction"] = {str(int(N)): int(N) / z2 for N in grid["N"]}
    return _meta(t, model, grid, seed, t0)


def scan_cdw(cfg: Mapping | None = None) -> ScanTable:
    """Weak-drive sublattice profiles.

    Site density is the A-chain excitation <s+_A s-_A> = <n_j>/2; the particle
    number counts dimer particles, sum_j <n_j>; the mean density is the A-chain
    density averaged over sites.
    """
    t0 = time.perf_counter()
    model, grid, seed = _cfg(
        cfg,
        {},
        {"N": [40, 41], "Omega_t": [0.1], "zeta": [0.005], "curve_N": [41], "curve_zeta": [0.005, 0.05],
         "curve_Omega_t": list(np.round(np.logspace(-3, 0.5, 15), 12))},
    )
    t = ScanTable(
        "scan_cdw",
        [("section", ""), ("N", ""), ("zeta", ""), ("Omega_t", ""), ("site", ""), ("value", "")],
    )
    Ot0, z0 = float(grid["Omega_t"][0]), float(grid["zeta"][0])
    for N in grid["N"]:
        N = int(N)
        n = rec.density_profile(rec.RecursionParams.from_dimensionless(N, Ot0, z0)).particle
        for j in range(1, N + 1):
            t.add("profile", N, z0, Ot0, j, 0.5 * n[j - 1])
        odd, even = n[0::2], n[1::2]
        t.add("particle_number", N, z0, Ot0, 0, float(n.sum()))
        t.add("even_over_odd", N, z0, Ot0, 0, float(even.sum() / odd.sum()) if odd.sum() else math.nan)
        t.add("mean_density", N, z0, Ot0, 0, float(0.5 * n.mean()))
        t.add("mean_density_law", N, z0, Ot0, 0, N * Ot0**4 / 8)
    for N in grid["curve_N"]:
        for z in grid["curve_zeta"]:
            for Ot in grid["curve_Omega_t"]:
                n = rec.density_profile(rec.RecursionParams.from_dimensionless(int(N), float(Ot), float(z))).particle
                t.add("curve", int(N), float(z), float(Ot), 0, float(0.5 * n.mean()))
    return _meta(t, model, grid, seed, t0)


# ---------------------------------------------------------------------------
# relaxation times and the qutrit coupling asymmetry

ETA_BOUNDS = (math.log(0.1), math.log(100.0))


@dataclass(frozen=True)
class EtaResult:
    eta: float
    tau: float
    evaluations: int
    converged: bool


def optimize_eta(spec: ModelSpec, seed: int = DEFAULT_SEED, maxfev: int = 200) -> EtaResult:
    """Minimize the qutrit relaxation time over eta by Nelder-Mead on ln eta.

    Starts at eta = 1 with simplex spread 0.5; xatol = fatol = 1e-3 on the
    log scale, i.e. relative tolerance 1e-3 on eta and on tau.  Large
    Liouvillians are scored by a single shift-invert solve at the origin; the
    final time is certified separately by the caller.  The search is confined
    to ETA_BOUNDS on ln eta: the time can keep falling toward a plateau as eta
    grows, and beyond ~1e3 the zero-eigenvalue threshold (relative to the
    Liouvillian norm, which grows as eta^2) reaches the slowest decay rates.
    Evaluations with a non-unique or undetected steady state score as failures.
    """
    cache: dict = {}

    def f(x):
        key = float(x[0])
        if key not in cache:
            L = lindblad.liouvillian(*build(spec.with_(eta=math.exp(key))))
            if L.dim <= lindblad.DENSE_AUTO_LIMIT:
                g = lindblad.spectrum_gap(L, method="dense")
            else:
                g = lindblad.spectrum_gap(L, k=10, method="sparse", seed=seed, certify=False)
            ok = math.isfinite(g.tau_rel) and g.tau_rel > 0 and g.zero_multiplicity == 1
            cache[key] = math.log(g.tau_rel) if ok else 50.0
        return cache[key]

    res = minimize(
        f, x0=[0.0], method="Nelder-Mead", bounds=[ETA_BOUNDS],
        options={"initial_simplex": [[0.0], [math.log(1.5)]], "xatol": 1e-3, "fatol": 1e-3, "maxfev": maxfev},
    )
    best = min(cache, key=cache.get)
    return EtaResult(math.exp(best), math.exp(cache[best]), len(cache), bool(res.success))


def optimize_qutrit(cfg: Mapping | None = None) -> ScanTable:
    """Relaxation times of the qubit, qutrit and single-chain variants versus Jbar.

    Amplitudes in ``model`` and the ``Jbar`` grid are read in figure units
    (see :func:`figure_units`).  Infidelities are 1 - sqrt(<psi_inf|rho|psi_inf>).
    """
    t0 = time.perf_counter()
    model, grid, seed = _cfg(
        cfg,
        {"N": 3, "Omega": 10.0, "Delta": 0.0, "gamma": 1.0},
        {"Jbar": [7.0], "certify": [1]},
    )
    N = int(model["N"])
    cert = bool(grid["certify"][0])
    common = {k: v for k, v in model.items() if k in ("Omega", "Delta", "gamma")}
    t = ScanTable(
        "optimize_qutrit",
        [("N", ""), ("Jbar", "gamma"), ("eta_opt", ""), ("tau_2qb", "1/gamma"), ("tau_qutrit", "1/gamma"),
         ("tau_sc", "1/gamma"), ("infid_2qb", ""), ("infid_qutrit", ""), ("nm_converged", ""), ("nm_evals", "")],
    )
    psi_inf = dimer.filled_state(N)
    for Jb in grid["Jbar"]:
        J = _uniform_J(N, float(Jb))
        two = figure_units(ModelSpec(variant="two_chain", N=N, J=J, nu=1.0, **common))
        sc = figure_units(ModelSpec(variant="single_chain", N=N, J=J, **common))
        qt = figure_units(ModelSpec(variant="qutrit_two_chain", N=N, J=J, **common))
        tau2 = relaxation_time(two, cert, seed).tau_rel
        tausc = relaxation_time(sc, cert, seed).tau_rel
        opt = optimize_eta(qt, seed)
        qbest = qt.with_(eta=opt.eta)
        tauq = relaxation_time(qbest, cert, seed).tau_rel
        f2 = 1 - abs(np.vdot(psi_inf.amplitudes, dimer.pair_condensate_state(two).amplitudes))
        states, _, _ = numeric_steady_state(qbest, seed=seed)
        fq = 1 - obs.root_fidelity(states[0], dimer.embed_qutrit(psi_inf))
        t.add(N, float(Jb), opt.eta, tau2, tauq, tausc, float(f2), float(fq), int(opt.converged), opt.evaluations)
    etas = np.array(t.column("eta_opt"))
    Js = np.array(t.column("Jbar"))
    if Js.size >= 3:
        top = Js >= Js.max() / 10
        if top.sum() >= 3:
            A = np.vstack([Js[top], np.ones(top.sum())]).T
            coef, *_ = np.linalg.lstsq(A, etas[top], rcond=None)
            pred = A @ coef
            ss = np.sum((etas[top] - etas[top].mean()) ** 2)
            t.metadata["eta_linear_fit"] = {"slope": float(coef[0]), "intercept": float(coef[1]),
                                            "r2": float(1 - np.sum((etas[top] - pred) ** 2) / ss) if ss else 1.0}
    return _meta(t, model, grid, seed, t0)


def experimental_numbers(cfg: Mapping | None = None) -> ScanTable:
    """Hardware-scale cases: 3+3 qubits at gamma = Omega = Jbar, 3+3 with a qutrit, one chain of 7.

    Amplitudes are read in figure units.  Fidelities are sqrt(<psi|rho|psi>).
    """
    t0 = time.perf_counter()
    model, grid, seed = _cfg(cfg, {}, {"case": ["two_chain_3", "qutrit_3", "single_chain_7"], "certify": [1]})
    cert = bool(grid["certify"][0])
    t = ScanTable("experimental_numbers", [("case", ""), ("quantity", ""), ("value", "")])
    for case in grid["case"]:
        if case == "two_chain_3":
            spec = figure_units(ModelSpec(variant="two_chain", N=3, Omega=1.0, J=(1.0, 1.0), nu=1.0))
            states, _, _ = numeric_steady_state(spec, seed=seed)
            t.add(case, "tau_rel", relaxation_time(spec, cert, seed).tau_rel)
            t.add(case, "fidelity", obs.root_fidelity(states[0], dimer.filled_state(3)))
        elif case == "qutrit_3":
            base = figure_units(ModelSpec(variant="qutrit_two_chain", N=3, Omega=10 / 3, J=(10 / 3, 10 / 3)))
            opt = optimize_eta(base, seed)
            spec = base.with_(eta=opt.eta)
            states, _, _ = numeric_steady_state(spec, seed=seed)
            bell = dimer.embed_qutrit(dimer.filled_state(3))
            t.add(case, "tau_rel", relaxation_time(spec, cert, seed).tau_rel)
            t.add(case, "fidelity", obs.root_fidelity(states[0], bell))
            t.add(case, "eta", opt.eta)
        elif case == "single_chain_7":
            spec = figure_units(ModelSpec(variant="single_chain", N=7, Omega=1.0, J=(1.0,) * 6))
            t.add(case, "tau_rel", relaxation_time(spec, cert, seed).tau_rel)
        else:
            raise ValueError(f"unknown case {case!r}")
    return _meta(t, model, grid, seed, t0)


# ---------------------------------------------------------------------------
# scar towers on the ladder

def _sector(M: SparseOp, value: float) -> np.ndarray:
    diag = M.csr.diagonal().real
    return np.flatnonzero(np.abs(diag - value) < 1e-9)


def scan_scar_ee(cfg: Mapping | None = None) -> ScanTable:
    t0 = time.perf_counter()
    model, grid, seed = _cfg(
        cfg,
        {"variant": "ladder", "N": 8, "J": [1.0] * 7, "mu": 0.2, "g": 0.5, "delta_ladder": 0.15},
        {"M": [-2, -4]},
    )
    spec = ModelSpec(**model)
    L = spec.N
    H = build(spec)[0].csr.real.tocsr()
    Mop = total_magnetization(L)
    cut = obs.Bipartition(range(L))  # qubits of sites 1..L/2
    t = ScanTable("scan_scar_ee", [("M", ""), ("energy", "J"), ("ee", "nats"), ("q_state", "")])
    qinfo = {}
    towers = {}
    for ref in ("inf", "tilde"):
        for n in range(L // 2 + 1):
            ts = dimer.q_tower_state(n, ref, spec)
            if ts.exhausted:
                break
            v = ts.state.amplitudes
            Hv = H @ v
            E = float(np.vdot(v, Hv).real)
            towers[(ref, n)] = (E, float(np.linalg.norm(Hv - E * v)), ts.state)
    for Mv in grid["M"]:
        idx = _sector(Mop, float(Mv))
        Hsec = H[idx][:, idx].toarray()
        w, V = np.linalg.eigh(Hsec)
        ees = np.empty(w.size)
        full = np.zeros(4**L)
        for i in range(w.size):
            full[:] = 0.0
            full[idx] = V[:, i]
            ees[i] = obs.entanglement_entropy(StateVec(two_chain_dims(L), full), cut)
        flags = np.zeros(w.size, dtype=bool)
        found = []
        for (ref, n), (E, res, st) in towers.items():
            amp = st.amplitudes[idx]
            if np.linalg.norm(amp) < 0.999:
                continue
            near = np.abs(w - E) < 1e-8
            weight = float(np.sum(np.abs(V[:, near].T @ amp) ** 2))
            if weight > 0.999:
                flags[near] = True
                found.append({"ref": ref, "n": n, "energy": E, "residual": res, "overlap": weight,
                              "ee": obs.entanglement_entropy(st, cut)})
        for i in range(w.size):
            t.add(int(Mv), float(w[i]), float(ees[i]), int(flags[i]))
        third = w.size // 3
        qinfo[str(int(Mv))] = {"dim": int(w.size), "median_mid_ee": float(np.median(ees[third: w.size - third])),
                               "q_states": found}
    t.metadata["sectors"] = qinfo
    t.metadata["towers"] = {f"{r}:{n}": {"energy": E, "residual": res} for (r, n), (E, res, _) in towers.items()}
    return _meta(t, model, grid, seed, t0)


def rsga_identities(spec: ModelSpec) -> dict:
    """Norms of H1|psi_inf> - 2 mu Q|psi_inf>, H2|psi_inf> and of the matrix H3.

    H1 = [H, Q], H2 = [H1, Q], H3 = [H2, Q] on the full ladder space.
    """
    L = spec.N
    H = build(spec)[0].csr
    Q = dimer.hole_pair_q(spec.J, L).csr
    H1 = (H @ Q - Q @ H).tocsr()
    H2 = (H1 @ Q - Q @ H1).tocsr()
    H3 = (H2 @ Q - Q @ H2).tocsr()
    psi = dimer.filled_state(L).amplitudes
    Qpsi = Q @ psi
    h1 = H1 @ psi
    # best-fitting spacing for reference
    fit = float(np.vdot(Qpsi, h1).real / max(np.vdot(Qpsi, Qpsi).real, 1e-300))
    return {
        "h1_residual": float(np.linalg.norm(h1 - 2 * spec.mu * Qpsi)),
        "h1_spacing_fit": fit,
        "h2_norm": float(np.linalg.norm(H2 @ psi)),
        "h3_max": float(np.abs(H3.data).max()) if H3.nnz else 0.0,
    }


# ---------------------------------------------------------------------------
# replication of boundary states along chains and trees

def _dimer_coupling(n: int, edges: Sequence[tuple], Js: Sequence[float], heisenberg: bool) -> OpSum:
    """sum_e J_e [P_A . P_A - P_B . P_B] over dimer edges, P in (x, y) or (x, y, z)."""
    ops = OpSum((2,) * (2 * n))
    paulis = (SX, SY, SZ) if heisenberg else (SX, SY)
    for (u, v), J in zip(edges, Js):
        for P in paulis:
            ops.add(J, {2 * u: P, 2 * v: P})
            ops.add(-J, {2 * u + 1: P, 2 * v + 1: P})
    return ops


def _replicate(psi: np.ndarray, n: int) -> np.ndarray:
    v = np.ones(1, dtype=complex)
    for _ in range(n):
        v = np.kron(psi, v)
    return v


def _random_state(rng: np.random.Generator, parity: str | None) -> np.ndarray:
    z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    if parity == "even":
        z[[1, 2]] = 0
    elif parity == "odd":
        z[[0, 3]] = 0
    return z / np.linalg.norm(z)


def _random_tree(rng: np.random.Generator, n: int) -> list[tuple]:
    return [(int(rng.integers(0, k)), k) for k in range(1, n)]


def _tree_degeneracy(J1: float, J2: float, seed: int) -> int:
    """Root dimer with two leaves; the root alone is pumped into the singlet."""
    n = 3
    dims = (2,) * (2 * n)
    H = _dimer_coupling(n, [(0, 1), (0, 2)], [J1, J2], True).to_sparse()
    S = dimer.SINGLET
    pump = np.outer(S, dimer.HOLE)  # |S><00| on the root dimer, local index a + 2b
    c1 = OpSum(dims).add(1.0, {0: SM}).add(1.0, {1: SM}).to_sparse()
    c2 = SparseOp(np.kron(np.eye(4 ** (n - 1)), pump))
    L = lindblad.liouvillian(H, [c1, c2])
    return lindblad.steady_states(L, method="sparse", seed=seed)[1]


def replication_suite(cfg: Mapping | None = None) -> ScanTable:
    t0 = time.perf_counter()
    model, grid, seed = _cfg(cfg, {}, {"draws": [5], "max_dimers": [5], "tree_nodes": [7]})
    rng = np.random.default_rng(seed)
    t = ScanTable("replication_suite", [("case", ""), ("size", "dimers"), ("draw", ""), ("residual", "")])
    draws = int(grid["draws"][0])
    for n in range(2, int(grid["max_dimers"][0]) + 1):
        for k in range(draws):
            Js = rng.uniform(0.5, 2.0, n - 1)
            edges = [(j, j + 1) for j in range(n - 1)]
            xx = _dimer_coupling(n, edges, Js, False)
            hb = _dimer_coupling(n, edges, Js, True)
            for parity in ("even", "odd"):
                psi = _replicate(_random_state(rng, parity), n)
                t.add(f"xx_{parity}", n, k, float(np.linalg.norm(xx.apply(psi))))
            psi = _replicate(_random_state(rng, None), n)
            t.add("xx_generic", n, k, float(np.linalg.norm(xx.apply(psi))))
            t.add("heisenberg_generic", n, k, float(np.linalg.norm(hb.apply(psi))))
    nt = int(grid["tree_nodes"][0])
    for k in range(draws):
        n = int(rng.integers(3, nt + 1))
        edges = _random_tree(rng, n)
        Js = 0.5 + rng.permutation(len(edges)) * 0.37 + rng.uniform(0, 0.1, len(edges))
        psi = _replicate(_random_state(rng, None), n)
        t.add("tree_heisenberg", n, k, float(np.linalg.norm(_dimer_coupling(n, edges, Js, True).apply(psi))))
        psi = _replicate(_random_state(rng, "odd"), n)
        t.add("tree_xx_odd", n, k, float(np.linalg.norm(_dimer_coupling(n, edges, Js, False).apply(psi))))
    t.metadata["tree_steady_multiplicity"] = {
        "distinct": _tree_degeneracy(1.0, 1.7, seed),
        "equal": _tree_degeneracy(1.3, 1.3, seed),
    }
    return _meta(t, model, grid, seed, t0)


# ---------------------------------------------------------------------------
# normal-mode structure of the single chain

def subset_sum_mismatch(spectrum: np.ndarray, rapidities: Sequence[complex]) -> float:
    """Largest distance in the best one-to-one match of all subset sums to the spectrum."""
    sums = np.array([sum(c) for r in range(len(rapidities) + 1) for c in itertools.combinations(rapidities, r)])
    cost = np.abs(sums[:, None] - spectrum[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def best_rapidity_set(spectrum: np.ndarray, size: int = 4) -> tuple[float, tuple]:
    best = (math.inf, ())
    for combo in itertools.combinations(range(spectrum.size), size):
        rap = tuple(spectrum[list(combo)])
        err = subset_sum_mismatch(spectrum, rap)
        if err < best[0]:
            best = (err, combo)
    return best


def spectrum_structure_check(cfg: Mapping | None = None) -> ScanTable:
    t0 = time.perf_counter()
    model, grid, seed = _cfg(
        cfg, {"variant": "single_chain", "N": 2, "J": [1.0], "Delta": 0.0, "gamma": 1.0}, {"Omega": [0.0, 0.6]}
    )
    t = ScanTable("spectrum_structure_check",
                  [("section", ""), ("Omega", "gamma"), ("index", ""), ("re", "gamma"), ("im", "gamma")])
    summary = {}
    for Om in grid["Omega"]:
        spec = ModelSpec(**{**model, "Omega": float(Om)})
        res = lindblad.spectrum_gap(lindblad.liouvillian(*build(spec)), method="dense")
        w = res.eigenvalues
        for i, x in enumerate(w):
            t.add("eigenvalue", float(Om), i, float(x.real), float(x.imag))
        err, combo = best_rapidity_set(w)
        for i in combo:
            t.add("rapidity", float(Om), int(i), float(w[i].real), float(w[i].imag))
        summary[str(float(Om))] = {"best_mismatch": err, "contains_zero": bool(np.min(np.abs(w)) < 1e-9)}
    t.metadata["subset_sum"] = summary
    return _meta(t, model, grid, seed, t0)


# ---------------------------------------------------------------------------
# coherent-state picture

def coherent_state_check(cfg: Mapping | None = None) -> ScanTable:
    t0 = time.perf_counter()
    model, grid, seed = _cfg(
        cfg, {}, {"N": [6, 8, 10, 12, 14], "m": [1, 2, 3, 4], "poisson_N": [200], "poisson_Omega_t": [3.0]}
    )
    t = ScanTable("coherent_state_check", [("section", ""), ("N", ""), ("m", ""), ("value", ""), ("reference", "")])
    for N in grid["N"]:
        N = int(N)
        J = [1.0] * (N - 1)
        Q = dimer.steady_basis_q(J, N)
        v = np.zeros(2**N)
        v[-1] = 1.0  # all sites particles
        for m in range(1, max(grid["m"]) + 1):
            v = Q.apply(v)
            if m in grid["m"]:
                ratio = float(np.vdot(v, v).real) / math.factorial(m)
                t.add("norm_ratio", N, m, ratio, dimer.q_power_norm2(J, N, m) / math.factorial(m))
    Np, Ot = int(grid["poisson_N"][0]), float(grid["poisson_Omega_t"][0])
    holes = rec.hole_pair_distribution(rec.RecursionParams.from_dimensionless(Np, Ot, 0.0))
    pairs = holes[0::2]
    lam = Np / Ot**4
    ref = poisson.pmf(np.arange(pairs.size), lam)
    tv = 0.5 * (np.abs(pairs - ref).sum() + max(0.0, 1 - ref.sum()))
    for k, (pk, rk) in enumerate(zip(pairs, ref)):
        if pk > 1e-15 or rk > 1e-15:
            t.add("pair_count", Np, k, float(pk), float(rk))
    t.metadata["poisson"] = {"N": Np, "Omega_t": Ot, "mean": lam, "tv_distance": float(tv),
                             "odd_hole_weight": float(holes[1::2].sum())}
    return _meta(t, model, grid, seed, t0)


# ---------------------------------------------------------------------------
# degenerate family at strong drive

def degenerate_residual_check(cfg: Mapping | None = None) -> ScanTable:
    t0 = time.perf_counter()
    model, grid, seed = _cfg(
        cfg,
        {"variant": "two_chain", "N": 1, "nu": 1.0, "Delta": 0.0, "gamma": 1.0},
        {"Omega": [10.0, 100.0, 1000.0], "nu_prime": [-1 / 3, 0.0, 0.5, 1.0]},
    )
    t = ScanTable(
        "degenerate_residual_check",
        [("nu_prime", ""), ("Omega", "gamma"), ("residual", "gamma"), ("relative_residual", ""), ("drift", "")],
    )
    S = dimer.SINGLET
    fits = {}
    for nup in grid["nu_prime"]:
        rho = (1 - nup) * np.eye(4) / 4 + nup * np.outer(S, S.conj())
        res = []
        for Om in grid["Omega"]:
            spec = ModelSpec(**{**model, "Omega": float(Om)})
            L = lindblad.liouvillian(*build(spec))
            r = lindblad.residual_norm(L, rho)
            Ld = L.matrix.toarray()
            rel = r / np.linalg.norm(Ld, 2)
            evolved = sla.expm(Ld / spec.gamma) @ lindblad.vec(rho)
            drift = float(np.linalg.norm(evolved - lindblad.vec(rho)))
            t.add(float(nup), float(Om), r, rel, drift)
            res.append((Om, r, rel, drift))
        x = np.log([a[0] for a in res])
        fits[str(float(nup))] = {
            name: float(np.polyfit(x, np.log(np.maximum([a[i] for a in res], 1e-300)), 1)[0])
            for i, name in ((1, "residual"), (2, "relative_residual"), (3, "drift"))
        }
    t.metadata["exponents"] = fits
    return _meta(t, model, grid, seed, t0)


# ---------------------------------------------------------------------------
# hard-core fermions with spin-orbit coupling

def fermi_hubbard_check(spec: ModelSpec) -> dict:
    """Commutator identity and tower residuals for both spin species."""
    H = build_fermi_hubbard_soc(spec).csr
    out = {}
    for spin in ("up", "down"):
        Q = fermi_pair_op(spec.N, spin).csr
        P = fermi_spin_projector(spec.N, spin).csr
        comm = ((Q @ H - H @ Q) @ P).toarray()
        QP = (Q @ P).toarray()
        errs = {s: float(np.abs(comm - s * spec.Omega_soc * QP).max()) for s in (1.0, -1.0)}
        sign = min(errs, key=errs.get)
        v = fermi_ferromagnet(spec.N, spin).amplitudes
        residuals = []
        for n in range(spec.N // 2 + 1):
            nv = np.linalg.norm(v)
            if nv < 1e-13:
                break
            u = v / nv
            Hu = H @ u
            E = float(np.vdot(u, Hu).real)
            residuals.append(float(np.linalg.norm(Hu - E * u)))
            v = Q @ v
        out[spin] = {"sign": sign, "commutator_error": errs[sign], "other_sign_error": errs[-sign],
                     "tower_residuals": residuals}
    return out


REGISTRY: dict[str, Callable[..., ScanTable]] = {
    "scan_purity_perturbation": scan_purity_perturbation,
    "scan_hole_correlation": scan_hole_correlation,
    "scan_universal_density": scan_universal_density,
    "scan_cdw": scan_cdw,
    "optimize_qutrit": optimize_qutrit,
    "experimental_numbers": experimental_numbers,
    "scan_scar_ee": scan_scar_ee,
    "replication_suite": replication_suite,
    "spectrum_structure_check": spectrum_structure_check,
    "coherent_state_check": coherent_state_check,
    "degenerate_residual_check": degenerate_residual_check,
}
