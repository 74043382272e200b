import math

import numpy as np
import pytest

from holepair import dimer, observables as obs
from holepair.models import ModelSpec, build_ladder, build_two_chain, two_chain_dims
from holepair.opkernel import SM, OpSum, StateVec

from conftest import random_two_chain


def xx_only(J, N):
    return build_two_chain(ModelSpec(N=N, J=tuple(J), Omega=0.0, nu=0.0))[0].csr


def test_labels_and_orthogonality():
    assert np.allclose(dimer.site_vector("x", 1), dimer.SINGLET)
    assert np.allclose(dimer.site_vector("x", 2), dimer.TRIPLET)
    for j in (1, 2):
        assert abs(np.vdot(dimer.site_vector("x", j), dimer.site_vector("m", j))) < 1e-16


def test_tau_lowers_singlet():
    tau = dimer.dimer_ladder_op("tau", 1, 1).toarray()
    assert np.allclose(tau @ dimer.SINGLET, math.sqrt(2) * dimer.HOLE)


@pytest.mark.parametrize("j", [1, 2, 3])
def test_ladder_algebra(j):
    N = 3
    tau = dimer.dimer_ladder_op("tau", j, N).csr
    lam = dimer.dimer_ladder_op("lambda", j, N).csr
    Sz = OpSum(two_chain_dims(N)).add(0.5, {2 * (j - 1): np.diag([-1, 1])}).add(0.5, {2 * j - 1: np.diag([-1, 1])})
    comm = tau.conj().T @ tau - tau @ tau.conj().T
    assert abs(comm - 2 * Sz.to_sparse().csr).max() < 1e-14
    assert abs(tau @ lam).max() == 0


def test_jump_is_lambda_one():
    _, (c,) = build_two_chain(ModelSpec(N=2, J=(1.0,)))
    assert abs(c.csr - dimer.dimer_ladder_op("lambda", 1, 2).csr).max() < 1e-15


def test_steady_projector():
    P = dimer.projector_steady_subspace(3).csr
    assert abs(P @ P - P).max() < 1e-15 and abs(P - P.conj().T).max() == 0
    assert round(P.diagonal().sum().real) == 8


def test_q_on_two_particles():
    Q = dimer.hole_pair_q((1.0,), 2).csr
    v = Q @ dimer.filled_state(2).amplitudes
    assert np.allclose(v, -dimer.dimer_product_state("oo").amplitudes / math.sqrt(2))


def test_q_rejects_single_site():
    with pytest.raises(ValueError):
        dimer.hole_pair_q((), 1)


def test_q_commutes_with_xx_on_steady_subspace(rng):
    N = 4
    J = rng.uniform(0.3, 2.0, N - 1)
    Q = dimer.hole_pair_q(J, N).csr
    H = xx_only(J, N)
    P = dimer.projector_steady_subspace(N).csr
    assert abs((Q @ H - H @ Q) @ P).max() < 1e-13


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_q_exhausts(N):
    J = [1.0] * (N - 1)
    Q = dimer.hole_pair_terms(J, N)
    v = dimer.filled_state(N).amplitudes
    for _ in range(N // 2):
        v = Q.apply(v)
    assert np.linalg.norm(v) > 1e-3
    assert np.linalg.norm(Q.apply(v)) == 0


def test_filled_states():
    assert np.allclose(dimer.filled_state(1).amplitudes, dimer.SINGLET)
    s2 = dimer.filled_state(2)
    assert np.allclose(s2.amplitudes, np.kron(dimer.TRIPLET, dimer.SINGLET)) and s2.norm() == pytest.approx(1)
    assert np.linalg.norm(xx_only([0.4, 1.3, 0.9], 4) @ dimer.filled_state(4).amplitudes) < 1e-15


def test_hardcore_blocking():
    H = xx_only([1.0], 2)
    assert np.linalg.norm(H @ dimer.dimer_product_state("xx").amplitudes) < 1e-15


def test_flavor_changing_hopping(rng):
    N = 3
    J = rng.uniform(0.5, 1.5, N - 1)
    H = xx_only(J, N)
    ref = None
    for j in range(1, N):
        t = dimer.dimer_ladder_op("tau", j, N).csr
        l = dimer.dimer_ladder_op("lambda", j, N).csr
        t2 = dimer.dimer_ladder_op("tau", j + 1, N).csr
        l2 = dimer.dimer_ladder_op("lambda", j + 1, N).csr
        term = t.conj().T @ l2 + l.conj().T @ t2
        term = 0.25 * J[j - 1] * (term + term.conj().T)
        ref = term if ref is None else ref + term
    assert abs(H - ref).max() < 1e-14


def test_single_dimer_condensate():
    s = ModelSpec(N=1, Omega=1.7, Delta=0.3, nu=0.5)
    G = s.Gamma
    ref = math.sqrt(2) * G * dimer.HOLE + s.Omega * dimer.SINGLET
    ref /= np.linalg.norm(ref)
    assert abs(np.vdot(ref, dimer.pair_condensate_state(s).amplitudes)) == pytest.approx(1, abs=1e-14)


@pytest.mark.parametrize("N", range(1, 8))
def test_condensate_is_dark_eigenstate(rng, N):
    for _ in range(3):
        s = random_two_chain(rng, N)
        H, (c,) = build_two_chain(s)
        v = dimer.pair_condensate_state(s).amplitudes
        assert np.linalg.norm(H.csr @ v) <= 1e-10
        assert np.linalg.norm(c.csr @ v) <= 1e-10
        P = dimer.projector_steady_subspace(N).csr if N <= 6 else None
        if P is not None:
            # the tau_1 admixture leaves {o, x}; it lands on site 1 only
            w = dimer.ladder_opsum("tau", 1, N).apply(dimer.filled_state(N).amplitudes)
            assert np.linalg.norm(P @ w - w) < 1e-14


def test_condensate_strong_drive_limit():
    s = ModelSpec(N=4, Omega=1e3, Delta=0.3, nu=1.0, J=(1.0, 0.7, 1.2))
    f = abs(np.vdot(dimer.filled_state(4).amplitudes, dimer.pair_condensate_state(s).amplitudes)) ** 2
    assert f >= 1 - 1e-4


def test_condensate_expansion_coefficients():
    # uniform chain: amplitude ratios of the tau_1 term and the first hole pair
    s = ModelSpec(N=4, Omega=2.0, Delta=0.6, nu=0.4, J=(1.0, 1.0, 1.0))
    v = dimer.pair_condensate_state(s).amplitudes
    base = np.vdot(dimer.filled_state(4).amplitudes, v)
    one = dimer.ladder_opsum("tau", 1, 4).apply(dimer.filled_state(4).amplitudes)
    a1 = np.vdot(one, v) / np.vdot(one, one) / base
    pair = dimer.hole_pair_terms(s.J, 4).apply(dimer.filled_state(4).amplitudes)
    a2 = np.vdot(pair, v) / np.vdot(pair, pair) / base / math.sqrt(4)
    assert a1 == pytest.approx(s.Gamma / s.Omega, rel=1e-12)
    assert a2 == pytest.approx(1 / s.Omega_t**2, rel=1e-12)


def test_condensate_rejects():
    with pytest.raises(ValueError):
        dimer.pair_condensate_state(ModelSpec(N=1, Omega=0.0))
    with pytest.raises(ValueError):
        dimer.pair_condensate_state(ModelSpec(N=2, J=(1.0,), perturbation="detune_equal", delta_pert=0.1))


def test_cdw_three_sites():
    psi, rho = dimer.cdw_states(ModelSpec(N=3, J=(1.0, 1.0)))
    ref = (dimer.dimer_product_state("oox").amplitudes - dimer.dimer_product_state("xoo").amplitudes) / math.sqrt(2)
    assert np.allclose(psi.amplitudes, ref)
    assert psi.norm() == pytest.approx(1)
    assert obs.von_neumann(rho) == pytest.approx(math.log(2))


def test_cdw_is_dark_eigenstate_with_disorder():
    N = 5
    J = (0.5, 1.4, 0.9, 1.2)
    psi, _ = dimer.cdw_states(ModelSpec(N=N, J=J))
    H = xx_only(J, N)
    _, (c,) = build_two_chain(ModelSpec(N=N, J=J))
    assert np.linalg.norm(H @ psi.amplitudes) < 1e-14
    assert np.linalg.norm(c.csr @ psi.amplitudes) < 1e-14


def test_tower_orthonormal_and_exhausted():
    s = ModelSpec(variant="ladder", N=5, J=(1.0, 0.8, 1.1, 0.9), g=0.5, mu=0.2, delta_ladder=0.15)
    states = [dimer.q_tower_state(n, "inf", s) for n in range(4)]
    assert states[3].exhausted and np.all(states[3].state.amplitudes == 0)
    G = np.array([[a.state.inner(b.state) for b in states[:3]] for a in states[:3]])
    assert np.allclose(G, np.eye(3), atol=1e-13)


@pytest.mark.parametrize("ref", ["inf", "tilde"])
def test_tower_energies(ref):
    s = ModelSpec(variant="ladder", N=4, J=(1.0, 1.0, 1.0), g=0.5, mu=0.2, delta_ladder=0.0)
    H = build_ladder(s).csr
    E = []
    for n in range(3):
        v = dimer.q_tower_state(n, ref, s).state.amplitudes
        e = np.vdot(v, H @ v).real
        assert np.linalg.norm(H @ v - e * v) < 1e-12
        E.append(e)
    assert np.allclose(np.diff(E), 2 * s.mu, atol=1e-12)


def test_q_norm_counting_matches_full_space(rng):
    N = 7
    J = rng.uniform(0.4, 1.8, N - 1)
    Qfull = dimer.hole_pair_terms(J, N)
    Qsmall = dimer.steady_basis_q(J, N)
    v, w = dimer.filled_state(N).amplitudes, np.zeros(2**N, dtype=complex)
    w[-1] = 1
    for m in range(1, 5):
        v, w = Qfull.apply(v), Qsmall.apply(w)
        ref = dimer.q_power_norm2(J, N, m)
        assert np.vdot(v, v).real == pytest.approx(ref, rel=1e-12)
        assert np.vdot(w, w).real == pytest.approx(ref, rel=1e-12)


def test_q_norm_single_pair():
    N = 14
    assert dimer.q_power_norm2([1.0] * (N - 1), N, 1) == pytest.approx((N - 1) / N)
