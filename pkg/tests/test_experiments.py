import math

import numpy as np
import pytest

from holepair import experiments as ex
from holepair.models import ModelSpec


def test_unknown_names_rejected():
    with pytest.raises(ValueError):
        ex.scan_cdw({"grid": {"Nu_typo": [1]}})
    with pytest.raises(ValueError):
        ex.scan_purity_perturbation({"model": {"Nu_typo": 1}})
    with pytest.raises(ValueError):
        ex.scan_cdw({"extra": 1})


def test_table_is_rectangular():
    t = ex.ScanTable("t", [("a", ""), ("b", "")])
    t.add(1, 2)
    with pytest.raises(ValueError):
        t.add(1)
    assert t.column("b") == [2] and t.where(a=1) == [{"a": 1, "b": 2}]


def test_figure_units_doubles_coherent_amplitudes():
    s = ex.figure_units(ModelSpec(N=3, Omega=1.5, J=(1.0, 2.0), Delta=0.3))
    assert s.Omega == 3.0 and s.J == (2.0, 4.0) and s.Delta == 0.3 and s.gamma == 1.0


def test_purity_scan_small_grid():
    t = ex.scan_purity_perturbation({"grid": {"delta": [0.0, 0.2]}})
    assert t.labels == ["delta", "kind", "purity"]
    assert len(t.rows) == 6
    assert set(t.metadata["monotone_decrease"]) == {"hopping_asym", "detune_equal", "detune_opposite"}


def test_hole_correlation_spot_check():
    t = ex.scan_hole_correlation({"grid": {"Omega_t": [5.0]}})
    assert t.metadata["spot_check_max_diff"] < 1e-9
    d1 = t.where(distance=1)[0]["czz"]
    assert 0.45 <= d1 <= 0.55


def test_universal_density_records_laws():
    t = ex.scan_universal_density({"grid": {"N": [11], "Omega_t": [2.0, 20.0]}})
    row = t.where(Omega_t=20.0)[0]
    assert row["law_bulk"] == pytest.approx(2 / 20.0**4)
    assert row["law_full"] == pytest.approx(2 / 20.0**4 + 2 * 0.05 / (11 * (400 + 0.1)))


def test_cdw_sections():
    t = ex.scan_cdw({"grid": {"curve_Omega_t": [0.1]}})
    sections = {r[0] for r in t.rows}
    assert sections == {"profile", "particle_number", "even_over_odd", "mean_density", "mean_density_law", "curve"}


def test_replication_small():
    t = ex.replication_suite({"grid": {"draws": [1], "max_dimers": [3], "tree_nodes": [4]}})
    for r in t.rows:
        case, res = r[0], r[3]
        if case == "xx_generic":
            assert res > 1e-3
        else:
            assert res < 1e-12
    flags = t.metadata["tree_steady_multiplicity"]
    assert flags["distinct"] == 1 and flags["equal"] > 1


def test_subset_sum_helper():
    rap = [-0.5 + 1j, -0.5 - 1j, -0.3, -0.2]
    sums = np.array([sum(c) for r in range(5) for c in __import__("itertools").combinations(rap, r)])
    assert ex.subset_sum_mismatch(sums, rap) < 1e-15
    assert ex.subset_sum_mismatch(sums + 0.01, rap) == pytest.approx(0.01)


def test_degenerate_family_diagnostics():
    t = ex.degenerate_residual_check({"grid": {"Omega": [10.0, 100.0], "nu_prime": [0.0, 1.0]}})
    assert set(t.metadata["exponents"]) == {"0.0", "1.0"}
    # the maximally mixed member only feels the dissipator
    assert t.where(nu_prime=0.0, Omega=10.0)[0]["residual"] == pytest.approx(t.where(nu_prime=0.0, Omega=100.0)[0]["residual"])


def test_determinism():
    cfg = {"grid": {"draws": [2], "max_dimers": [3]}, "seed": 11}
    assert ex.replication_suite(cfg).rows == ex.replication_suite(cfg).rows


def test_rsga_identities_small():
    s = ModelSpec(variant="ladder", N=4, J=(1.0, 0.7, 1.3), g=0.5, mu=0.2, delta_ladder=0.0)
    out = ex.rsga_identities(s)
    assert out["h1_residual"] < 1e-10 and out["h2_norm"] < 1e-10 and out["h3_max"] < 1e-10


def test_rsga_spacing_with_even_rung_splitting():
    s = ModelSpec(variant="ladder", N=4, J=(1.0, 1.0, 1.0), g=0.5, mu=0.2, delta_ladder=0.15)
    assert ex.rsga_identities(s)["h1_spacing_fit"] == pytest.approx(2 * 0.2 - 2 * 0.15, abs=1e-12)


def test_fermi_check_small():
    out = ex.fermi_hubbard_check(ModelSpec(variant="fermi_hubbard_soc", N=4, J=(1.0, 1.0, 1.0), Omega_soc=0.9))
    # removing two up particles lowers the energy by Omega, so [Q_up, H] P_up = +Omega Q_up
    assert out["up"]["sign"] == 1.0
    assert out["up"]["sign"] == -out["down"]["sign"]
    for spin in ("up", "down"):
        assert out[spin]["commutator_error"] < 1e-12
        assert max(out[spin]["tower_residuals"]) < 1e-10


def test_optimize_eta_small():
    base = ex.figure_units(ModelSpec(variant="qutrit_two_chain", N=2, Omega=10.0, J=(7.0,)))
    res = ex.optimize_eta(base, maxfev=40)
    assert res.eta > 1 and math.isfinite(res.tau)
    lo, hi = ex.ETA_BOUNDS
    assert math.exp(lo) - 1e-9 <= res.eta <= math.exp(hi) + 1e-9
