import csv
import json

import numpy as np
import pytest

from mimopc import (DL, UL, NetworkConfig, run_experiment, scalability_sweep,
                    power_budget_sweep, spectral_efficiency,
                    write_results_csv, write_summary_json)


CFG = NetworkConfig(num_cells=4, users_per_cell=2, antennas=8, seed=17)


def test_spectral_efficiency_examples():
    assert spectral_efficiency(1.0, 200, 5, 97, 97, UL) == pytest.approx(0.49)
    assert spectral_efficiency(0.0, 200, 5, 97, 97, DL) == 0.0
    # tau_p + tau_d consuming the whole block leaves no UL samples
    assert spectral_efficiency(100.0, 200, 5, 0, 195, UL) == 0.0
    with pytest.raises(ValueError):
        spectral_efficiency(1.0, 200, 5, 0, 300, UL)
    with pytest.raises(ValueError):
        spectral_efficiency(1.0, 200, 5, 97, 97, "sideways")


@pytest.fixture(scope="module")
def result():
    return run_experiment(CFG, schemes=("gm", "nwmmf", "nwpf", "approx"),
                          n_drops=4, direction=UL, model="uncorrelated")


def test_experiment_deterministic(result):
    again = run_experiment(CFG, schemes=("gm", "nwmmf", "nwpf", "approx"),
                           n_drops=4, direction=UL, model="uncorrelated")
    for d1, d2 in zip(result.drops, again.drops):
        for s in d1.se:
            assert np.array_equal(d1.se[s], d2.se[s])


def test_summary_invariants(result):
    assert result.n_drops == 4
    for s in result.schemes:
        se = result.user_se(s)
        assert (se >= 0).all()
        assert result.sum_se(s)[0] == pytest.approx(result.drops[0].se[s].sum(),
                                                    abs=1e-9)
        pts, lv = result.cdf(s)
        assert (np.diff(pts) >= 0).all()
        assert (np.diff(lv) >= 0).all()
        assert 0 < lv[0] <= lv[-1] <= 1.0
        assert (result.likely_user_se(s)
                <= np.percentile(se, 50.0) + 1e-12)


def test_nwmmf_drops_are_equalized(result):
    for d in result.drops:
        se = d.se["nwmmf"]
        assert se.max() - se.min() <= 1e-5 * se.max()


def test_gm_targets_match_per_cell_min(result):
    for d in result.drops:
        sinr = d.sinr["gm"]
        eta = d.eta["gm"]
        assert (eta <= 1.0 + 1e-9).all()
        # within each cell all users hit the shared target
        rel_spread = (sinr.max(axis=1) - sinr.min(axis=1)) / sinr.max(axis=1)
        assert (rel_spread <= 1e-5).all()


def test_parallel_fold_matches_serial(result):
    par = run_experiment(CFG, schemes=("gm", "nwmmf", "nwpf", "approx"),
                         n_drops=4, direction=UL, model="uncorrelated",
                         workers=2)
    for d1, d2 in zip(result.drops, par.drops):
        for s in d1.se:
            assert np.array_equal(d1.se[s], d2.se[s])


def test_csv_and_summary_outputs(result, tmp_path):
    csv_path = tmp_path / "results.csv"
    json_path = tmp_path / "summary.json"
    write_results_csv(result, csv_path)
    write_summary_json(result, json_path)
    with open(csv_path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4 * 4 * 4 * 2   # drops * schemes * cells * users
    assert set(rows[0]) == {"drop", "cell", "user", "scheme", "direction",
                            "sinr", "se"}
    total = sum(float(r["se"]) for r in rows if r["scheme"] == "gm"
                and r["drop"] == "0")
    assert total == pytest.approx(result.drops[0].se["gm"].sum(), rel=1e-8)
    payload = json.loads(json_path.read_text())
    assert payload["config"]["num_cells"] == 4
    assert set(payload["schemes"]) == set(result.schemes)


def test_unknown_scheme_rejected():
    with pytest.raises(ValueError):
        run_experiment(CFG, schemes=("gm", "bogus"), n_drops=1)


def test_scalability_records_structure():
    cfg = NetworkConfig(num_cells=4, users_per_cell=2, antennas=8, seed=3)
    recs = scalability_sweep(cfg, [0.0, -60.0], direction=UL,
                             model="uncorrelated")
    assert len(recs) == 2
    assert recs[0]["offset_db"] == 0.0
    for r in recs:
        for key in ("gm_sum_se", "nwmmf_sum_se", "nwpf_sum_se",
                    "gm_excluded_sum_se"):
            assert r[key] >= 0.0
    # attenuating the user cannot help the network max-min value
    assert recs[1]["nwmmf_sum_se"] <= recs[0]["nwmmf_sum_se"] + 1e-9


def test_power_budget_sweep_zero_budget():
    cfg = NetworkConfig(num_cells=4, users_per_cell=1, antennas=8, seed=3)
    recs = power_budget_sweep(cfg, [0.0, 0.2], direction=UL, n_drops=2,
                              model="uncorrelated", schemes=("nwmmf",))
    assert recs[0]["nwmmf_likely_sum_se"] == 0.0
    assert recs[1]["nwmmf_likely_sum_se"] > 0.0
