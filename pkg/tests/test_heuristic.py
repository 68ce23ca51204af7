import numpy as np
import pytest

from mimopc import (DL, GM, UL, NetworkConfig, approx_dl, approx_ul,
                    approximate, build_problem, coefficient_set,
                    evaluate_sinr, realize, solve)


@pytest.fixture(scope="module")
def coeffs():
    cfg = NetworkConfig(num_cells=4, users_per_cell=3, antennas=16, seed=21)
    r = realize(cfg, 0)
    return (coefficient_set(r, cfg, UL, "uncorrelated"),
            coefficient_set(r, cfg, DL, "uncorrelated"))


def test_ul_power_rule(coeffs):
    cu, _ = coeffs
    h = approx_ul(cu)
    assert ((h.eta > 0) & (h.eta <= 1.0)).all()
    # a * eta constant within each cell, and the cell's weakest user at full power
    prod = cu.a * h.eta
    assert np.allclose(prod, prod[:, :1])
    assert np.allclose(h.eta.max(axis=1), 1.0)


def test_ul_equal_gains_give_full_power():
    from mimopc import SinrCoefficientSet
    a = np.full((2, 3), 7.0)
    b = np.random.default_rng(0).uniform(0.1, 1, (2, 3, 2, 3))
    co = SinrCoefficientSet(UL, a, b, np.zeros((2, 3, 2)), np.ones((2, 3)),
                            np.zeros(2, dtype=int))
    h = approx_ul(co)
    assert np.allclose(h.eta, 1.0)


def test_ul_reported_sinr_is_cellwise(coeffs):
    cu, _ = coeffs
    h = approx_ul(cu)
    # reported value is constant within a cell: min_k exact/allocated ratio
    assert np.allclose(h.sinr_reported, h.sinr_reported[:, :1])
    expected = (h.sinr_exact / h.eta).min(axis=1)
    assert np.allclose(h.sinr_reported[:, 0], expected)


def test_dl_simplex_feasibility(coeffs):
    _, cd = coeffs
    h = approx_dl(cd)
    assert np.allclose(h.eta.sum(axis=1), 1.0)
    assert (h.eta > 0).all()


def test_dl_single_user_reports_exact():
    cfg = NetworkConfig(num_cells=4, users_per_cell=1, antennas=8, seed=5)
    cd = coefficient_set(realize(cfg, 0), cfg, DL, "uncorrelated")
    h = approx_dl(cd)
    assert np.allclose(h.eta, 1.0)
    assert np.allclose(h.sinr_reported, h.sinr_exact)


def test_dl_symmetric_users_get_half():
    from mimopc import SinrCoefficientSet
    a = np.full((1, 2), 5.0)
    b = np.full((1, 2, 1, 2), 0.2)
    co = SinrCoefficientSet(DL, a, b, np.zeros((1, 2, 1)), np.ones((1, 2)),
                            np.zeros(1, dtype=int))
    h = approx_dl(co)
    assert np.allclose(h.eta, 0.5)


def test_dispatch_and_errors(coeffs):
    cu, cd = coeffs
    assert np.allclose(approximate(cu).eta, approx_ul(cu).eta)
    assert np.allclose(approximate(cd).eta, approx_dl(cd).eta)
    with pytest.raises(ValueError):
        approx_ul(cd)
    with pytest.raises(ValueError):
        approx_dl(cu)
    bad = cu.to_dict()
    import mimopc
    co = mimopc.SinrCoefficientSet.from_dict(bad)
    co.a[0, 0] = 0.0
    with pytest.raises(ValueError):
        approx_ul(co)


@pytest.mark.parametrize("direction", [UL, DL])
def test_heuristic_dominated_by_gm_optimum(coeffs, direction):
    co = coeffs[0] if direction == UL else coeffs[1]
    h = approximate(co)
    eps = 1e-3
    heur_obj = np.log(np.log2(1 + eps + h.sinr_exact.min(axis=1))).sum()
    out = solve(build_problem(co, GM, eps))
    assert heur_obj <= out.objective_log + 1e-6
