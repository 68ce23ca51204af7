"""Acceptance gate: one test per criterion, each emitting a PASS/FAIL line.

Criteria 1 and 5 contain clauses that are faithfully implemented but known
not to hold (see notes in the repository's decision log): the link function
is not concave on the whole real line for epsilon > 0, and the network-wide
proportional-fairness optimum does not collapse to zero sum SE when one
user's channel is attenuated. Those tests are expected to fail and are left
red on purpose.
"""

import dataclasses
import math
import os

import numpy as np
import pytest

from mimopc import (DL, GM, NWMMF, NWPF, UL, NetworkConfig,
                    bisection_nwmmf, build_problem, coefficient_set,
                    concave_link, dl_uncorrelated, evaluate_sinr, mmse_gamma,
                    network_estimation_stats, realize, run_experiment,
                    scalability_sweep, solve, spectral_efficiency,
                    ul_correlated, ul_uncorrelated, dl_correlated)


def report(num, clauses):
    """Print one CRITERION line; fail the test if any clause fails."""
    ok = all(c[1] for c in clauses)
    detail = "; ".join(f"{name}={'ok' if good else 'FAILED ' + str(info)}"
                       for name, good, info in clauses)
    print(f"\nCRITERION {num}: {'PASS' if ok else 'FAIL'} [{detail}]")
    assert ok, f"criterion {num}: {detail}"


def random_uncorrelated_pair(rng, direction, L=2, K=1, M=100):
    """Random uncorrelated-fading coefficient set from random large-scale gains."""
    cfg = NetworkConfig()
    beta = 10.0 ** rng.uniform(-12.0, -9.0, (L, L, K))
    pg = np.zeros(L, dtype=int)
    gamma = mmse_gamma(beta, pg, cfg.rho_ul, K)
    if direction == UL:
        return ul_uncorrelated(gamma, beta, M, cfg.rho_ul, pg)
    return dl_uncorrelated(gamma, beta, M, cfg.rho_dl, pg)


def gm_objective(sinr, eps):
    return float(np.log(np.log2(1.0 + eps + sinr.min(axis=1))).sum())


# ---------------------------------------------------------------------------

def test_criterion_1_link_concavity_and_derivatives():
    """f''(x) <= 1e-12 on a 10^4-point grid for three epsilons, and the
    analytic derivatives must match central differences to 1e-6 relative.

    The concavity clause is expected to fail: for any epsilon > 0 the
    function log(log2(1+eps+e^x)) has a convex toe below roughly
    log(sqrt(2*eps)), so the grid contains points with f'' > 0.
    """
    xs = np.linspace(-30.0, 30.0, 10_000)
    clauses = []
    worst = -np.inf
    for eps in (1e-4, 1e-3, 1e-1):
        _, _, f2 = concave_link(xs, eps)
        worst = max(worst, float(f2.max()))
    clauses.append(("concavity", worst <= 1e-12, f"max f''={worst:.3e}"))

    # derivative check: f' against central differences of f, f'' against
    # central differences of the analytic f', restricted to grid points
    # where the difference quotient is numerically meaningful in float64
    h = 1e-5
    err1 = err2 = 0.0
    for eps in (1e-4, 1e-3, 1e-1):
        f0, f1, f2 = concave_link(xs, eps)
        fp, f1p, _ = concave_link(xs + h, eps)
        fm, f1m, _ = concave_link(xs - h, eps)
        d1 = (fp - fm) / (2 * h)
        d2 = (f1p - f1m) / (2 * h)
        m1 = np.abs(d1) >= 1e-3
        m2 = np.abs(d2) >= 1e-4
        err1 = max(err1, float(np.abs(f1[m1] / d1[m1] - 1.0).max()))
        err2 = max(err2, float(np.abs(f2[m2] / d2[m2] - 1.0).max()))
    clauses.append(("first-derivative", err1 <= 1e-6, f"rel err {err1:.2e}"))
    clauses.append(("second-derivative", err2 <= 1e-6, f"rel err {err2:.2e}"))
    report(1, clauses)


def test_criterion_2_grid_search_optimality():
    """Solver objective >= exhaustive 0.001-step grid search minus 1e-3 on
    random two-cell single-user instances, all schemes, both directions."""
    eps = 1e-3
    step = 0.001
    g = np.arange(step, 1.0 + step / 2, step)
    e1, e2 = np.meshgrid(g, g, indexing="ij")
    clauses = []
    rng = np.random.default_rng(2024)
    worst = {GM: np.inf, NWMMF: np.inf, NWPF: np.inf}
    for direction, n_inst in ((UL, 20), (DL, 10)):
        for _ in range(n_inst):
            co = random_uncorrelated_pair(rng, direction)
            a, b, c, d = co.a, co.b, co.c, co.d
            s1 = a[0, 0] * e1 / (b[0, 0, 0, 0] * e1
                                 + (b[0, 0, 1, 0] + c[0, 0, 1]) * e2 + d[0, 0])
            s2 = a[1, 0] * e2 / (b[1, 0, 1, 0] * e2
                                 + (b[1, 0, 0, 0] + c[1, 0, 0]) * e1 + d[1, 0])
            best = {
                GM: float((np.log(np.log2(1 + eps + s1))
                           + np.log(np.log2(1 + eps + s2))).max()),
                NWMMF: float(np.minimum(s1, s2).max()),
                NWPF: float((np.log(s1) + np.log(s2)).max()),
            }
            for scheme in (GM, NWMMF, NWPF):
                out = solve(build_problem(co, scheme, eps))
                got = out.objective if scheme == NWMMF else out.objective_log
                worst[scheme] = min(worst[scheme], got - best[scheme])
    for scheme in (GM, NWMMF, NWPF):
        clauses.append((scheme, worst[scheme] >= -1e-3,
                        f"worst margin {worst[scheme]:.2e}"))
    report(2, clauses)


def test_criterion_3_correlated_reduces_to_uncorrelated():
    """With scaled-identity correlation matrices the correlated pipeline must
    reproduce the uncorrelated SINRs at random allocations to 1e-9."""
    rng = np.random.default_rng(33)
    worst = 0.0
    for seed in range(10):
        cfg = NetworkConfig(num_cells=4, users_per_cell=2, antennas=8,
                            seed=seed)
        r = realize(cfg, 0)
        stats = network_estimation_stats(r, cfg, model="uncorrelated")
        pairs = [
            (coefficient_set(r, cfg, UL, "uncorrelated"),
             ul_correlated(stats, cfg.rho_ul, cfg.tau_p, r.pilot_group)),
            (coefficient_set(r, cfg, DL, "uncorrelated"),
             dl_correlated(stats, cfg.rho_dl, cfg.rho_ul, cfg.tau_p,
                           r.pilot_group)),
        ]
        for cu, cc in pairs:
            for _ in range(5):
                eta = rng.uniform(0.01, 1.0, (4, 2))
                if cu.direction == DL:
                    eta /= eta.sum(axis=1, keepdims=True)
                su, sc = evaluate_sinr(cu, eta), evaluate_sinr(cc, eta)
                worst = max(worst, float(np.abs(sc / su - 1.0).max()))
    report(3, [("sinr-match", worst <= 1e-9, f"max rel gap {worst:.2e}")])


def test_criterion_4_single_cell_collapse():
    """With one cell the per-cell and network-wide max-min utilities coincide;
    the Newton and bisection solvers must agree."""
    cfg = NetworkConfig(num_cells=1, users_per_cell=5, antennas=32, seed=4)
    co = coefficient_set(realize(cfg, 0), cfg, UL, "uncorrelated")
    out_gm = solve(build_problem(co, GM, cfg.epsilon), tol=1e-8)
    out_mm = solve(build_problem(co, NWMMF, cfg.epsilon), tol=1e-8)
    gap = float(np.abs(out_gm.sinr / out_mm.sinr - 1.0).max())
    t_bis = float(bisection_nwmmf(co).targets)
    t_newton = float(out_mm.targets)
    tgap = abs(t_bis / t_newton - 1.0)
    report(4, [
        ("gm-equals-nwmmf", gap <= 1e-6, f"max rel gap {gap:.2e}"),
        ("bisection-match", tgap <= 1e-5, f"rel gap {tgap:.2e}"),
    ])


def test_criterion_5_scalability_under_deep_fade():
    """L=16, K=2, correlated, f=1, one user attenuated by 140 dB: the
    network-wide utilities should collapse while the per-cell utility holds.

    The NW-PF clause is expected to fail: at its optimum the attenuated
    user's SINR term is separable from the others, so the remaining users
    keep near-nominal SE and the sum stays far above 1e-2 bit/s/Hz.
    """
    cfg = NetworkConfig(num_cells=16, users_per_cell=2, antennas=100,
                        pilot_reuse=1, seed=5)
    rec = scalability_sweep(cfg, [-140.0], direction=UL, model="correlated")[0]
    report(5, [
        ("nwmmf-collapses", rec["nwmmf_sum_se"] < 1e-2,
         f"sum SE {rec['nwmmf_sum_se']:.3f}"),
        ("nwpf-collapses", rec["nwpf_sum_se"] < 1e-2,
         f"sum SE {rec['nwpf_sum_se']:.3f}"),
        ("gm-holds", rec["gm_sum_se"] >= 0.9 * rec["gm_excluded_sum_se"],
         f"{rec['gm_sum_se']:.2f} vs excluded {rec['gm_excluded_sum_se']:.2f}"),
    ])


# ---------------------------------------------------------------------------
# Criteria 6 and 7 share one 100-drop experiment per direction.

N_DROPS = 100
CFG6 = NetworkConfig(num_cells=16, users_per_cell=5, antennas=100,
                     pilot_reuse=1, seed=6)


@pytest.fixture(scope="module")
def big_experiments():
    results = {}
    for direction in (UL, DL):
        results[direction] = run_experiment(
            CFG6, schemes=(GM, NWMMF, NWPF, "approx"), n_drops=N_DROPS,
            direction=direction, model="uncorrelated")
    return results


def test_criterion_6_percentile_orderings(big_experiments):
    """5th-percentile sum SE: NW-PF > GM > NW-MMF; 2nd-percentile pooled
    per-user SE: GM >= NW-PF. 100 drops, both directions."""
    clauses = []
    for direction, res in big_experiments.items():
        pf = res.likely_sum_se(NWPF)
        gm = res.likely_sum_se(GM)
        mm = res.likely_sum_se(NWMMF)
        clauses.append((f"{direction}-sum-order", pf > gm > mm,
                        f"nwpf={pf:.1f} gm={gm:.1f} nwmmf={mm:.1f}"))
        gm_u = res.likely_user_se(GM)
        pf_u = res.likely_user_se(NWPF)
        clauses.append((f"{direction}-tail-user", gm_u >= pf_u,
                        f"gm={gm_u:.4f} nwpf={pf_u:.4f}"))
    report(6, clauses)


def test_criterion_7_heuristic_dominated(big_experiments):
    """The heuristic allocation is feasible for the per-cell problem, so its
    objective can never exceed the solver's optimum (checked on every drop)."""
    eps = CFG6.epsilon
    worst = np.inf
    bad = 0
    for direction, res in big_experiments.items():
        for d in res.drops:
            co = coefficient_set(realize(CFG6, d.drop), CFG6, direction,
                                 "uncorrelated")
            heur = gm_objective(evaluate_sinr(co, d.eta["approx"]), eps)
            opt = gm_objective(d.sinr[GM], eps)
            margin = opt + 1e-6 - heur
            worst = min(worst, margin)
            bad += margin < 0
    report(7, [("dominated-on-all-drops", bad == 0,
                f"{bad} violations, worst margin {worst:.2e}")])


@pytest.mark.skipif(os.environ.get("MIMOPC_FULL_SCALE") != "1",
                    reason="full-scale statistical check; hours of runtime, "
                           "set MIMOPC_FULL_SCALE=1 to enable")
def test_criterion_8_full_scale_quantiles():
    """1000 correlated drops per reuse factor; 5th-percentile UL sum SE
    within 20% of the reference table."""
    targets = {
        1: {NWMMF: 35.1, NWPF: 175.5, "approx": 102.3, GM: 106.5},
        2: {NWMMF: 53.9, NWPF: 203.9, "approx": 146.4, GM: 140.6},
        4: {NWMMF: 55.7, NWPF: 207.8, "approx": 162.2, GM: 144.1},
    }
    clauses = []
    for f, per_scheme in targets.items():
        cfg = NetworkConfig(num_cells=16, users_per_cell=5, antennas=100,
                            pilot_reuse=f, seed=8)
        res = run_experiment(cfg, schemes=tuple(per_scheme), n_drops=1000,
                             direction=UL, model="correlated")
        for scheme, target in per_scheme.items():
            got = res.likely_sum_se(scheme)
            clauses.append((f"f{f}-{scheme}",
                            0.8 * target <= got <= 1.2 * target,
                            f"{got:.1f} vs {target}"))
    report(8, clauses)


def test_criterion_9_dead_cell_does_not_poison_objective():
    """Killing one cell's serving channels must leave the other cells served
    and the optimum at least as good as the full-power feasible point."""
    cfg = NetworkConfig(num_cells=4, users_per_cell=2, antennas=16, seed=9)
    r = realize(cfg, 0)
    beta = r.beta.copy()
    beta[0, 0, :] = 1e-30
    r = dataclasses.replace(r, beta=beta)
    co = coefficient_set(r, cfg, UL, "uncorrelated")
    out = solve(build_problem(co, GM, cfg.epsilon))
    full = gm_objective(evaluate_sinr(co, np.ones((4, 2))), cfg.epsilon)
    report(9, [
        ("others-served", bool((out.targets[1:] > 0).all()),
         f"targets {out.targets}"),
        ("beats-full-power", out.objective_log >= full - 1e-6,
         f"{out.objective_log:.6f} vs {full:.6f}"),
    ])
