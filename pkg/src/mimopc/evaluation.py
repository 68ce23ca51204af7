"""Monte-Carlo experiment engine.

Runs random network drops, builds the closed-form SINR coefficient sets,
solves the requested power-control schemes, converts SINRs to spectral
efficiencies with the coherence-block prelog factors, and aggregates
percentile statistics and CDF breakpoints. Also hosts the large-scale
scalability sweep (one user's links attenuated over a dB grid) and the
power-budget sweep.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import solver as _solver
from .coefficients import (DL, UL, SinrCoefficientSet, dl_correlated,
                           dl_uncorrelated, evaluate_sinr, ul_correlated,
                           ul_uncorrelated)
from .config import NetworkConfig
from .estimation import mmse_gamma, network_estimation_stats
from .geometry import NetworkRealization, realize
from .heuristic import approximate
from .solver import GM, NWMMF, NWPF, build_problem, solve

APPROX = "approx"
ALL_SCHEMES = (GM, NWMMF, NWPF, APPROX)
MODELS = ("correlated", "uncorrelated")


def spectral_efficiency(sinr, tau_c: int, tau_p: int, tau_u: int, tau_d: int,
                        direction: str):
    """SE in bit/s/Hz with the direction's prelog factor.

    UL transmissions occupy the samples not used by pilots or DL data
    (and vice versa), so the prelogs are 1-(tau_p+tau_d)/tau_c for UL and
    1-(tau_p+tau_u)/tau_c for DL.
    """
    if direction == UL:
        prelog = 1.0 - (tau_p + tau_d) / tau_c
    elif direction == DL:
        prelog = 1.0 - (tau_p + tau_u) / tau_c
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if prelog < 0:
        raise ValueError("negative prelog: tau split exceeds the coherence block")
    return prelog * np.log2(1.0 + np.asarray(sinr, dtype=float))


def _se(sinr, cfg: NetworkConfig, direction: str):
    return spectral_efficiency(sinr, cfg.coherence_block, cfg.tau_p,
                               cfg.tau_u, cfg.tau_d, direction)


def coefficient_set(realization: NetworkRealization, cfg: NetworkConfig,
                    direction: str, model: str = "correlated") -> SinrCoefficientSet:
    """Closed-form coefficients for one realization, direction and fading model."""
    if model not in MODELS:
        raise ValueError(f"unknown fading model {model!r}")
    pg = realization.pilot_group
    if model == "uncorrelated":
        gamma = mmse_gamma(realization.beta, pg, cfg.rho_ul, cfg.tau_p)
        if direction == UL:
            return ul_uncorrelated(gamma, realization.beta, cfg.antennas,
                                   cfg.rho_ul, pg)
        return dl_uncorrelated(gamma, realization.beta, cfg.antennas,
                               cfg.rho_dl, pg)
    stats = network_estimation_stats(realization, cfg, model="correlated")
    if direction == UL:
        return ul_correlated(stats, cfg.rho_ul, cfg.tau_p, pg)
    return dl_correlated(stats, cfg.rho_dl, cfg.rho_ul, cfg.tau_p, pg)


# ---------------------------------------------------------------------------
# Per-drop solve
# ---------------------------------------------------------------------------

def _equalized_nwmmf(coeffs: SinrCoefficientSet, epsilon: float, tol: float):
    """NW-MMF solve, then re-balance powers so every user sits at t*.

    The barrier optimum already has min-SINR = t*, but users whose
    constraints are slack can sit above it; the minimal fixed point at t*
    gives the canonical equalized allocation (all SINRs equal)."""
    prob = build_problem(coeffs, NWMMF, epsilon)
    out = solve(prob, tol=tol)
    t = float(out.targets)
    eta = None
    for _ in range(8):
        eta = _solver.fixed_point_allocation(coeffs, t)
        if eta is not None:
            break
        t *= 1.0 - 1e-9
    if eta is None:                      # should not happen: t* is feasible
        return out
    return dataclasses.replace(out, eta=eta, sinr=evaluate_sinr(coeffs, eta),
                               targets=np.float64(t))


def solve_scheme(coeffs: SinrCoefficientSet, scheme: str, epsilon: float,
                 tol: float = 1e-6):
    """(eta, sinr-used-for-SE, diagnostics dict) for one scheme."""
    if scheme == APPROX:
        h = approximate(coeffs)
        diag = {"status": "closed_form", "iterations": 0}
        return h.eta, h.sinr_reported, diag
    if scheme == NWMMF:
        out = _equalized_nwmmf(coeffs, epsilon, tol)
    else:
        out = solve(build_problem(coeffs, scheme, epsilon), tol=tol)
    diag = {"status": out.status, "iterations": out.iterations,
            "kkt_residual": out.kkt_residual,
            "constraint_violation": out.constraint_violation}
    return out.eta, out.sinr, diag


@dataclass
class DropSummary:
    drop: int
    direction: str
    se: dict                 # scheme -> (L, K) SE array
    sinr: dict               # scheme -> (L, K) SINR array
    eta: dict                # scheme -> (L, K) power allocation
    diagnostics: dict        # scheme -> solver diagnostics

    def sum_se(self, scheme: str) -> float:
        return float(self.se[scheme].sum())

    def min_cell_se(self, scheme: str) -> np.ndarray:
        return self.se[scheme].min(axis=1)


def run_drop(cfg: NetworkConfig, drop_index: int, direction: str,
             schemes, model: str = "correlated", tol: float = 1e-6) -> DropSummary:
    realization = realize(cfg, drop_index)
    coeffs = coefficient_set(realization, cfg, direction, model)
    se, sinr, eta, diag = {}, {}, {}, {}
    for scheme in schemes:
        try:
            e, s, d = solve_scheme(coeffs, scheme, cfg.epsilon, tol)
        except Exception as exc:
            raise _solver.SolverError(
                f"scheme {scheme!r} failed on drop {drop_index}: {exc}"
            ) from exc
        eta[scheme] = e
        sinr[scheme] = s
        se[scheme] = _se(s, cfg, direction)
        diag[scheme] = d
    return DropSummary(drop=drop_index, direction=direction, se=se, sinr=sinr,
                       eta=eta, diagnostics=diag)


def _drop_worker(args):
    return run_drop(*args)


@dataclass
class ExperimentResult:
    cfg: NetworkConfig
    direction: str
    model: str
    schemes: tuple
    drops: list                 # list[DropSummary], ordered by drop index
    runtime_s: float = 0.0

    @property
    def n_drops(self) -> int:
        return len(self.drops)

    def sum_se(self, scheme: str) -> np.ndarray:
        return np.array([d.sum_se(scheme) for d in self.drops])

    def user_se(self, scheme: str) -> np.ndarray:
        """All per-user SE samples pooled over drops, 1-D."""
        return np.concatenate([d.se[scheme].ravel() for d in self.drops])

    def likely_sum_se(self, scheme: str) -> float:
        """95%-likely sum SE: 5th percentile of the per-drop sum SE."""
        return float(np.percentile(self.sum_se(scheme), 5.0))

    def likely_user_se(self, scheme: str) -> float:
        """98%-likely per-user SE: 2nd percentile of pooled per-user SE."""
        return float(np.percentile(self.user_se(scheme), 2.0))

    def cdf(self, scheme: str, n_points: int = 200):
        """(breakpoints, levels) of the empirical pooled per-user SE CDF."""
        samples = np.sort(self.user_se(scheme))
        levels = np.arange(1, samples.size + 1) / samples.size
        if samples.size > n_points:
            idx = np.linspace(0, samples.size - 1, n_points).round().astype(int)
            samples, levels = samples[idx], levels[idx]
        return samples, levels

    def summary(self) -> dict:
        out = {
            "direction": self.direction,
            "model": self.model,
            "n_drops": self.n_drops,
            "runtime_s": self.runtime_s,
            "schemes": {},
        }
        for scheme in self.schemes:
            pts, lv = self.cdf(scheme)
            out["schemes"][scheme] = {
                "likely_sum_se": self.likely_sum_se(scheme),
                "likely_user_se": self.likely_user_se(scheme),
                "mean_sum_se": float(self.sum_se(scheme).mean()),
                "cdf_se": pts.tolist(),
                "cdf_level": lv.tolist(),
            }
        return out


def run_experiment(cfg: NetworkConfig, schemes=ALL_SCHEMES, n_drops: int = 100,
                   direction: str = UL, model: str = "correlated",
                   tol: float = 1e-6, workers: int = 1) -> ExperimentResult:
    """Run n_drops independent drops; drop i always uses seed (cfg.seed, i).

    Drops are independent, so workers > 1 distributes them over processes;
    the fold is ordered by drop index and the result is identical either way.
    """
    schemes = tuple(schemes)
    for s in schemes:
        if s not in ALL_SCHEMES:
            raise ValueError(f"unknown scheme {s!r}")
    start = time.perf_counter()
    jobs = [(cfg, i, direction, schemes, model, tol) for i in range(n_drops)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            drops = list(pool.map(_drop_worker, jobs))
    else:
        drops = [run_drop(*j) for j in jobs]
    return ExperimentResult(cfg=cfg, direction=direction, model=model,
                            schemes=schemes, drops=drops,
                            runtime_s=time.perf_counter() - start)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def _attenuate_user(realization: NetworkRealization, cell: int, user: int,
                    offset_db: float) -> NetworkRealization:
    """Scale one user's links to every BS by a common dB offset."""
    beta = realization.beta.copy()
    beta[:, cell, user] *= 10.0 ** (offset_db / 10.0)
    return dataclasses.replace(realization, beta=beta)


def scalability_sweep(cfg: NetworkConfig, offsets_db, direction: str = UL,
                      model: str = "correlated", target=(0, 0),
                      drop_index: int = 0, tol: float = 1e-6) -> list:
    """Sum SE of each exact scheme as one user's links fade away.

    ``target`` picks the affected (cell, user); offset 0 dB is the nominal
    drop. Each record also carries the GM sum SE with the affected cell
    removed from the problem, the oracle for the scalability property.
    """
    realization = realize(cfg, drop_index)
    cell, user = target
    records = []
    for off in offsets_db:
        coeffs = coefficient_set(_attenuate_user(realization, cell, user, off),
                                 cfg, direction, model)
        rec = {"offset_db": float(off)}
        for scheme in (GM, NWMMF, NWPF):
            eta, sinr, _ = solve_scheme(coeffs, scheme, cfg.epsilon, tol)
            se = _se(sinr, cfg, direction)
            rec[f"{scheme}_sum_se"] = float(se.sum())
            rec[f"{scheme}_min_se"] = float(se.min())
            rec[f"{scheme}_target_user_se"] = float(se[cell, user])
        out_excl = solve(build_problem(coeffs, GM, cfg.epsilon,
                                       dead_cells=(cell,)), tol=tol)
        se_excl = _se(out_excl.sinr, cfg, direction)
        rec["gm_excluded_sum_se"] = float(se_excl.sum())
        records.append(rec)
    return records


def power_budget_sweep(cfg: NetworkConfig, budgets_w, direction: str = UL,
                       schemes=(GM, NWMMF, NWPF), n_drops: int = 20,
                       model: str = "correlated", tol: float = 1e-6,
                       workers: int = 1) -> list:
    """95%-likely sum SE per scheme over a grid of transmit power budgets."""
    records = []
    key = "ul_power_budget" if direction == UL else "dl_power_budget"
    for budget in budgets_w:
        sub = cfg.replace(**{key: float(budget)})
        if budget == 0.0:
            rec = {"budget_w": 0.0}
            rec.update({f"{s}_likely_sum_se": 0.0 for s in schemes})
            records.append(rec)
            continue
        res = run_experiment(sub, schemes=schemes, n_drops=n_drops,
                             direction=direction, model=model, tol=tol,
                             workers=workers)
        rec = {"budget_w": float(budget)}
        for s in schemes:
            rec[f"{s}_likely_sum_se"] = res.likely_sum_se(s)
        records.append(rec)
    return records


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("drop", "cell", "user", "scheme", "direction", "sinr", "se")


def write_results_csv(result: ExperimentResult, path) -> None:
    """One row per user per drop per scheme."""
    L, K = result.cfg.num_cells, result.cfg.users_per_cell
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for d in result.drops:
            for scheme in result.schemes:
                sinr, se = d.sinr[scheme], d.se[scheme]
                for l in range(L):
                    for k in range(K):
                        w.writerow([d.drop, l, k, scheme, result.direction,
                                    f"{sinr[l, k]:.10g}", f"{se[l, k]:.10g}"])


def write_summary_json(result: ExperimentResult, path) -> None:
    payload = result.summary()
    payload["config"] = result.cfg.resolved_dict()
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
