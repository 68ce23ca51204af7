"""Command-line entry point.

Subcommands:
  simulate     Monte-Carlo run over random drops; writes results.csv + summary.json
  scalability  one-drop sweep attenuating a designated user's links (dB grid)
  power-sweep  95%-likely sum SE over a grid of transmit power budgets
  solve        single-instance solve from a serialized coefficient-set JSON
  selftest     embedded invariant checks (concavity grid, reductions, oracles)

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 selftest failure.

CSV columns (simulate): drop, cell, user, scheme, direction, sinr, se.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from .coefficients import DL, UL, SinrCoefficientSet, evaluate_sinr
from .config import ConfigError, NetworkConfig
from .evaluation import (ALL_SCHEMES, power_budget_sweep, run_experiment,
                         scalability_sweep, write_results_csv,
                         write_summary_json)
from .solver import (GM, NWMMF, NWPF, SCHEMES, SolverError, bisection_nwmmf,
                     build_problem, concave_link, solve, verify_kkt)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_SELFTEST = 0, 2, 3, 4


def _load_config(args) -> NetworkConfig:
    if args.config:
        cfg = NetworkConfig.from_json(args.config)
    else:
        cfg = NetworkConfig()
    overrides = {}
    for name in ("num_cells", "users_per_cell", "antennas", "pilot_reuse",
                 "seed", "epsilon"):
        val = getattr(args, name.replace("num_cells", "cells"), None) \
            if name == "num_cells" else getattr(args, name, None)
        if val is not None:
            overrides[name] = val
    if overrides:
        cfg = cfg.replace(**overrides)
    return cfg


def _out_dir(args, experiment: str) -> str:
    tag = args.tag or time.strftime("%Y%m%d-%H%M%S")
    path = os.path.join(args.out, experiment, tag)
    os.makedirs(path, exist_ok=True)
    return path


def _write_config(cfg: NetworkConfig, out_dir: str) -> None:
    with open(os.path.join(out_dir, "config.resolved.json"), "w") as fh:
        json.dump(cfg.resolved_dict(), fh, indent=2)
        fh.write("\n")


def _parse_schemes(text: str):
    schemes = tuple(s.strip() for s in text.split(",") if s.strip())
    for s in schemes:
        if s not in ALL_SCHEMES:
            raise ConfigError(f"unknown scheme {s!r}; choose from {ALL_SCHEMES}")
    return schemes


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    schemes = _parse_schemes(args.schemes)
    out_dir = _out_dir(args, "simulate")
    _write_config(cfg, out_dir)
    result = run_experiment(cfg, schemes=schemes, n_drops=args.drops,
                            direction=args.direction, model=args.fading,
                            workers=args.workers)
    write_results_csv(result, os.path.join(out_dir, "results.csv"))
    write_summary_json(result, os.path.join(out_dir, "summary.json"))
    if args.verbose:
        for s in schemes:
            print(f"{s}: 95%-likely sum SE = {result.likely_sum_se(s):.3f}, "
                  f"98%-likely user SE = {result.likely_user_se(s):.4f}")
    print(out_dir)
    return EXIT_OK


def cmd_scalability(args) -> int:
    cfg = _load_config(args)
    out_dir = _out_dir(args, "scalability")
    _write_config(cfg, out_dir)
    offsets = np.arange(args.offset_start, args.offset_stop + 1e-9,
                        args.offset_step)
    records = scalability_sweep(cfg, offsets, direction=args.direction,
                                model=args.fading,
                                target=(args.cell, args.user))
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump({"config": cfg.resolved_dict(), "records": records}, fh,
                  indent=2)
        fh.write("\n")
    if args.verbose:
        for r in records:
            print(f"offset {r['offset_db']:+8.1f} dB: "
                  f"gm={r['gm_sum_se']:.3f} nwmmf={r['nwmmf_sum_se']:.3f} "
                  f"nwpf={r['nwpf_sum_se']:.3f}")
    print(out_dir)
    return EXIT_OK


def cmd_power_sweep(args) -> int:
    cfg = _load_config(args)
    out_dir = _out_dir(args, "power-sweep")
    _write_config(cfg, out_dir)
    budgets = [float(b) for b in args.budgets.split(",")]
    records = power_budget_sweep(cfg, budgets, direction=args.direction,
                                 n_drops=args.drops, model=args.fading,
                                 workers=args.workers)
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump({"config": cfg.resolved_dict(), "records": records}, fh,
                  indent=2)
        fh.write("\n")
    print(out_dir)
    return EXIT_OK


def cmd_solve(args) -> int:
    with open(args.coefficients) as fh:
        data = json.load(fh)
    coeffs = SinrCoefficientSet.from_dict(data)
    if args.scheme == NWMMF and args.bisection:
        out = bisection_nwmmf(coeffs, tol=args.tol)
        report = None
    else:
        prob = build_problem(coeffs, args.scheme, args.epsilon or 1e-3)
        out = solve(prob, tol=args.tol)
        report = verify_kkt(prob, out) if out.x is not None else None
    payload = {
        "scheme": out.scheme,
        "direction": out.direction,
        "eta": out.eta.tolist(),
        "targets": np.asarray(out.targets).tolist(),
        "sinr": out.sinr.tolist(),
        "objective": out.objective,
        "objective_log": out.objective_log,
        "kkt_residual": out.kkt_residual,
        "constraint_violation": out.constraint_violation,
        "iterations": out.iterations,
        "status": out.status,
    }
    if report is not None:
        payload["kkt_report"] = report
    json.dump(payload, sys.stdout, indent=2)
    print()
    return EXIT_OK if out.status == "optimal" else EXIT_SOLVER


# ---------------------------------------------------------------------------
# Selftest
# ---------------------------------------------------------------------------

def _selftest_checks(perturb: bool):
    """Yield (name, passed, detail) for the embedded invariant suite."""
    rng = np.random.default_rng(1234)

    # Link-function derivatives vs central differences.
    xs = np.linspace(-10, 10, 81)
    eps = 1e-3
    h = 1e-4
    f0, f1, f2 = concave_link(xs, eps)
    fp, _, _ = concave_link(xs + h, eps)
    fm, _, _ = concave_link(xs - h, eps)
    d1 = (fp - fm) / (2 * h)
    d2 = (fp - 2 * f0 + fm) / h**2
    err = max((np.abs(d1 - f1) / np.maximum(np.abs(f1), 1e-8)).max(),
              (np.abs(d2 - f2) / np.maximum(np.abs(f2), 1e-8)).max())
    yield ("link-derivatives", err < 1e-5, f"max relative fd error {err:.2e}")

    # Link concavity where the function is concave (above the convex toe).
    xs_hi = np.linspace(0.0, 30.0, 2000)
    _, _, f2_hi = concave_link(xs_hi, eps)
    yield ("link-concavity-upper-range", bool((f2_hi <= 1e-12).all()),
           f"max f'' on [0,30]: {f2_hi.max():.2e}")

    # Tiny-instance oracle: L=2, K=1 UL, all three schemes vs grid search.
    from .coefficients import UL as _UL
    a = rng.uniform(5.0, 50.0, (2, 1))
    b = rng.uniform(0.1, 1.0, (2, 1, 2, 1))
    c = np.zeros((2, 1, 2))
    d = np.ones((2, 1))
    if perturb:
        a = -a           # deliberately broken coefficients
    coeffs = SinrCoefficientSet(_UL, a, b, c, d, np.zeros(2, dtype=int))
    grid = np.linspace(1e-3, 1.0, 200)
    E1, E2 = np.meshgrid(grid, grid, indexing="ij")

    def sinr_grid():
        eta = np.stack([E1.ravel(), E2.ravel()], axis=0)[:, None, :]
        s = np.empty((2, eta.shape[2]))
        for i in range(eta.shape[2]):
            s[:, i] = evaluate_sinr(coeffs, eta[:, :, i]).ravel()
        return s

    try:
        epsv = 1e-3
        with np.errstate(invalid="ignore"):
            s = sinr_grid()
            best = {
                GM: np.log(np.log2(1 + epsv + s)).sum(axis=0).max(),
                NWMMF: s.min(axis=0).max(),
                NWPF: np.log(s).sum(axis=0).max(),
            }
        for scheme in SCHEMES:
            out = solve(build_problem(coeffs, scheme, epsv))
            got = (out.objective_log if scheme != NWMMF else out.objective)
            ok = got >= best[scheme] - 1e-3
            yield (f"grid-oracle-{scheme}", bool(ok),
                   f"solver {got:.6f} vs grid {best[scheme]:.6f}")
    except (ValueError, SolverError) as exc:
        for scheme in SCHEMES:
            yield (f"grid-oracle-{scheme}", False, f"failed: {exc}")

    # Correlated pipeline fed scaled-identity correlation matrices must match
    # the uncorrelated closed form.
    from .coefficients import ul_correlated
    from .estimation import network_estimation_stats
    from .evaluation import coefficient_set
    from .geometry import realize
    cfg = NetworkConfig(num_cells=4, users_per_cell=2, antennas=8, seed=7)
    real = realize(cfg, 0)
    cu = coefficient_set(real, cfg, UL, "uncorrelated")
    stats = network_estimation_stats(real, cfg, model="uncorrelated")
    co = ul_correlated(stats, cfg.rho_ul, cfg.tau_p, real.pilot_group)
    eta = rng.uniform(0.05, 1.0, (4, 2))
    su, so = evaluate_sinr(cu, eta), evaluate_sinr(co, eta)
    rel = np.abs(su - so) / su
    yield ("model-reduction", bool(rel.max() < 1e-9),
           f"max relative SINR gap {rel.max():.2e}")


def cmd_selftest(args) -> int:
    failures = 0
    for name, ok, detail in _selftest_checks(args.perturb):
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        failures += 0 if ok else 1
    if failures:
        print(f"{failures} selftest check(s) failed")
        return EXIT_SELFTEST
    print("all selftest checks passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out", default="results", help="output root directory")
    p.add_argument("--tag", help="output subdirectory name (default timestamp)")
    p.add_argument("--direction", choices=(UL, DL), default=UL)
    p.add_argument("--fading", choices=("correlated", "uncorrelated"),
                   default="correlated")
    p.add_argument("--cells", type=int, help="override num_cells")
    p.add_argument("--users-per-cell", dest="users_per_cell", type=int)
    p.add_argument("--antennas", type=int)
    p.add_argument("--pilot-reuse", dest="pilot_reuse", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--workers", type=int, default=max(os.cpu_count() or 1, 1))
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mimopc",
        description="Multi-cell massive MIMO power control: simulation, "
                    "convex solvers, and closed-form heuristics.",
        epilog="results.csv columns: drop, cell, user, scheme, direction, "
               "sinr, se",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte-Carlo experiment over drops")
    _add_common(p)
    p.add_argument("--drops", type=int, default=100)
    p.add_argument("--schemes", default=",".join(ALL_SCHEMES),
                   help="comma-separated subset of gm,nwmmf,nwpf,approx")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scalability", help="attenuate one user's links over a dB grid")
    _add_common(p)
    p.add_argument("--offset-start", type=float, default=-140.0)
    p.add_argument("--offset-stop", type=float, default=0.0)
    p.add_argument("--offset-step", type=float, default=20.0)
    p.add_argument("--cell", type=int, default=0)
    p.add_argument("--user", type=int, default=0)
    p.set_defaults(func=cmd_scalability)

    p = sub.add_parser("power-sweep", help="95%%-likely sum SE vs power budget")
    _add_common(p)
    p.add_argument("--budgets", default="0.02,0.2,2.0",
                   help="comma-separated budgets in watts")
    p.add_argument("--drops", type=int, default=20)
    p.set_defaults(func=cmd_power_sweep)

    p = sub.add_parser("solve", help="solve one serialized coefficient set")
    p.add_argument("coefficients", help="JSON file with a coefficient record")
    p.add_argument("--scheme", choices=SCHEMES, required=True)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--bisection", action="store_true",
                   help="use the bisection solver (nwmmf only)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("selftest", help="run embedded invariant checks")
    p.add_argument("--perturb", action="store_true",
                   help="inject a coefficient fault (selftest must then fail)")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"configuration error: malformed JSON input: {exc}",
              file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
