"""Multi-cell massive MIMO power control.

Closed-form SINR coefficient construction (correlated and uncorrelated
Rayleigh fading with EW-MMSE/MMSE estimation and MR processing), a unified
log-domain convex solver for three power-control utilities (per-cell max-min
geometric-mean, network-wide max-min, network-wide proportional fairness),
a closed-form heuristic, and a Monte-Carlo evaluation harness.
"""

from .channel import correlation_stack, local_scattering, uncorrelated
from .coefficients import (DL, UL, SinrCoefficientSet, dl_correlated,
                           dl_uncorrelated, evaluate_sinr, general_fading_mc,
                           los_coefficients, rayleigh_ewmmse_sampler,
                           ul_correlated, ul_uncorrelated)
from .config import ConfigError, NetworkConfig
from .estimation import (EstimationStatistics, ew_mmse_stats, mmse_gamma,
                         network_estimation_stats)
from .evaluation import (ALL_SCHEMES, APPROX, DropSummary, ExperimentResult,
                         coefficient_set, power_budget_sweep, run_drop,
                         run_experiment, scalability_sweep,
                         spectral_efficiency, write_results_csv,
                         write_summary_json)
from .geometry import (DegenerateGeometryError, NetworkRealization, realize,
                       wrap_distance)
from .heuristic import HeuristicOutcome, approx_dl, approx_ul, approximate
from .solver import (GM, NWMMF, NWPF, SCHEMES, ConvexProblem, SolveOutcome,
                     SolverError, bisection_nwmmf, build_problem,
                     concave_link, fixed_point_allocation, solve, verify_kkt)

__version__ = "1.0.0"

__all__ = [
    "ALL_SCHEMES", "APPROX", "ConfigError", "ConvexProblem", "DL",
    "DegenerateGeometryError", "DropSummary", "EstimationStatistics",
    "ExperimentResult", "GM", "HeuristicOutcome", "NWMMF", "NWPF",
    "NetworkConfig", "NetworkRealization", "SCHEMES", "SinrCoefficientSet",
    "SolveOutcome", "SolverError", "UL", "approx_dl", "approx_ul",
    "approximate", "bisection_nwmmf", "build_problem", "coefficient_set",
    "concave_link", "correlation_stack", "dl_correlated", "dl_uncorrelated",
    "evaluate_sinr", "ew_mmse_stats", "fixed_point_allocation",
    "general_fading_mc", "local_scattering", "los_coefficients", "mmse_gamma",
    "network_estimation_stats", "power_budget_sweep", "rayleigh_ewmmse_sampler",
    "realize", "run_drop", "run_experiment", "scalability_sweep", "solve",
    "spectral_efficiency", "ul_correlated", "ul_uncorrelated",
    "uncorrelated", "verify_kkt", "wrap_distance", "write_results_csv",
    "write_summary_json",
]
