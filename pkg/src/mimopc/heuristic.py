"""Closed-form approximate per-cell max-min power control.

The coherent (pilot-contamination) interference is ignored when choosing the
powers; the resulting allocation is then evaluated with the exact SINR and a
first-order contamination-compensated per-cell SINR is reported. Works on any
coefficient set in the general form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import DL, UL, SinrCoefficientSet, evaluate_sinr


@dataclass
class HeuristicOutcome:
    eta: np.ndarray             # (L, K), feasible for the direction
    sinr_exact: np.ndarray      # (L, K), exact SINR at eta
    sinr_reported: np.ndarray   # (L, K), approximate per-cell-equal SINR


def approx_ul(coeffs: SinrCoefficientSet) -> HeuristicOutcome:
    """Uplink: eta_lk = min_k' a_lk' / a_lk, then compensate to first order."""
    if coeffs.direction != UL:
        raise ValueError("approx_ul needs an uplink coefficient set")
    a = coeffs.a
    if np.any(a <= 0):
        raise ValueError("approx_ul requires a > 0 for every user")
    eta = a.min(axis=1, keepdims=True) / a
    sinr_exact = evaluate_sinr(coeffs, eta)
    reported = (sinr_exact / eta).min(axis=1, keepdims=True)
    return HeuristicOutcome(eta=eta,
                            sinr_exact=sinr_exact,
                            sinr_reported=np.broadcast_to(reported, a.shape).copy())


def approx_dl(coeffs: SinrCoefficientSet, kprime_tol: float = 1e-9) -> HeuristicOutcome:
    """Downlink: per-cell simplex weights from the noncoherent load (d + sum_l' b).

    b is treated as independent of the interferer index k'; coefficient sets
    where that only holds approximately are reduced to the k'-averaged b.
    """
    if coeffs.direction != DL:
        raise ValueError("approx_dl needs a downlink coefficient set")
    a = coeffs.a
    if np.any(a <= 0):
        raise ValueError("approx_dl requires a > 0 for every user")
    b_mean = coeffs.b.mean(axis=3)                        # (L, K, L')
    load = (coeffs.d + b_mean.sum(axis=2)) / a            # (L, K)
    eta = load / load.sum(axis=1, keepdims=True)
    sinr_exact = evaluate_sinr(coeffs, eta)
    reported = 1.0 / (eta / sinr_exact).sum(axis=1, keepdims=True)
    return HeuristicOutcome(eta=eta,
                            sinr_exact=sinr_exact,
                            sinr_reported=np.broadcast_to(reported, a.shape).copy())


def approximate(coeffs: SinrCoefficientSet) -> HeuristicOutcome:
    return approx_ul(coeffs) if coeffs.direction == UL else approx_dl(coeffs)
