"""Channel-estimation statistics.

Correlated fading uses the element-wise MMSE estimator, which only needs the
diagonals of the correlation matrices. For each receiving BS l and served
user k the estimate covariance is

    Sigma = rho_ul * tau_p * D Lambda (sum_j rho_ul tau_p R_j + I) Lambda D

with D = R (.) I and Lambda the inverse diagonal of the bracketed sum; the
sum runs over the cells j sharing the user's pilot. Only the trace-level
quantities that feed the SINR coefficients are retained.

Uncorrelated fading reduces to the scalar MMSE estimate variance gamma.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import correlation_stack


@dataclass
class BsEstimationStats:
    """EW-MMSE quantities at one receiving BS l.

    tr_sigma[k]        tr(Sigma^l_{lk}) for the K served users
    tr_d3[j, k]        tr(D^l_{jk} Lambda^l_{lk} D^l_{lk}) for every cell j
    tr_rs[j, kp, k]    tr(R^l_{j,kp} Sigma^l_{lk}) for every link (j, kp)
    d_diag[j, k]       diagonal of D^l_{jk}, shape (L, K, M)
    lam_diag[k]        diagonal of Lambda^l_{lk}, shape (K, M)
    sigma[k]           Sigma^l_{lk}, shape (K, M, M)
    """

    cell: int
    tr_sigma: np.ndarray
    tr_d3: np.ndarray
    tr_rs: np.ndarray
    d_diag: np.ndarray
    lam_diag: np.ndarray
    sigma: np.ndarray


@dataclass
class EstimationStatistics:
    """Network-wide trace statistics, stacked over receiving BSs.

    tr_sigma[l, k], tr_d3[l, j, k], tr_rs[l, j, kp, k] with the same
    per-BS meaning as in BsEstimationStats.
    """

    tr_sigma: np.ndarray   # (L, K)
    tr_d3: np.ndarray      # (L, L, K)
    tr_rs: np.ndarray      # (L, L, K, K)


def ew_mmse_stats(R: np.ndarray, cell: int, pilot_group: np.ndarray,
                  rho_ul: float, tau_p: float) -> BsEstimationStats:
    """EW-MMSE statistics at one BS from its correlation stack R (L, K, M, M)."""
    L, K, M, _ = R.shape
    rt = rho_ul * tau_p
    d_diag = np.einsum("jkmm->jkm", R).real  # diag(R^l_{jk}), nonnegative

    # Psi^{-1} = sum_{j in P_g} rt * R_jk + I depends only on (pilot group, k).
    groups = np.unique(pilot_group)
    psi_inv = {}   # (group, k) -> (M, M)
    for g in groups:
        members = np.flatnonzero(pilot_group == g)
        for k in range(K):
            psi_inv[(g, k)] = rt * R[members, k].sum(axis=0) + np.eye(M)

    own_group = pilot_group[cell]
    lam_diag = np.empty((K, M))
    sigma = np.empty((K, M, M), dtype=complex)
    for k in range(K):
        S = psi_inv[(own_group, k)]
        lam = 1.0 / np.einsum("mm->m", S).real   # entries >= 1, always invertible
        lam_diag[k] = lam
        dl = d_diag[cell, k] * lam
        sigma[k] = rt * (dl[:, None] * S * dl[None, :])

    tr_sigma = np.einsum("kmm->k", sigma).real
    # tr(D_jk Lam_lk D_lk): all diagonal, so an elementwise sum over antennas.
    tr_d3 = np.einsum("jkm,km,km->jk", d_diag, lam_diag, d_diag[cell])
    # tr(R_{j,kp} Sigma_{lk}) = sum_{mn} R_{mn} conj(Sigma_{mn}) for Hermitian pairs.
    tr_rs = np.einsum("jpmn,kmn->jpk", R, sigma.conj()).real

    return BsEstimationStats(cell=cell, tr_sigma=tr_sigma, tr_d3=tr_d3,
                             tr_rs=tr_rs, d_diag=d_diag, lam_diag=lam_diag,
                             sigma=sigma)


def network_estimation_stats(realization, cfg, model: str = "correlated") -> EstimationStatistics:
    """EW-MMSE trace statistics for every receiving BS in the realization."""
    L, K = realization.num_cells, realization.users_per_cell
    tr_sigma = np.empty((L, K))
    tr_d3 = np.empty((L, L, K))
    tr_rs = np.empty((L, L, K, K))
    for l in range(L):
        R = correlation_stack(realization, cfg, l, model=model)
        bs = ew_mmse_stats(R, l, realization.pilot_group, cfg.rho_ul, cfg.tau_p)
        tr_sigma[l] = bs.tr_sigma
        tr_d3[l] = bs.tr_d3
        tr_rs[l] = bs.tr_rs
    return EstimationStatistics(tr_sigma=tr_sigma, tr_d3=tr_d3, tr_rs=tr_rs)


def mmse_gamma(beta: np.ndarray, pilot_group: np.ndarray,
               rho_ul: float, tau_p: float) -> np.ndarray:
    """MMSE estimate variance gamma[l, j, k] for uncorrelated fading.

    gamma^l_{jk} = tau_p rho (beta^l_{jk})^2
                   / (1 + tau_p rho sum_{j' in P_j} beta^l_{j'k})
    where P_j is the pilot set of the user's cell j.
    """
    rt = rho_ul * tau_p
    L = beta.shape[0]
    same_group = pilot_group[:, None] == pilot_group[None, :]   # (L, L)
    # denom[l, j, k] = 1 + rt * sum_{j' in P_j} beta[l, j', k]
    denom = 1.0 + rt * np.einsum("ljk,pj->lpk", beta, same_group.astype(float))
    return rt * beta**2 / denom
