"""SINR coefficient sets in the general form

    SINR_lk(eta) = a_lk eta_lk
                   / (sum_{l'k'} b^{l'k'}_{lk} eta_{l'k'}
                      + sum_{l' in P_l \\ {l}} c^{l'}_{lk} eta_{l'k} + d_lk)

for uplink/downlink, correlated/uncorrelated Rayleigh fading, a sample-mean
estimator for arbitrary fading with MR processing, and deterministic
line-of-sight channels. The coherent self-term that the closed-form SINR
expressions subtract explicitly is folded into b analytically, so every
coefficient is nonnegative and SINR is monotone in the own power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimation import EstimationStatistics

UL, DL = "ul", "dl"


@dataclass
class SinrCoefficientSet:
    """Coefficients {a, b, c, d} of the general SINR form.

    a[l, k] > 0 for live users; b[l, k, l', k'] >= 0 covers all transmitters
    including the own link's noncoherent residue; c[l, k, l'] >= 0 is the
    coherent (pilot-contamination) gain, zero outside P_l \\ {l}; d[l, k] > 0
    is the effective noise.
    """

    direction: str             # "ul" or "dl"
    a: np.ndarray              # (L, K)
    b: np.ndarray              # (L, K, L, K)
    c: np.ndarray              # (L, K, L)
    d: np.ndarray              # (L, K)
    pilot_group: np.ndarray    # (L,)

    @property
    def num_cells(self) -> int:
        return self.a.shape[0]

    @property
    def users_per_cell(self) -> int:
        return self.a.shape[1]

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "a": self.a.tolist(),
            "b": self.b.tolist(),
            "c": self.c.tolist(),
            "d": self.d.tolist(),
            "pilot_group": self.pilot_group.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SinrCoefficientSet":
        direction = data["direction"]
        if direction not in (UL, DL):
            raise ValueError(f"direction must be 'ul' or 'dl', got {direction!r}")
        return cls(
            direction=direction,
            a=np.asarray(data["a"], dtype=float),
            b=np.asarray(data["b"], dtype=float),
            c=np.asarray(data["c"], dtype=float),
            d=np.asarray(data["d"], dtype=float),
            pilot_group=np.asarray(data["pilot_group"], dtype=int),
        )


def _contamination_mask(pilot_group: np.ndarray) -> np.ndarray:
    """mask[l, l'] = True for l' in P_l \\ {l}."""
    same = pilot_group[:, None] == pilot_group[None, :]
    np.fill_diagonal(same, False)
    return same


def ul_uncorrelated(gamma: np.ndarray, beta: np.ndarray, M: int, rho_ul: float,
                    pilot_group: np.ndarray) -> SinrCoefficientSet:
    """Uplink MR coefficients for uncorrelated fading.

    gamma[l, j, k] and beta[l, j, k] are indexed [receiving BS, cell, user].
    """
    L, _, K = beta.shape
    a = M * rho_ul * np.einsum("llk->lk", gamma)
    b = np.broadcast_to(rho_ul * beta[:, None, :, :], (L, K, L, K)).copy()
    mask = _contamination_mask(pilot_group)
    c = M * rho_ul * np.transpose(gamma, (0, 2, 1)) * mask[:, None, :]
    d = np.ones((L, K))
    return SinrCoefficientSet(UL, a, b, c, d, pilot_group.copy())


def dl_uncorrelated(gamma: np.ndarray, beta: np.ndarray, M: int, rho_dl: float,
                    pilot_group: np.ndarray) -> SinrCoefficientSet:
    """Downlink MR coefficients for uncorrelated fading (same indexing as UL)."""
    L, _, K = beta.shape
    a = M * rho_dl * np.einsum("llk->lk", gamma)
    # b^{l'k'}_{lk} = rho_dl * beta^{l'}_{lk}: interference from BS l', any k'.
    b_lkl = rho_dl * np.transpose(beta, (1, 2, 0))          # (L, K, L)
    b = np.broadcast_to(b_lkl[:, :, :, None], (L, K, L, K)).copy()
    mask = _contamination_mask(pilot_group)
    # c^{l'}_{lk} = M rho_dl gamma^{l'}_{lk}
    c = M * rho_dl * np.transpose(gamma, (1, 2, 0)) * mask[:, None, :]
    d = np.ones((L, K))
    return SinrCoefficientSet(DL, a, b, c, d, pilot_group.copy())


def ul_correlated(stats: EstimationStatistics, rho_ul: float, tau_p: float,
                  pilot_group: np.ndarray) -> SinrCoefficientSet:
    """Uplink MR coefficients for correlated fading from EW-MMSE statistics."""
    rt = rho_ul * tau_p
    L, K = stats.tr_sigma.shape
    a = rho_ul * (rt * np.einsum("llk->lk", stats.tr_d3)) ** 2
    # b^{l'k'}_{lk} = rho * tr(R^l_{l'k'} Sigma^l_{lk}); the own link keeps
    # only this noncoherent part (self coherent term folded out).
    b = rho_ul * np.transpose(stats.tr_rs, (0, 3, 1, 2))    # (L, K, L, K)
    mask = _contamination_mask(pilot_group)
    c = rho_ul * (rt * np.transpose(stats.tr_d3, (0, 2, 1))) ** 2 * mask[:, None, :]
    d = stats.tr_sigma.copy()
    return SinrCoefficientSet(UL, a, b, c, d, pilot_group.copy())


def dl_correlated(stats: EstimationStatistics, rho_dl: float, rho_ul: float,
                  tau_p: float, pilot_group: np.ndarray) -> SinrCoefficientSet:
    """Downlink MR coefficients for correlated fading.

    Derived from the effective DL SINR by multiplying its denominator through
    by tr(Sigma^l_{lk}), which becomes the effective noise d.
    """
    rt = rho_ul * tau_p
    L, K = stats.tr_sigma.shape
    tr_sigma = stats.tr_sigma
    if np.any(tr_sigma <= 0):
        raise ValueError("tr(Sigma) = 0 on a serving link (dead serving channel)")
    a = rho_dl * (rt * np.einsum("llk->lk", stats.tr_d3)) ** 2
    # b^{l'k'}_{lk} = rho_dl tr(R^{l'}_{lk} Sigma^{l'}_{l'k'})
    #                * tr(Sigma^l_{lk}) / tr(Sigma^{l'}_{l'k'})
    ratio = tr_sigma[:, :, None, None] / tr_sigma[None, None, :, :]  # (L,K,L',K')
    b = rho_dl * np.transpose(stats.tr_rs, (1, 2, 0, 3)) * ratio
    mask = _contamination_mask(pilot_group)
    # c^{l'}_{lk} = rho_dl (rt tr(D^{l'}_{lk} Lam^{l'}_{l'k} D^{l'}_{l'k}))^2
    #              * tr(Sigma^l_{lk}) / tr(Sigma^{l'}_{l'k})
    tr_d3_t = np.transpose(stats.tr_d3, (1, 2, 0))           # [l, k, l']
    # ratio_c[l, k, l'] = tr_sigma[l, k] / tr_sigma[l', k]
    ratio_c = tr_sigma[:, :, None] / tr_sigma.T[None, :, :]
    c = rho_dl * (rt * tr_d3_t) ** 2 * ratio_c * mask[:, None, :]
    d = tr_sigma.copy()
    return SinrCoefficientSet(DL, a, b, c, d, pilot_group.copy())


def evaluate_sinr(coeffs: SinrCoefficientSet, eta: np.ndarray) -> np.ndarray:
    """Per-user SINR (L, K) at power allocation eta (L, K)."""
    eta = np.asarray(eta, dtype=float)
    denom = (
        np.einsum("lkjp,jp->lk", coeffs.b, eta)
        + np.einsum("lkj,jk->lk", coeffs.c, eta)
        + coeffs.d
    )
    return coeffs.a * eta / denom


# ---------------------------------------------------------------------------
# Generic fading (sample-mean estimator) and line-of-sight closed forms
# ---------------------------------------------------------------------------

def general_fading_mc(sampler, direction: str, rho: float, sigma2: float,
                      pilot_group: np.ndarray, n_samples: int,
                      rng: np.random.Generator,
                      batch_size: int = 1000) -> SinrCoefficientSet:
    """Coefficients for an arbitrary fading model with MR processing,
    estimated by sample means over channel realizations.

    ``sampler(rng, size)`` must return ``(h, h_hat)`` where
    ``h[s, l, j, k, :]`` is the channel from user (j, k) to BS l and
    ``h_hat[s, l, k, :]`` the BS-l estimate of its served user k's channel.
    UL combiner: v = h_hat. DL precoder: w = h_hat / sqrt(E||h_hat||^2),
    the norm estimated from the same samples.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    if direction not in (UL, DL):
        raise ValueError(f"direction must be 'ul' or 'dl', got {direction!r}")

    sum_ip = sum_sq = sum_norm2 = None
    done = 0
    while done < n_samples:
        size = min(batch_size, n_samples - done)
        h, h_hat = sampler(rng, size)
        if direction == UL:
            # x[s, l, k, j, p] = h_hat[s,l,k]^H h[s,l,j,p]
            ip = np.einsum("slkm,sljpm->slkjp", h_hat.conj(), h)
        else:
            # x[s, l, k, j, p] = h_hat[s,j,p]^H h[s,j,l,k] (precoder of BS j)
            ip = np.einsum("sjpm,sjlkm->slkjp", h_hat.conj(), h)
        norm2 = np.einsum("slkm,slkm->slk", h_hat.conj(), h_hat).real
        if sum_ip is None:
            sum_ip = ip.sum(axis=0)
            sum_sq = (np.abs(ip) ** 2).sum(axis=0)
            sum_norm2 = norm2.sum(axis=0)
        else:
            sum_ip += ip.sum(axis=0)
            sum_sq += (np.abs(ip) ** 2).sum(axis=0)
            sum_norm2 += norm2.sum(axis=0)
        done += size

    mean_ip = sum_ip / n_samples          # (L, K, L, K)
    mean_sq = sum_sq / n_samples
    mean_norm2 = sum_norm2 / n_samples    # (L, K): E||h_hat^l_lk||^2

    if direction == DL:
        # normalize each BS-j precoder for user p by sqrt(E||h_hat_jp||^2)
        scale = np.sqrt(mean_norm2)[None, None, :, :]
        mean_ip = mean_ip / scale
        mean_sq = mean_sq / scale**2

    L, K = mean_norm2.shape
    a = rho * np.abs(np.einsum("lklk->lk", mean_ip)) ** 2
    var = np.maximum(mean_sq - np.abs(mean_ip) ** 2, 0.0)
    b = rho * var
    mask = _contamination_mask(pilot_group)
    coh = np.abs(np.einsum("lkjk->lkj", mean_ip)) ** 2
    c = rho * coh * mask[:, None, :]
    if direction == UL:
        d = sigma2 * mean_norm2
    else:
        d = np.full((L, K), float(sigma2))
    if np.any(d <= 0):
        raise ValueError("effective noise d must be positive")
    return SinrCoefficientSet(direction, a, b, c, d, pilot_group.copy())


def rayleigh_ewmmse_sampler(R: np.ndarray, pilot_group: np.ndarray,
                            rho_ul: float, tau_p: float):
    """Sampler for correlated Rayleigh channels with EW-MMSE estimates.

    R[l, j, k] is the (M, M) correlation matrix between BS l and user (j, k).
    Returned estimates come from a simulated pilot phase: the BS observes the
    superposition of the pilot-sharing users plus noise and applies the
    element-wise MMSE filter.
    """
    L, _, K, M, _ = R.shape
    rt = rho_ul * tau_p
    # Square roots for channel synthesis and the EW-MMSE diagonal filters.
    sqrt_R = np.empty_like(R)
    for l in range(L):
        for j in range(L):
            for k in range(K):
                w, V = np.linalg.eigh(R[l, j, k])
                sqrt_R[l, j, k] = (V * np.sqrt(np.maximum(w, 0.0))) @ V.conj().T
    d_diag = np.einsum("ljkmm->ljkm", R).real
    same = pilot_group[:, None] == pilot_group[None, :]
    lam = np.empty((L, K, M))
    for l in range(L):
        members = np.flatnonzero(same[l])
        for k in range(K):
            lam[l, k] = 1.0 / (rt * d_diag[l, members, k].sum(axis=0) + 1.0)

    def sampler(rng: np.random.Generator, size: int):
        z = rng.normal(size=(size, L, L, K, M)) + 1j * rng.normal(size=(size, L, L, K, M))
        h = np.einsum("ljkmn,sljkn->sljkm", sqrt_R, z) / np.sqrt(2.0)
        noise = (rng.normal(size=(size, L, K, M)) + 1j * rng.normal(size=(size, L, K, M))) / np.sqrt(2.0)
        h_hat = np.empty((size, L, K, M), dtype=complex)
        for l in range(L):
            members = np.flatnonzero(same[l])
            # pilot observation at BS l for its served pilot k
            y = np.sqrt(rt) * h[:, l, members, :, :].sum(axis=1) + noise[:, l]
            h_hat[:, l] = np.sqrt(rt) * d_diag[l, l][None] * lam[l][None] * y
        return h, h_hat

    return sampler


def los_coefficients(h_bar: np.ndarray, combiner: np.ndarray, rho: float,
                     sigma2: float, direction: str) -> SinrCoefficientSet:
    """Line-of-sight coefficients for deterministic channels.

    h_bar[l, j, k] is the (M,) channel between BS l and user (j, k);
    combiner[l, k] is BS l's combining (UL) or precoding (DL) vector for its
    user k. There is no estimation error, so c = 0.
    """
    if direction not in (UL, DL):
        raise ValueError(f"direction must be 'ul' or 'dl', got {direction!r}")
    L, _, K, _ = h_bar.shape
    norms2 = np.einsum("lkm,lkm->lk", combiner.conj(), combiner).real
    if np.any(norms2 <= 0):
        raise ValueError("combining/precoding vectors must be nonzero")
    if direction == UL:
        ip = np.einsum("lkm,ljpm->lkjp", combiner.conj(), h_bar)
        d = sigma2 * norms2
    else:
        # w_{jp}^H h^{j}_{lk}
        ip = np.einsum("jpm,jlkm->lkjp", combiner.conj(), h_bar)
        d = np.full((L, K), float(sigma2))
    gains = rho * np.abs(ip) ** 2                     # (L, K, L, K)
    a = np.einsum("lklk->lk", gains).copy()
    b = gains.copy()
    for l in range(L):
        for k in range(K):
            b[l, k, l, k] = 0.0
    c = np.zeros((L, K, L))
    pilot_group = np.arange(L)   # no pilot sharing: every cell its own group
    return SinrCoefficientSet(direction, a, b, c, d, pilot_group)
