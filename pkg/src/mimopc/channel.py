"""Spatial correlation matrices for a half-wavelength uniform linear array.

Correlated Rayleigh fading uses the approximate Gaussian local scattering
model; the uncorrelated special case is R = beta * I.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import toeplitz


def local_scattering(beta: float, phi: float, asd_rad: float, M: int) -> np.ndarray:
    """Correlation matrix of a ULA under Gaussian local scattering.

    [R]_{m,n} = beta * exp(j*pi*(m-n)*sin(phi))
                     * exp(-(asd^2 / 2) * (pi*(m-n)*cos(phi))^2)

    Returns an M x M complex Hermitian PSD matrix with tr(R)/M = beta.
    """
    lag = np.arange(M)  # m - n >= 0; the rest follows by Hermitian symmetry
    entries = beta * np.exp(
        1j * np.pi * lag * np.sin(phi)
        - 0.5 * asd_rad**2 * (np.pi * lag * np.cos(phi)) ** 2
    )
    return toeplitz(entries)  # first column = entries, Hermitian Toeplitz


def uncorrelated(beta: float, M: int) -> np.ndarray:
    """Uncorrelated fading special case: R = beta * I_M."""
    return beta * np.eye(M, dtype=complex)


def correlation_stack(realization, cfg, l: int, model: str = "correlated") -> np.ndarray:
    """All correlation matrices seen by BS l, shape (L, K, M, M).

    ``model`` selects local scattering ("correlated") or beta*I ("uncorrelated").
    """
    L, K, M = realization.num_cells, realization.users_per_cell, cfg.antennas
    R = np.empty((L, K, M, M), dtype=complex)
    for lp in range(L):
        for k in range(K):
            b = realization.beta[l, lp, k]
            if model == "correlated":
                R[lp, k] = local_scattering(b, realization.nominal_aoa[l, lp, k],
                                            cfg.asd_rad, M)
            elif model == "uncorrelated":
                R[lp, k] = uncorrelated(b, M)
            else:
                raise ValueError(f"unknown channel model {model!r}")
    return R
