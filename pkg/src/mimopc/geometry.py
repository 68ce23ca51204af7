"""Cellular layout, user drops, large-scale fading and pilot-reuse groups.

The deployment is a square grid of cells on a torus (wrap-around), one BS at
the center of each cell. Users are dropped uniformly in their serving cell
and the shadow fading of a user is redrawn until its home BS has the
strictly largest large-scale fading coefficient among all BSs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import NetworkConfig

#: Minimum user-BS distance (m), keeps the pathloss model out of its singularity.
MIN_DISTANCE_M = 1.0

#: Attempts at redrawing a user's shadow vector before giving up.
RESAMPLE_CAP = 1000


class DegenerateGeometryError(RuntimeError):
    """Home-BS dominance could not be established within the resampling cap."""


@dataclass
class NetworkRealization:
    """One Monte-Carlo drop of the network.

    beta and nominal_aoa are indexed [receiving BS, user's cell, user]:
    ``beta[l, lp, k]`` is the large-scale fading between BS ``l`` and user
    ``k`` served by cell ``lp``.
    """

    bs_positions: np.ndarray      # (L, 2)
    user_positions: np.ndarray    # (L, K, 2)
    beta: np.ndarray              # (L, L, K), linear scale
    nominal_aoa: np.ndarray       # (L, L, K), radians
    pilot_group: np.ndarray       # (L,), group ids

    @property
    def num_cells(self) -> int:
        return self.bs_positions.shape[0]

    @property
    def users_per_cell(self) -> int:
        return self.user_positions.shape[1]

    def pilot_set(self, l: int) -> np.ndarray:
        """Cells sharing cell l's pilots (including l itself)."""
        return np.flatnonzero(self.pilot_group == self.pilot_group[l])


def build_layout(cfg: NetworkConfig) -> np.ndarray:
    """BS positions on a sqrt(L) x sqrt(L) grid of cell centers, shape (L, 2)."""
    L = cfg.num_cells
    n = math.isqrt(L)
    if n * n != L:
        raise ValueError(f"num_cells must be a perfect square, got {L}")
    spacing = cfg.area_side / n
    coords = (np.arange(n) + 0.5) * spacing
    xx, yy = np.meshgrid(coords, coords, indexing="xy")
    return np.column_stack([xx.ravel(), yy.ravel()])


def wrap_displacement(p: np.ndarray, q: np.ndarray, area_side: float) -> np.ndarray:
    """Displacement q - p to the nearest toroidal copy of q. Broadcasts."""
    d = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    return d - area_side * np.round(d / area_side)

def wrap_distance(p, q, area_side: float) -> np.ndarray:
    """Minimum Euclidean distance between p and the 9 toroidal shifts of q."""
    d = wrap_displacement(p, q, area_side)
    return np.sqrt(np.sum(d * d, axis=-1))


def large_scale_fading(distance_m, shadow_db, cfg: NetworkConfig) -> np.ndarray:
    """Linear large-scale fading at the given distance(s) and shadow term(s) in dB."""
    d = np.maximum(np.asarray(distance_m, dtype=float), MIN_DISTANCE_M)
    beta_db = (
        cfg.pathloss_intercept_db
        - cfg.pathloss_slope_db * np.log10(d)
        + np.asarray(shadow_db, dtype=float)
    )
    return 10.0 ** (beta_db / 10.0)


def pilot_groups(L: int, f: int) -> np.ndarray:
    """Pilot-reuse group id per cell for reuse factor f in {1, 2, 4}.

    f=1: single group. f=2: checkerboard on the cell grid. f=4: 2x2 block
    coloring. Both reuse patterns need an even grid side to stay consistent
    across the wrap-around boundary.
    """
    n = math.isqrt(L)
    if n * n != L:
        raise ValueError(f"L must be a perfect square, got {L}")
    if f == 1:
        return np.zeros(L, dtype=int)
    if f not in (2, 4):
        raise ValueError(f"pilot reuse factor must be 1, 2 or 4, got {f}")
    if n % 2 != 0:
        raise ValueError(f"reuse factor {f} needs an even grid side, got {n}x{n}")
    rows, cols = np.divmod(np.arange(L), n)
    if f == 2:
        return (rows + cols) % 2
    return (rows % 2) * 2 + (cols % 2)


def drop_users(cfg: NetworkConfig, bs_positions: np.ndarray,
               rng: np.random.Generator) -> NetworkRealization:
    """Drop K users per cell and generate shadow/large-scale fading.

    Each user's full shadow vector (one term per BS) is redrawn until the
    home BS has the strictly largest beta, up to RESAMPLE_CAP attempts.
    """
    L, K = cfg.num_cells, cfg.users_per_cell
    n = math.isqrt(L)
    half = cfg.area_side / (2 * n)

    user_positions = np.empty((L, K, 2))
    beta = np.empty((L, L, K))
    aoa = np.empty((L, L, K))

    for lp in range(L):
        center = bs_positions[lp]
        offsets = rng.uniform(-half, half, size=(K, 2))
        user_positions[lp] = center + offsets
        for k in range(K):
            pos = user_positions[lp, k]
            disp = wrap_displacement(bs_positions, pos, cfg.area_side)  # (L, 2)
            dist = np.sqrt(np.sum(disp * disp, axis=-1))
            for attempt in range(RESAMPLE_CAP):
                shadow = rng.normal(0.0, cfg.shadow_std_db, size=L)
                b = large_scale_fading(dist, shadow, cfg)
                others = np.delete(b, lp)
                if L == 1 or b[lp] > others.max():
                    break
            else:
                raise DegenerateGeometryError(
                    f"user ({lp},{k}): home BS not dominant after {RESAMPLE_CAP} redraws"
                )
            beta[:, lp, k] = b
            aoa[:, lp, k] = np.arctan2(disp[:, 1], disp[:, 0])

    return NetworkRealization(
        bs_positions=bs_positions,
        user_positions=user_positions,
        beta=beta,
        nominal_aoa=aoa,
        pilot_group=pilot_groups(L, cfg.pilot_reuse),
    )


def realize(cfg: NetworkConfig, drop_index: int = 0) -> NetworkRealization:
    """Deterministic drop: (config seed, drop index) fully determine the output."""
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, drop_index]))
    return drop_users(cfg, build_layout(cfg), rng)
