"""Network configuration: parameters of the simulated cellular deployment.

All powers live in watts in the config file; the rest of the library works
with normalized transmit powers (power divided by the noise power), so the
noise enters the SINR formulas as a unit variance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields


class ConfigError(ValueError):
    """Raised for invalid or inconsistent configuration values."""


@dataclass(frozen=True)
class NetworkConfig:
    num_cells: int = 16
    users_per_cell: int = 5
    antennas: int = 100
    area_side: float = 1000.0          # meters
    pilot_reuse: int = 1               # f in {1, 2, 4}
    coherence_block: int = 200         # tau_c, samples
    pilot_len: int | None = None       # tau_p; defaults to f * K
    ul_data: int | None = None         # tau_u; defaults to (tau_c - tau_p) // 2
    dl_data: int | None = None         # tau_d; defaults to (tau_c - tau_p) // 2
    ul_power_budget: float = 0.2       # watts per user
    dl_power_budget: float = 40.0      # watts per BS
    noise_power_dbm: float = -94.0
    pathloss_intercept_db: float = -35.0
    pathloss_slope_db: float = 36.7    # dB per decade of distance
    shadow_std_db: float = 7.0
    epsilon: float = 1e-3
    asd_deg: float = 10.0              # angular standard deviation
    seed: int = 0

    def __post_init__(self):
        L = self.num_cells
        if L < 1 or int(math.isqrt(L)) ** 2 != L:
            raise ConfigError(f"num_cells must be a positive perfect square, got {L}")
        if self.users_per_cell < 1:
            raise ConfigError("users_per_cell must be >= 1")
        if self.antennas < 1:
            raise ConfigError("antennas must be >= 1")
        if self.area_side <= 0:
            raise ConfigError("area_side must be positive")
        if self.pilot_reuse not in (1, 2, 4):
            raise ConfigError(f"pilot_reuse must be one of 1, 2, 4, got {self.pilot_reuse}")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be > 0")
        if self.shadow_std_db < 0:
            raise ConfigError("shadow_std_db must be >= 0")
        if self.ul_power_budget < 0 or self.dl_power_budget < 0:
            raise ConfigError("power budgets must be >= 0")
        if self.tau_p + self.tau_u + self.tau_d > self.coherence_block:
            raise ConfigError(
                f"tau_p + tau_u + tau_d = {self.tau_p + self.tau_u + self.tau_d} "
                f"exceeds coherence block {self.coherence_block}"
            )

    # -- resolved coherence-block split -------------------------------------

    @property
    def tau_p(self) -> int:
        if self.pilot_len is not None:
            return self.pilot_len
        return self.pilot_reuse * self.users_per_cell

    @property
    def tau_u(self) -> int:
        if self.ul_data is not None:
            return self.ul_data
        return (self.coherence_block - self.tau_p) // 2

    @property
    def tau_d(self) -> int:
        if self.dl_data is not None:
            return self.dl_data
        return (self.coherence_block - self.tau_p) // 2

    # -- normalized powers ---------------------------------------------------

    @property
    def noise_power_w(self) -> float:
        return 10.0 ** ((self.noise_power_dbm - 30.0) / 10.0)

    @property
    def rho_ul(self) -> float:
        return self.ul_power_budget / self.noise_power_w

    @property
    def rho_dl(self) -> float:
        return self.dl_power_budget / self.noise_power_w

    @property
    def asd_rad(self) -> float:
        return math.radians(self.asd_deg)

    # -- (de)serialization ----------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "NetworkConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"malformed config file {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must contain a JSON object")
        return cls.from_dict(data)

    def replace(self, **changes) -> "NetworkConfig":
        current = {f.name: getattr(self, f.name) for f in fields(self)}
        current.update(changes)
        return NetworkConfig(**current)

    def resolved_dict(self) -> dict:
        """All fields plus the derived quantities, for embedding in outputs."""
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out.update(
            tau_p=self.tau_p,
            tau_u=self.tau_u,
            tau_d=self.tau_d,
            rho_ul=self.rho_ul,
            rho_dl=self.rho_dl,
        )
        return out
