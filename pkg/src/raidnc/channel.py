"""Downlink channel: per-user capacities per transmission and erasure models.

Gains follow log-distance path loss with log-normal shadowing and optional
Rayleigh block fading, redrawn independently for every transmission. The
band can be split into a few independently faded sub-bands whose capacities
add up, a coarse stand-in for a multipath channel over a wide band; with a
single sub-band a deep fade drives the capacity arbitrarily close to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FADING_KINDS = ("rayleigh", "none")
ERASURE_KINDS = ("perfect", "offset")


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class ChannelParams:
    tx_power_dbm_per_hz: float = -42.60
    noise_dbm_per_hz: float = -168.60
    sinr_gap_db: float = 0.0
    bandwidth_hz: float = 10e6
    cell_diameter_m: float = 500.0
    shadowing_std_db: float = 0.0
    pathloss_exponent: float = 3.5
    reference_loss_db: float = 38.5  # loss at reference_distance_m
    reference_distance_m: float = 1.0
    min_distance_m: float = 10.0
    fading_kind: str = "rayleigh"
    fading_subbands: int = 2  # independently faded sub-bands sharing the bandwidth

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth_hz must be positive")
        if not self.cell_diameter_m > 0:
            raise ValueError("cell_diameter_m must be positive")
        if self.shadowing_std_db < 0:
            raise ValueError("shadowing_std_db must be non-negative")
        if self.fading_kind not in FADING_KINDS:
            raise ValueError(f"fading_kind must be one of {FADING_KINDS}, got {self.fading_kind!r}")
        if self.fading_subbands < 1:
            raise ValueError("fading_subbands must be at least 1")
        if not 0 < self.min_distance_m <= self.cell_diameter_m / 2:
            raise ValueError("min_distance_m must lie in (0, cell radius]")

    @property
    def cell_radius_m(self) -> float:
        return self.cell_diameter_m / 2.0

    @property
    def gap_linear(self) -> float:
        return db_to_linear(self.sinr_gap_db)

    def mean_snr(self, distance_m) -> np.ndarray:
        """Linear SNR from path loss alone (no shadowing, no fading)."""
        d = np.maximum(np.asarray(distance_m, dtype=float), self.min_distance_m)
        loss_db = self.reference_loss_db + 10.0 * self.pathloss_exponent * np.log10(d / self.reference_distance_m)
        # both densities are per Hz, so bandwidth cancels in the ratio
        return 10.0 ** ((self.tx_power_dbm_per_hz - self.noise_dbm_per_hz - loss_db) / 10.0)


def capacity(snr: float, gap_linear: float = 1.0, bandwidth_hz: float = 1.0) -> float:
    """Achievable rate in bits/s: ``B log2(1 + snr / gap)``."""
    if snr < 0:
        raise ValueError(f"snr must be non-negative, got {snr}")
    if not gap_linear > 0:
        raise ValueError("gap must be positive")
    return bandwidth_hz * math.log2(1.0 + snr / gap_linear)


def place_users(params: ChannelParams, num_users: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform positions in the cell disc, shape (U, 2), base station at the origin."""
    if num_users < 1:
        raise ValueError("need at least one user")
    r_min, r_max = params.min_distance_m, params.cell_radius_m
    # area-uniform radius on the annulus [r_min, r_max]
    radius = np.sqrt(rng.uniform(r_min**2, r_max**2, size=num_users))
    angle = rng.uniform(0.0, 2.0 * math.pi, size=num_users)
    return np.column_stack((radius * np.cos(angle), radius * np.sin(angle)))


def sample_snapshot(params: ChannelParams, positions, rng: np.random.Generator) -> np.ndarray:
    """Capacities (bits/s) of every user for one transmission.

    Always consumes the same number of variates from ``rng`` per call, so
    snapshot sequences line up across configurations sharing a seed.
    """
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    n = positions.shape[0]
    if n == 0 or positions.size == 0:
        raise ValueError("empty user list")
    distance = np.hypot(positions[:, 0], positions[:, 1])
    if np.any(distance > params.cell_radius_m * (1 + 1e-9)):
        raise ValueError("user positions must lie inside the cell")
    snr = params.mean_snr(distance)
    shadow_db = rng.normal(0.0, 1.0, size=n) * params.shadowing_std_db
    fade = rng.exponential(1.0, size=(n, params.fading_subbands))
    snr = snr * 10.0 ** (shadow_db / 10.0)
    if params.fading_kind == "rayleigh":
        # each sub-band carries bandwidth / L under its own Rayleigh power gain
        per_band = np.log2(1.0 + snr[:, None] * fade / params.gap_linear)
        rates = params.bandwidth_hz * per_band.mean(axis=1)
    else:
        rates = params.bandwidth_hz * np.log2(1.0 + snr / params.gap_linear)
    # a deep fade must still leave a finite, positive rate
    return np.maximum(rates, np.finfo(float).tiny)


@dataclass(frozen=True)
class ErasureModel:
    """``perfect``: lost iff rate > capacity. ``offset``: additionally lost with
    probability ``eps0`` when the rate fits."""

    kind: str = "offset"
    eps0: float = 0.0

    def __post_init__(self):
        if self.kind not in ERASURE_KINDS:
            raise ValueError(f"erasure kind must be one of {ERASURE_KINDS}, got {self.kind!r}")
        if not 0.0 <= self.eps0 < 1.0:
            raise ValueError("eps0 must lie in [0, 1)")

    @property
    def is_perfect(self) -> bool:
        return self.kind == "perfect" or self.eps0 == 0.0

    def probability(self, rate: float, capacity: float) -> float:
        return erasure_probability(self, rate, capacity)


def erasure_probability(model: ErasureModel, rate: float, capacity: float) -> float:
    if rate > capacity:
        return 1.0
    return 0.0 if model.kind == "perfect" else model.eps0
