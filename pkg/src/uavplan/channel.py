"""Air-to-ground link budget over forest and the rate objective built on it.

Loss in dB is free-space at the actual slant range, plus a log-distance term
anchored at the reference distance, plus log-normal shadowing, plus an
empirical canopy excess A * f^C * d^D * (theta + E)^G evaluated with f in MHz,
d in metres and the elevation angle theta in degrees. Rates assume FDMA inside
each coalition: the serving UAV's bandwidth is split evenly over its UEs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fleet import Association, FleetState
from .scenario import Scenario

# Sub-stream tags for the per-run frozen randomness.
_SHADOW_STREAM = 71
_FADING_STREAM = 72


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


def dbm_to_watts(value_dbm: float) -> float:
    return 10.0 ** (value_dbm / 10.0) / 1000.0


def watts_to_dbm(value_w: float) -> float:
    return 10.0 * math.log10(value_w * 1000.0)


@dataclass(frozen=True)
class LinkGeometry:
    distance: float  # m, 3-D slant range
    elevation: float  # deg, 90 directly overhead


@dataclass(frozen=True)
class LinkBudget:
    """Loss decomposition in dB. total is the sum of the four parts."""

    free_space: float
    distance: float
    shadowing: float
    excess: float

    @property
    def total(self) -> float:
        return self.free_space + self.distance + self.shadowing + self.excess


def link_geometry(uav_xy, height: float, ue_xy) -> LinkGeometry:
    """Slant range and elevation angle from a UAV at altitude height to a ground UE."""
    dx = float(uav_xy[0]) - float(ue_xy[0])
    dy = float(uav_xy[1]) - float(ue_xy[1])
    horizontal = math.hypot(dx, dy)
    distance = math.hypot(horizontal, height)
    elevation = math.degrees(math.atan2(height, horizontal))
    return LinkGeometry(distance=distance, elevation=elevation)


def fspl_db(frequency: float, distance: float, c: float = 299792458.0) -> float:
    """Free-space loss 20 log10(4 pi f d / c) at the actual distance."""
    if frequency <= 0 or distance <= 0:
        raise ValueError("frequency and distance must be positive")
    return 20.0 * math.log10(4.0 * math.pi * frequency * distance / c)


def slant_loss_db(frequency: float, distance: float, elevation: float, params) -> float:
    """Canopy excess A * f^C * d^D * (theta + E)^G, result in dB.

    frequency comes in Hz and is converted to MHz here; the fit was made in
    those units and silently feeding Hz would inflate the term by f^C.
    """
    f_mhz = frequency / 1e6
    base = elevation + params.E
    if base <= 0:
        raise ValueError("elevation + E must be positive for the excess-loss fit")
    return params.A * f_mhz**params.C * distance**params.D * base**params.G


def path_loss_db(geometry: LinkGeometry, params, shadowing_db: float = 0.0) -> LinkBudget:
    """Total loss decomposition for one link. Distances below d0 are out of model."""
    d = geometry.distance
    d0 = params.reference_distance
    if d < d0:
        raise ValueError(f"link distance {d} m below reference distance {d0} m")
    return LinkBudget(
        free_space=fspl_db(params.carrier_frequency, d, params.speed_of_light),
        distance=10.0 * params.path_loss_exponent * math.log10(d / d0),
        shadowing=shadowing_db,
        excess=slant_loss_db(params.carrier_frequency, d, geometry.elevation, params),
    )


def link_gain(total_loss_db: float, small_scale: float = 1.0) -> float:
    """|h|^2 as a linear power gain, optional small-scale factor |g|^2."""
    return 10.0 ** (-total_loss_db / 10.0) * small_scale


def snr(power_w: float, gain: float, noise_w: float) -> float:
    if noise_w <= 0:
        raise ValueError("noise power must be positive")
    if power_w < 0 or gain < 0:
        raise ValueError("power and gain must be non-negative")
    return power_w * gain / noise_w


def link_rate(bandwidth: float, snr_linear: float) -> float:
    """Shannon rate b * log2(1 + snr) in bit/s."""
    if bandwidth < 0:
        raise ValueError("bandwidth must be non-negative")
    return bandwidth * math.log2(1.0 + snr_linear)


class LinkModel:
    """Scenario bound to one frozen randomness draw, with vector evaluation.

    The shadowing value of the link (UAV i, UE k) is drawn once per run seed
    from its own stream, so it never depends on fleet size, iteration count or
    call order. Small-scale gains work the same way and default to 1.
    """

    def __init__(self, scenario: Scenario, seed: int):
        self.scenario = scenario
        self.seed = int(seed)
        ch = scenario.channel
        sy = scenario.system
        if sy.flight_height < ch.reference_distance:
            raise ValueError("flight height below channel reference distance")
        self.noise_w = dbm_to_watts(ch.noise_power)
        self.max_power_w = dbm_to_watts(sy.uav_max_power)
        self.bandwidth = sy.uav_bandwidth
        self.height = sy.flight_height
        self.ue_xy = scenario.ue_positions()
        self.ue_count = scenario.ue_count
        self.thresholds_db = scenario.ue_thresholds_db()
        self.thresholds = 10.0 ** (self.thresholds_db / 10.0)
        self._shadow_rows: list[np.ndarray] = []
        self._fading_rows: list[np.ndarray] = []

    def _row(self, cache: list, stream: int, uav: int) -> np.ndarray:
        while len(cache) <= uav:
            i = len(cache)
            rng = np.random.default_rng([stream, self.seed, i])
            if stream == _SHADOW_STREAM:
                row = rng.normal(0.0, self.scenario.channel.shadowing_stddev, self.ue_count)
            else:
                # Unit-mean Rayleigh power, i.e. |g|^2 ~ Exp(1).
                row = rng.exponential(1.0, self.ue_count)
            cache.append(row)
        return cache[uav]

    def shadowing(self, uav_count: int) -> np.ndarray:
        """(N, M) dB, frozen per (seed, uav, ue)."""
        return np.stack([self._row(self._shadow_rows, _SHADOW_STREAM, i) for i in range(uav_count)])

    def small_scale(self, uav_count: int) -> np.ndarray:
        if self.scenario.channel.small_scale_fading == "none":
            return np.ones((uav_count, self.ue_count))
        return np.stack([self._row(self._fading_rows, _FADING_STREAM, i) for i in range(uav_count)])

    def gains(self, positions: np.ndarray) -> np.ndarray:
        """(N, M) linear power gains |h|^2 for UAVs at the given positions."""
        positions = np.asarray(positions, dtype=float)
        ch = self.scenario.channel
        delta = positions[:, None, :] - self.ue_xy[None, :, :]
        horizontal = np.hypot(delta[..., 0], delta[..., 1])
        d = np.hypot(horizontal, self.height)
        theta = np.degrees(np.arctan2(self.height, horizontal))
        f_mhz = ch.carrier_frequency / 1e6
        loss = (
            20.0 * np.log10(4.0 * math.pi * ch.carrier_frequency * d / ch.speed_of_light)
            + 10.0 * ch.path_loss_exponent * np.log10(d / ch.reference_distance)
            + self.shadowing(positions.shape[0])
            + ch.A * f_mhz**ch.C * d**ch.D * (theta + ch.E) ** ch.G
        )
        return 10.0 ** (-loss / 10.0) * self.small_scale(positions.shape[0])

    def pair_snr(self, gains: np.ndarray, powers: np.ndarray) -> np.ndarray:
        return powers * gains / self.noise_w

    def serving_snr(self, gains: np.ndarray, powers: np.ndarray, assoc: Association) -> np.ndarray:
        """(M,) SNR on each UE's serving link, zero where unassociated."""
        served = assoc.uav_of >= 0
        out = np.zeros(assoc.ue_count)
        ks = np.nonzero(served)[0]
        iv = assoc.uav_of[ks]
        out[ks] = powers[iv, ks] * gains[iv, ks] / self.noise_w
        return out

    def total_rate(self, gains: np.ndarray, powers: np.ndarray, assoc: Association) -> float:
        """Network sum rate in bit/s with the per-coalition bandwidth split."""
        n = gains.shape[0]
        loads = assoc.loads(n)
        served = assoc.uav_of >= 0
        if not np.any(served):
            return 0.0
        ks = np.nonzero(served)[0]
        iv = assoc.uav_of[ks]
        gamma = powers[iv, ks] * gains[iv, ks] / self.noise_w
        b = self.bandwidth / loads[iv]
        return float(np.sum(b * np.log2(1.0 + gamma)))

    def coverage(self, gains: np.ndarray, powers: np.ndarray, assoc: Association) -> float:
        """Fraction of UEs whose serving-link SNR meets their demand."""
        got = self.serving_snr(gains, powers, assoc)
        return float(np.mean(got >= self.thresholds))


def total_rate(scenario: Scenario, fleet: FleetState, assoc: Association, seed: int) -> float:
    """One-shot evaluation; heavy loops should hold a LinkModel instead."""
    model = LinkModel(scenario, seed)
    return model.total_rate(model.gains(fleet.positions), fleet.powers, assoc)
