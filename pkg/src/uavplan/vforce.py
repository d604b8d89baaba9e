"""Virtual-force refinement of UAV positions and per-link powers.

Served UEs with headroom above the attraction gate pull their UAV, while
close UAVs, obstacle discs and the area edges push. The aggregate force turns
into a bounded-speed velocity through an arctan squash, positions step by one
control period, and per-link powers then grow with the commanded speed under
a proportional pull-back to the per-UAV budget. A UAV that has spent its whole
budget stops reacting to forces until the split changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import LinkModel, db_to_linear
from .coalition import run_coalition_game
from .fleet import Association, FleetState, equal_split_powers
from .scenario import Scenario

# Relative slack on the budget gate. The proportional projection lands on the
# budget only up to rounding, and a gate at exactly P would otherwise freeze
# the fleet on the first float crumb above it.
_BUDGET_RTOL = 1e-9


@dataclass
class TraceRow:
    iteration: int
    total_rate_bps: float
    coverage: float
    max_speed_mps: float
    min_uav_separation_m: float
    sum_power_w: float


@dataclass
class OptimizationResult:
    fleet: FleetState
    assoc: Association
    trace: list[TraceRow]
    iterations: int
    converged: bool = False
    transfers: int = 0  # association moves applied across all rounds


class VirtualForceField:
    """Force evaluation for one scenario under one frozen channel draw."""

    def __init__(self, model: LinkModel):
        self.model = model
        scenario = model.scenario
        sy = scenario.system
        self.area = scenario.area
        self.height = sy.flight_height
        self.attraction = sy.attraction_factor
        self.repulsion = sy.repulsion_factor
        self.uav_safety = sy.uav_safety_distance
        self.obstacle_safety = sy.obstacle_safety_distance
        self.obstacle_xy = scenario.obstacle_centers()
        self.obstacle_r = scenario.obstacle_radii()
        if sy.attraction_snr_threshold is None:
            self.gate = model.thresholds.copy()
        else:
            self.gate = np.full(model.ue_count, db_to_linear(sy.attraction_snr_threshold))

    def within_budget(self, powers: np.ndarray, uav: int) -> bool:
        return float(powers[uav].sum()) <= self.model.max_power_w * (1.0 + _BUDGET_RTOL)

    def attractive(self, uav: int, ue: int, positions, powers, gains) -> np.ndarray:
        """Pull of one served UE, zero when gated out.

        Gates: link SNR must exceed the attraction gate and the UAV must have
        budget headroom. Magnitude scales the SNR surplus over the UE's demand
        by the link power over the squared slant range; the direction is the
        horizontal unit vector towards the UE.
        """
        p = float(powers[uav, ue])
        gamma = p * float(gains[uav, ue]) / self.model.noise_w
        if gamma <= self.gate[ue] or not self.within_budget(powers, uav):
            return np.zeros(2)
        delta = self.model.ue_xy[ue] - np.asarray(positions[uav], dtype=float)
        horizontal = float(np.hypot(delta[0], delta[1]))
        if horizontal == 0.0:
            return np.zeros(2)
        d2 = horizontal**2 + self.height**2
        magnitude = self.attraction * p * (gamma - self.model.thresholds[ue]) / d2
        return magnitude * delta / horizontal

    def uav_repulsion(self, uav: int, other: int, positions, powers) -> np.ndarray:
        """Push away from another UAV inside the safety distance."""
        if uav == other:
            raise ValueError("a UAV does not repel itself")
        if not self.within_budget(powers, uav):
            return np.zeros(2)
        delta = np.asarray(positions[uav], dtype=float) - np.asarray(positions[other], dtype=float)
        d = float(np.hypot(delta[0], delta[1]))
        if d >= self.uav_safety or d == 0.0:
            return np.zeros(2)
        return self.repulsion * (self.uav_safety - d) * delta / d

    def obstacle_repulsion(self, uav: int, obstacle: int, positions, powers) -> np.ndarray:
        """Push away from a disc once the clearance drops under the margin."""
        if not self.within_budget(powers, uav):
            return np.zeros(2)
        delta = np.asarray(positions[uav], dtype=float) - self.obstacle_xy[obstacle]
        to_center = float(np.hypot(delta[0], delta[1]))
        clearance = max(0.0, to_center - self.obstacle_r[obstacle])
        if clearance >= self.obstacle_safety or to_center == 0.0:
            return np.zeros(2)
        return self.repulsion * (self.obstacle_safety - clearance) * delta / to_center

    def boundary_repulsion(self, uav: int, positions, powers) -> np.ndarray:
        """Inward push from each area edge closer than the safety margin."""
        if not self.within_budget(powers, uav):
            return np.zeros(2)
        x, y = (float(v) for v in positions[uav])
        margin = self.obstacle_safety
        out = np.zeros(2)
        if x < margin:
            out[0] += self.repulsion * (margin - max(x, 0.0))
        if self.area.width - x < margin:
            out[0] -= self.repulsion * (margin - max(self.area.width - x, 0.0))
        if y < margin:
            out[1] += self.repulsion * (margin - max(y, 0.0))
        if self.area.height - y < margin:
            out[1] -= self.repulsion * (margin - max(self.area.height - y, 0.0))
        return out

    def aggregate(self, uav: int, positions, powers, assoc: Association, gains) -> np.ndarray:
        """Sum of every term acting on one UAV."""
        total = np.zeros(2)
        for ue in assoc.members(uav):
            total += self.attractive(uav, int(ue), positions, powers, gains)
        for other in range(positions.shape[0]):
            if other != uav:
                total += self.uav_repulsion(uav, other, positions, powers)
        for q in range(len(self.obstacle_r)):
            total += self.obstacle_repulsion(uav, q, positions, powers)
        total += self.boundary_repulsion(uav, positions, powers)
        return total

    def all_forces(self, positions, powers, assoc: Association, gains) -> np.ndarray:
        """(N, 2) aggregate forces, vectorised over the fleet."""
        n = positions.shape[0]
        budget_ok = powers.sum(axis=1) <= self.model.max_power_w * (1.0 + _BUDGET_RTOL)
        member = assoc.member_matrix(n)

        delta = self.model.ue_xy[None, :, :] - positions[:, None, :]  # (N, M, 2)
        horizontal = np.hypot(delta[..., 0], delta[..., 1])
        gamma = powers * gains / self.model.noise_w
        active = member & (gamma > self.gate[None, :]) & budget_ok[:, None] & (horizontal > 0.0)
        d2 = horizontal**2 + self.height**2
        mag = np.where(
            active,
            self.attraction * powers * (gamma - self.model.thresholds[None, :]) / d2,
            0.0,
        )
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(horizontal[..., None] > 0.0, delta / horizontal[..., None], 0.0)
        forces = (mag[..., None] * unit).sum(axis=1)

        sep = positions[:, None, :] - positions[None, :, :]  # (N, N, 2)
        dist = np.hypot(sep[..., 0], sep[..., 1])
        np.fill_diagonal(dist, np.inf)
        close = (dist < self.uav_safety) & (dist > 0.0) & budget_ok[:, None]
        rmag = np.where(close, self.repulsion * (self.uav_safety - dist), 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            runit = np.where(np.isfinite(dist[..., None]) & (dist[..., None] > 0.0), sep / dist[..., None], 0.0)
        forces += (rmag[..., None] * runit).sum(axis=1)

        if len(self.obstacle_r):
            osep = positions[:, None, :] - self.obstacle_xy[None, :, :]  # (N, Q, 2)
            to_center = np.hypot(osep[..., 0], osep[..., 1])
            clearance = np.maximum(0.0, to_center - self.obstacle_r[None, :])
            oclose = (clearance < self.obstacle_safety) & (to_center > 0.0) & budget_ok[:, None]
            omag = np.where(oclose, self.repulsion * (self.obstacle_safety - clearance), 0.0)
            with np.errstate(invalid="ignore", divide="ignore"):
                ounit = np.where(to_center[..., None] > 0.0, osep / to_center[..., None], 0.0)
            forces += (omag[..., None] * ounit).sum(axis=1)

        for i in range(n):
            if budget_ok[i]:
                forces[i] += self.boundary_repulsion(i, positions, np.zeros_like(powers))
        return forces


def velocity_from_force(forces: np.ndarray, system) -> np.ndarray:
    """Map forces to velocities below max_velocity via an arctan squash.

    The impulse F * dt / m sets the direction; its magnitude goes through
    arctan(.) * 2 * vmax / pi, so speed approaches but never reaches vmax.
    """
    arr = np.asarray(forces, dtype=float)
    single = arr.ndim == 1
    forces2 = np.atleast_2d(arr)
    dv = forces2 * system.control_period / system.virtual_mass
    mag = np.hypot(dv[:, 0], dv[:, 1])
    speed = np.arctan(mag) * 2.0 * system.max_velocity / np.pi
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(mag[:, None] > 0.0, dv / mag[:, None], 0.0)
    out = unit * speed[:, None]
    return out[0] if single else out


def step_positions(positions: np.ndarray, velocities: np.ndarray, system, area) -> np.ndarray:
    """Advance one control period and clamp into the service area."""
    out = positions + velocities * system.control_period
    out[:, 0] = np.clip(out[:, 0], 0.0, area.width)
    out[:, 1] = np.clip(out[:, 1], 0.0, area.height)
    return out


def updated_powers(
    powers: np.ndarray,
    assoc: Association,
    speeds: np.ndarray,
    system,
    max_power_w: float,
) -> np.ndarray:
    """Raise served-link powers with speed, then project back onto the budget.

    Every served link of UAV i gains power_step * speed_i watts. A UAV whose
    links then sum above its budget has them scaled down proportionally so the
    sum lands exactly on the budget; under-budget UAVs keep the raise as is.
    """
    n = powers.shape[0]
    member = assoc.member_matrix(n)
    out = powers + member * (system.power_step * np.asarray(speeds, dtype=float))[:, None]
    sums = out.sum(axis=1)
    over = sums > max_power_w
    if np.any(over):
        out[over] *= (max_power_w / sums[over])[:, None]
    return out


def run_vf_optimization(
    scenario: Scenario,
    seed: int,
    fleet: FleetState,
    assoc: Association,
    *,
    max_iters: int | None = None,
    enable_game: bool = True,
    enable_power_update: bool = True,
    observer=None,
) -> OptimizationResult:
    """Alternate association rounds, a force step and a power step.

    Per iteration: replay the coalition game on current gains (optional),
    re-split power evenly over the new coalitions, move every UAV down its
    force, then grow powers using the speed the force field commands at the
    new positions (optional). Stops early once the fastest UAV has been
    slower than the convergence threshold for five straight iterations.

    observer, when given, is called as observer(iteration, positions, powers,
    assoc, velocities) after each iteration; tests use it to audit invariants.
    """
    sy = scenario.system
    total_iters = sy.max_iterations if max_iters is None else max_iters
    model = LinkModel(scenario, seed)
    fieldcalc = VirtualForceField(model)
    positions = fleet.positions.copy()
    powers = fleet.powers.copy()
    assoc = assoc.copy()
    gains = model.gains(positions)
    transfers = 0

    def row(t: int, speeds: np.ndarray) -> TraceRow:
        if positions.shape[0] > 1:
            sep = positions[:, None, :] - positions[None, :, :]
            dist = np.hypot(sep[..., 0], sep[..., 1])
            np.fill_diagonal(dist, np.inf)
            min_sep = float(dist.min())
        else:
            min_sep = float("inf")
        return TraceRow(
            iteration=t,
            total_rate_bps=model.total_rate(gains, powers, assoc),
            coverage=model.coverage(gains, powers, assoc),
            max_speed_mps=float(np.max(speeds)) if speeds.size else 0.0,
            min_uav_separation_m=min_sep,
            sum_power_w=float(powers.sum()),
        )

    trace = [row(0, np.zeros(positions.shape[0]))]
    still = 0
    converged = False
    iterations = 0
    for t in range(1, total_iters + 1):
        if enable_game:
            game = run_coalition_game(model, gains, assoc)
            assoc = game.assoc
            transfers += len(game.transfers)
            powers = equal_split_powers(assoc, positions.shape[0], model.max_power_w)
        forces = fieldcalc.all_forces(positions, powers, assoc, gains)
        velocities = velocity_from_force(forces, sy)
        speeds = np.hypot(velocities[:, 0], velocities[:, 1])
        positions = step_positions(positions, velocities, sy, scenario.area)
        gains = model.gains(positions)
        if enable_power_update:
            # The power raise follows the speed the field commands at the new
            # positions with the pre-update powers.
            after_v = velocity_from_force(fieldcalc.all_forces(positions, powers, assoc, gains), sy)
            after_speeds = np.hypot(after_v[:, 0], after_v[:, 1])
            powers = updated_powers(powers, assoc, after_speeds, sy, model.max_power_w)
        iterations = t
        trace.append(row(t, speeds))
        if observer is not None:
            observer(t, positions, powers, assoc, velocities)
        if speeds.size == 0 or float(np.max(speeds)) < sy.convergence_threshold:
            still += 1
            if still >= 5:
                converged = True
                break
        else:
            still = 0
    final = FleetState(positions=positions, height=fleet.height, powers=powers)
    return OptimizationResult(
        fleet=final,
        assoc=assoc,
        trace=trace,
        iterations=iterations,
        converged=converged,
        transfers=transfers,
    )
