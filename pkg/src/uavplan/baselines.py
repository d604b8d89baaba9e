"""Reference optimisers: virtual-force ablations, a genetic algorithm and PSO.

All of them score candidates through LinkModel.total_rate, so rate numbers
are comparable across methods run on the same scenario and seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import LinkModel
from .fleet import Association, FleetState
from .scenario import Scenario
from .vforce import OptimizationResult, TraceRow, run_vf_optimization

_GA_STREAM = 51
_PSO_STREAM = 52


def run_vf_d(
    scenario: Scenario,
    seed: int,
    fleet: FleetState,
    assoc: Association,
    *,
    max_iters: int | None = None,
    observer=None,
) -> OptimizationResult:
    """Force-driven motion only: association and powers stay at their initial values."""
    return run_vf_optimization(
        scenario,
        seed,
        fleet,
        assoc,
        max_iters=max_iters,
        enable_game=False,
        enable_power_update=False,
        observer=observer,
    )


def run_vf_pd(
    scenario: Scenario,
    seed: int,
    fleet: FleetState,
    assoc: Association,
    *,
    max_iters: int | None = None,
    observer=None,
) -> OptimizationResult:
    """Motion plus the speed-coupled power raise, with the association frozen."""
    return run_vf_optimization(
        scenario,
        seed,
        fleet,
        assoc,
        max_iters=max_iters,
        enable_game=False,
        enable_power_update=True,
        observer=observer,
    )


@dataclass(frozen=True)
class GaConfig:
    population: int = 50
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    tournament_size: int = 3
    elite: int = 1
    # Mutation scales; None picks 5% of the area side / per-UAV budget.
    position_sigma: float | None = None
    power_sigma: float | None = None


@dataclass(frozen=True)
class PsoConfig:
    swarm: int = 50
    inertia: float = 0.72
    cognitive: float = 1.49
    social: float = 1.49
    velocity_fraction: float = 0.2  # of each coordinate's range


def repair_candidate(model: LinkModel, positions, powers, assoc_genes):
    """Force a raw candidate into the feasible set shared by GA and PSO.

    Positions clamp to the area, powers clip to [0, budget] with a per-UAV
    proportional scale-down when a row sum exceeds the budget, association
    genes outside 0..N-1 mean unassociated, and any served link whose SNR
    still misses the UE's demand is dropped (power zeroed, UE unassociated).
    Returns (positions, powers, Association, gains) after repair.
    """
    scenario = model.scenario
    n = positions.shape[0]
    pos = positions.copy()
    pos[:, 0] = np.clip(pos[:, 0], 0.0, scenario.area.width)
    pos[:, 1] = np.clip(pos[:, 1], 0.0, scenario.area.height)

    genes = np.asarray(assoc_genes, dtype=int)
    uav_of = np.where((genes >= 0) & (genes < n), genes, -1)
    assoc = Association(uav_of)
    member = assoc.member_matrix(n)

    pw = np.clip(powers, 0.0, model.max_power_w) * member
    sums = pw.sum(axis=1)
    over = sums > model.max_power_w
    if np.any(over):
        pw[over] *= (model.max_power_w / sums[over])[:, None]

    gains = model.gains(pos)
    snr = pw * gains / model.noise_w
    bad = member & (snr < model.thresholds[None, :])
    if np.any(bad):
        drop = bad.any(axis=0)
        uav_of = assoc.uav_of.copy()
        uav_of[drop] = -1
        assoc = Association(uav_of)
        pw = pw * assoc.member_matrix(n)
    return pos, pw, assoc, gains


def _meta_trace_row(model: LinkModel, t: int, pos, pw, assoc, gains) -> TraceRow:
    if pos.shape[0] > 1:
        sep = pos[:, None, :] - pos[None, :, :]
        dist = np.hypot(sep[..., 0], sep[..., 1])
        np.fill_diagonal(dist, np.inf)
        min_sep = float(dist.min())
    else:
        min_sep = float("inf")
    return TraceRow(
        iteration=t,
        total_rate_bps=model.total_rate(gains, pw, assoc),
        coverage=model.coverage(gains, pw, assoc),
        max_speed_mps=0.0,  # population methods have no kinematics
        min_uav_separation_m=min_sep,
        sum_power_w=float(pw.sum()),
    )


def run_ga_pud(
    scenario: Scenario,
    seed: int,
    uav_count: int,
    *,
    config: GaConfig | None = None,
    max_iters: int | None = None,
) -> OptimizationResult:
    """Genetic search over positions, per-link powers and association genes.

    Tournament selection, uniform crossover, Gaussian mutation on the real
    block and uniform resets on the association block, with elitism keeping
    the best individual, so the best fitness never decreases.
    """
    cfg = config or GaConfig()
    if cfg.population < 2:
        raise ValueError("population must be at least 2")
    sy = scenario.system
    generations = sy.max_iterations if max_iters is None else max_iters
    model = LinkModel(scenario, seed)
    n, m = uav_count, scenario.ue_count
    rng = np.random.default_rng([_GA_STREAM, seed])
    pos_sigma = cfg.position_sigma or 0.05 * min(scenario.area.width, scenario.area.height)
    pow_sigma = cfg.power_sigma or 0.05 * model.max_power_w

    pop_pos = rng.uniform(
        [0.0, 0.0], [scenario.area.width, scenario.area.height], size=(cfg.population, n, 2)
    )
    pop_pow = rng.uniform(0.0, model.max_power_w / max(1, m // n), size=(cfg.population, n, m))
    pop_assoc = rng.integers(0, n + 1, size=(cfg.population, m))  # n means unassociated

    def evaluate(j: int):
        pos, pw, assoc, gains = repair_candidate(model, pop_pos[j], pop_pow[j], pop_assoc[j])
        return model.total_rate(gains, pw, assoc), (pos, pw, assoc, gains)

    fitness = np.empty(cfg.population)
    best_fit = -np.inf
    best = None
    for j in range(cfg.population):
        fitness[j], decoded = evaluate(j)
        if fitness[j] > best_fit:
            best_fit, best = float(fitness[j]), decoded
    trace = [_meta_trace_row(model, 0, best[0], best[1], best[2], best[3])]

    for gen in range(1, generations + 1):
        order = np.argsort(fitness)[::-1]
        next_pos = np.empty_like(pop_pos)
        next_pow = np.empty_like(pop_pow)
        next_assoc = np.empty_like(pop_assoc)
        for e in range(min(cfg.elite, cfg.population)):
            src = order[e]
            next_pos[e], next_pow[e], next_assoc[e] = pop_pos[src], pop_pow[src], pop_assoc[src]
        for j in range(min(cfg.elite, cfg.population), cfg.population):
            picks = rng.integers(0, cfg.population, size=cfg.tournament_size)
            a = picks[np.argmax(fitness[picks])]
            picks = rng.integers(0, cfg.population, size=cfg.tournament_size)
            b = picks[np.argmax(fitness[picks])]
            child_pos, child_pow, child_assoc = pop_pos[a].copy(), pop_pow[a].copy(), pop_assoc[a].copy()
            if rng.random() < cfg.crossover_rate:
                mask = rng.random((n, 2)) < 0.5
                child_pos[mask] = pop_pos[b][mask]
                mask = rng.random((n, m)) < 0.5
                child_pow[mask] = pop_pow[b][mask]
                mask = rng.random(m) < 0.5
                child_assoc[mask] = pop_assoc[b][mask]
            mask = rng.random((n, 2)) < cfg.mutation_rate
            child_pos[mask] += rng.normal(0.0, pos_sigma, size=int(mask.sum()))
            mask = rng.random((n, m)) < cfg.mutation_rate
            child_pow[mask] += rng.normal(0.0, pow_sigma, size=int(mask.sum()))
            mask = rng.random(m) < cfg.mutation_rate
            child_assoc[mask] = rng.integers(0, n + 1, size=int(mask.sum()))
            next_pos[j], next_pow[j], next_assoc[j] = child_pos, child_pow, child_assoc
        pop_pos, pop_pow, pop_assoc = next_pos, next_pow, next_assoc
        for j in range(cfg.population):
            fitness[j], decoded = evaluate(j)
            if fitness[j] > best_fit:
                best_fit, best = float(fitness[j]), decoded
        trace.append(_meta_trace_row(model, gen, best[0], best[1], best[2], best[3]))

    pos, pw, assoc, _ = best
    fleet = FleetState(positions=pos, height=sy.flight_height, powers=pw)
    return OptimizationResult(fleet=fleet, assoc=assoc, trace=trace, iterations=generations)


def run_pso_pud(
    scenario: Scenario,
    seed: int,
    uav_count: int,
    *,
    config: PsoConfig | None = None,
    max_iters: int | None = None,
) -> OptimizationResult:
    """Particle swarm over positions and powers, association decoded by distance.

    Each particle is a real vector of UAV positions and per-link powers; a
    UE associates with the nearest UAV and the shared repair then drops any
    link that misses its SNR demand. Personal and global bests use the same
    rate objective as everything else.
    """
    cfg = config or PsoConfig()
    if cfg.swarm < 2:
        raise ValueError("swarm must be at least 2")
    sy = scenario.system
    steps = sy.max_iterations if max_iters is None else max_iters
    model = LinkModel(scenario, seed)
    n, m = uav_count, scenario.ue_count
    rng = np.random.default_rng([_PSO_STREAM, seed])

    lo = np.concatenate([np.zeros(2 * n), np.zeros(n * m)])
    hi = np.concatenate(
        [
            np.tile([scenario.area.width, scenario.area.height], n),
            np.full(n * m, model.max_power_w),
        ]
    )
    span = hi - lo
    vmax = cfg.velocity_fraction * span

    x = rng.uniform(lo, hi, size=(cfg.swarm, lo.size))
    v = rng.uniform(-vmax, vmax, size=(cfg.swarm, lo.size))

    def decode(vec):
        pos = vec[: 2 * n].reshape(n, 2)
        pw = vec[2 * n :].reshape(n, m)
        d2 = ((pos[:, None, :] - model.ue_xy[None, :, :]) ** 2).sum(axis=-1)
        genes = d2.argmin(axis=0)
        return repair_candidate(model, pos, pw, genes)

    def fitness_of(vec):
        pos, pw, assoc, gains = decode(vec)
        return model.total_rate(gains, pw, assoc), (pos, pw, assoc, gains)

    pbest_x = x.copy()
    pbest_f = np.empty(cfg.swarm)
    gbest_f = -np.inf
    gbest_decoded = None
    for j in range(cfg.swarm):
        pbest_f[j], decoded = fitness_of(x[j])
        if pbest_f[j] > gbest_f:
            gbest_f, gbest_decoded = float(pbest_f[j]), decoded
            gbest_x = x[j].copy()
    trace = [_meta_trace_row(model, 0, *gbest_decoded)]

    for t in range(1, steps + 1):
        r1 = rng.random((cfg.swarm, lo.size))
        r2 = rng.random((cfg.swarm, lo.size))
        v = (
            cfg.inertia * v
            + cfg.cognitive * r1 * (pbest_x - x)
            + cfg.social * r2 * (gbest_x[None, :] - x)
        )
        v = np.clip(v, -vmax, vmax)
        x = np.clip(x + v, lo, hi)
        for j in range(cfg.swarm):
            f, decoded = fitness_of(x[j])
            if f > pbest_f[j]:
                pbest_f[j] = f
                pbest_x[j] = x[j]
            if f > gbest_f:
                gbest_f, gbest_decoded = float(f), decoded
                gbest_x = x[j].copy()
        trace.append(_meta_trace_row(model, t, *gbest_decoded))

    pos, pw, assoc, _ = gbest_decoded
    fleet = FleetState(positions=pos, height=sy.flight_height, powers=pw)
    return OptimizationResult(fleet=fleet, assoc=assoc, trace=trace, iterations=steps)
