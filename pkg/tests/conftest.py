"""Shared builders for the test suite.

Most tests want either a hand-placed micro instance (exact geometry, no
randomness) or a seeded clustered instance that the default radio parameters
can actually serve. The -40 dB demand used here leaves enough margin that
blob-edge UEs survive shadowing draws; the default -5 dB demand is not
attainable under the default channel (see test_acceptance for the analysis).
"""

from __future__ import annotations

import dataclasses

import numpy as np

from uavplan.scenario import (
    AreaSpec,
    Obstacle,
    Scenario,
    UePoint,
    default_channel_params,
    default_system_params,
    generate_clustered_scenario,
)

EASY_DEMAND_DB = -40.0


def make_scenario(
    ue_points,
    *,
    area=(10_000.0, 10_000.0),
    obstacles=(),
    snr_threshold: float = EASY_DEMAND_DB,
    shadowing_stddev: float | None = None,
    **system_overrides,
) -> Scenario:
    """Hand-placed instance. ue_points: iterable of (x, y) or (x, y, threshold)."""
    channel = default_channel_params()
    if shadowing_stddev is not None:
        channel = dataclasses.replace(channel, shadowing_stddev=shadowing_stddev)
    system = default_system_params()
    if system_overrides:
        system = dataclasses.replace(system, **system_overrides)
    ues = []
    for k, point in enumerate(ue_points):
        if len(point) == 3:
            x, y, th = point
        else:
            (x, y), th = point, snr_threshold
        ues.append(UePoint(id=k, x=float(x), y=float(y), snr_threshold=float(th)))
    obs = tuple(
        Obstacle(id=q, x=float(x), y=float(y), radius=float(r))
        for q, (x, y, r) in enumerate(obstacles)
    )
    return Scenario(
        area=AreaSpec(width=float(area[0]), height=float(area[1])),
        channel=channel,
        system=system,
        ues=tuple(ues),
        obstacles=obs,
    )


def clustered(seed: int, ue_count: int, *, obstacle_count: int = 2, **system_overrides) -> Scenario:
    """Feasible clustered instance: 6 tight blobs, relaxed demand."""
    system = default_system_params()
    if system_overrides:
        system = dataclasses.replace(system, **system_overrides)
    return generate_clustered_scenario(
        seed,
        ue_count,
        cluster_count=min(6, ue_count),
        cluster_sigma=80.0,
        obstacle_count=obstacle_count,
        snr_threshold=EASY_DEMAND_DB,
        system=system,
    )


def pairwise_min_distance(positions: np.ndarray) -> float:
    if positions.shape[0] < 2:
        return float("inf")
    delta = positions[:, None, :] - positions[None, :, :]
    dist = np.hypot(delta[..., 0], delta[..., 1])
    np.fill_diagonal(dist, np.inf)
    return float(dist.min())
