"""Fleet sizing: cluster the UEs, grow the fleet until every demand is met."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import LinkModel
from .fleet import Association, FleetState, equal_split_powers
from .scenario import Scenario

_KMEANS_STREAM = 41


class InfeasibleDeploymentError(Exception):
    """No fleet size up to one UAV per UE satisfies all SNR demands."""


@dataclass
class ClusterResult:
    centroids: np.ndarray  # (n, 2)
    labels: np.ndarray  # (M,) ints in 0..n-1
    iterations: int  # label-changing passes until stable


def kmeans_cluster(points: np.ndarray, n: int, seed: int, max_iter: int = 300) -> ClusterResult:
    """Plain Lloyd iterations seeded from n distinct UE positions.

    Stops when labels stop changing. An emptied cluster is reseeded at the
    point currently farthest from its own centroid, which keeps all n
    clusters non-empty without any randomness beyond the init draw.
    """
    points = np.asarray(points, dtype=float)
    m = points.shape[0]
    if not 1 <= n <= m:
        raise ValueError(f"cluster count {n} not in 1..{m}")
    rng = np.random.default_rng([_KMEANS_STREAM, seed])
    centroids = points[rng.choice(m, size=n, replace=False)].copy()
    labels = np.full(m, -1)
    iterations = 0
    for _ in range(max_iter):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=-1)
        new_labels = d2.argmin(axis=1)
        for c in range(n):
            if not np.any(new_labels == c):
                own = d2[np.arange(m), new_labels]
                far = int(np.argmax(own))
                centroids[c] = points[far]
                new_labels[far] = c
                d2[far] = ((points[far] - centroids) ** 2).sum(axis=-1)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        iterations += 1
        for c in range(n):
            centroids[c] = points[labels == c].mean(axis=0)
    return ClusterResult(centroids=centroids, labels=labels, iterations=iterations)


def initial_fleet(scenario: Scenario, seed: int) -> tuple[FleetState, Association]:
    """Smallest fleet whose k-means deployment covers every UE.

    Each candidate size places UAVs on the cluster centroids, associates each
    UE with its cluster and splits power evenly. The first size where every
    serving link meets its SNR demand wins; the demands use the same frozen
    shadowing the later optimisation stages will see.
    """
    model = LinkModel(scenario, seed)
    points = scenario.ue_positions()
    m = scenario.ue_count
    start = scenario.system.initial_cluster_count
    if start > m:
        raise InfeasibleDeploymentError(
            f"initial_cluster_count {start} exceeds UE count {m}"
        )
    for n in range(start, m + 1):
        clusters = kmeans_cluster(points, n, seed)
        assoc = Association(clusters.labels)
        powers = equal_split_powers(assoc, n, model.max_power_w)
        gains = model.gains(clusters.centroids)
        got = model.serving_snr(gains, powers, assoc)
        if np.all(got >= model.thresholds):
            fleet = FleetState(
                positions=clusters.centroids,
                height=scenario.system.flight_height,
                powers=powers,
            )
            return fleet, assoc
    raise InfeasibleDeploymentError(
        f"no fleet of up to {m} UAVs meets every SNR demand for this scenario"
    )
