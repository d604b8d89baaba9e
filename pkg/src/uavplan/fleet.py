"""Shared mutable state: UAV positions and powers, and the UE-to-UAV association."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNASSOCIATED = -1


@dataclass(eq=False)
class FleetState:
    """Positions are (N, 2) in metres, powers (N, M) in watts.

    powers[i, k] is the transmit power UAV i spends on UE k. Entries for
    links outside the current association are kept at zero.
    """

    positions: np.ndarray
    height: float
    powers: np.ndarray

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.powers = np.asarray(self.powers, dtype=float)
        if self.positions.ndim != 2 or self.positions.shape[1] != 2:
            raise ValueError("positions must be (N, 2)")
        if self.powers.ndim != 2 or self.powers.shape[0] != self.positions.shape[0]:
            raise ValueError("powers must be (N, M)")

    @property
    def uav_count(self) -> int:
        return self.positions.shape[0]

    def copy(self) -> "FleetState":
        return FleetState(self.positions.copy(), self.height, self.powers.copy())


@dataclass(eq=False)
class Association:
    """uav_of[k] is the serving UAV index for UE k, UNASSOCIATED when none."""

    uav_of: np.ndarray

    def __post_init__(self):
        self.uav_of = np.asarray(self.uav_of, dtype=int)
        if self.uav_of.ndim != 1:
            raise ValueError("uav_of must be 1-D")

    @property
    def ue_count(self) -> int:
        return self.uav_of.shape[0]

    def copy(self) -> "Association":
        return Association(self.uav_of.copy())

    def member_matrix(self, uav_count: int) -> np.ndarray:
        """(N, M) bool, True where UAV i serves UE k."""
        served = self.uav_of >= 0
        out = np.zeros((uav_count, self.ue_count), dtype=bool)
        out[self.uav_of[served], np.nonzero(served)[0]] = True
        return out

    def loads(self, uav_count: int) -> np.ndarray:
        """(N,) coalition sizes."""
        return np.bincount(self.uav_of[self.uav_of >= 0], minlength=uav_count)

    def members(self, uav: int) -> np.ndarray:
        return np.nonzero(self.uav_of == uav)[0]

    def unassociated(self) -> np.ndarray:
        return np.nonzero(self.uav_of < 0)[0]


def equal_split_powers(assoc: Association, uav_count: int, max_power_w: float) -> np.ndarray:
    """(N, M) watts: each UAV's full budget divided evenly over its coalition."""
    member = assoc.member_matrix(uav_count)
    loads = member.sum(axis=1)
    share = np.zeros(uav_count)
    busy = loads > 0
    share[busy] = max_power_w / loads[busy]
    return member * share[:, None]
