"""Transfer-based coalition game deciding which UAV serves which UE.

Coalitions start from a full-power SNR argmax. Rounds then move single UEs
between coalitions whenever the move raises the network sum rate, both sides
re-splitting bandwidth and power evenly after the move. The game stops when a
round improves the total by less than the convergence threshold or proposes
nothing, which is a Nash-stable partition for single-UE deviations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import LinkModel
from .fleet import Association, equal_split_powers

# Defensive bound; the strict-improvement guard makes cycles impossible and
# real instances settle within a handful of rounds.
_MAX_ROUNDS = 10_000


@dataclass(frozen=True)
class Transfer:
    ue: int
    source: int
    destination: int
    gain_bps: float  # network rate improvement realised by this move


@dataclass
class GameResult:
    assoc: Association
    rounds: int
    transfers: list[Transfer] = field(default_factory=list)
    total_rate_bps: float = 0.0


def init_partition(model: LinkModel, gains: np.ndarray) -> Association:
    """Associate every UE with its best full-power SNR, demands permitting.

    Ties go to the lowest UAV index. A UE whose best link still misses its
    demand threshold stays unassociated; Association.unassociated() lists them.
    """
    full = model.max_power_w * gains / model.noise_w
    best = full.argmax(axis=0)
    ks = np.arange(model.ue_count)
    uav_of = np.where(full[best, ks] >= model.thresholds, best, -1)
    return Association(uav_of)


def transfer_utility(model: LinkModel, gains: np.ndarray, assoc: Association, ue: int, to_uav: int) -> float:
    """Network rate change if `ue` leaves its coalition and joins `to_uav`.

    Both affected coalitions re-split bandwidth and power evenly, every other
    coalition is untouched. Computed through the canonical rate path so the
    sign of the result is exactly the sign the optimiser acts on.
    """
    n = gains.shape[0]
    src = int(assoc.uav_of[ue])
    if src < 0:
        raise ValueError(f"UE {ue} is unassociated")
    if not 0 <= to_uav < n:
        raise ValueError(f"destination UAV {to_uav} out of range")
    if to_uav == src:
        raise ValueError(f"UE {ue} already associated with UAV {to_uav}")
    before = model.total_rate(gains, equal_split_powers(assoc, n, model.max_power_w), assoc)
    moved = assoc.copy()
    moved.uav_of[ue] = to_uav
    after = model.total_rate(gains, equal_split_powers(moved, n, model.max_power_w), moved)
    return after - before


def _utility_matrix(model: LinkModel, gains: np.ndarray, assoc: Association):
    """U[i, k]: rate change for moving served UE k to UAV i, -inf when barred.

    Barred means k is unassociated, i already serves k, or the enlarged
    destination coalition would push any member (k included) below its SNR
    demand. Closed-form per-coalition sums keep this O(N * M).
    """
    n, m_ues = gains.shape
    member = assoc.member_matrix(n)
    loads = member.sum(axis=1)
    p = model.max_power_w
    noise = model.noise_w
    b = model.bandwidth
    g = gains / noise

    safe = np.maximum(loads, 1)
    t_cur = np.log2(1.0 + (p / safe)[:, None] * g)
    r_cur = np.where(loads > 0, (b / safe) * (member * t_cur).sum(axis=1), 0.0)

    t_join = np.log2(1.0 + (p / (loads + 1))[:, None] * g)
    r_dst = (b / (loads + 1))[:, None] * ((member * t_join).sum(axis=1)[:, None] + t_join)

    safe_less = np.maximum(loads - 1, 1)
    t_leave = np.log2(1.0 + (p / safe_less)[:, None] * g)
    sum_leave = (member * t_leave).sum(axis=1)

    served = assoc.uav_of >= 0
    ks = np.nonzero(served)[0]
    src = assoc.uav_of[ks]
    r_src = np.zeros(m_ues)
    shrinks = loads[src] > 1
    r_src[ks[shrinks]] = (b / safe_less[src[shrinks]]) * (
        sum_leave[src[shrinks]] - t_leave[src[shrinks], ks[shrinks]]
    )

    r_from = np.zeros(m_ues)
    r_from[ks] = r_cur[src]
    u = (r_dst - r_cur[:, None]) + (r_src - r_from)[None, :]

    snr_join = (p / (loads + 1))[:, None] * g
    margin = snr_join - model.thresholds[None, :]
    with np.errstate(invalid="ignore"):
        member_worst = np.min(np.where(member, margin, np.inf), axis=1)
    feasible = (margin >= 0) & (member_worst >= 0)[:, None]

    allowed = feasible & served[None, :]
    allowed[assoc.uav_of[ks], ks] = False
    return np.where(allowed, u, -np.inf)


def _destination_feasible(model: LinkModel, gains: np.ndarray, assoc: Association, ue: int, dest: int) -> bool:
    load = int(np.sum(assoc.uav_of == dest)) + 1
    share = model.max_power_w / load
    members = np.nonzero(assoc.uav_of == dest)[0].tolist() + [ue]
    snrs = share * gains[dest, members] / model.noise_w
    return bool(np.all(snrs >= model.thresholds[members]))


def run_coalition_game(
    model: LinkModel,
    gains: np.ndarray,
    assoc: Association,
    eps: float | None = None,
) -> GameResult:
    """Play transfer rounds until the total rate stops improving.

    Each round: build the utility matrix, let every destination UAV pick its
    best positive-gain UE (ties to the lowest UE index), resolve UEs claimed
    by several destinations in favour of the largest gain (then the lowest
    UAV index), and apply the survivors in descending gain order. Later moves
    in a round are revalidated against the partition as it actually is by
    then, and every applied move must strictly raise the canonical total rate.
    """
    if eps is None:
        eps = model.scenario.system.convergence_threshold
    n = gains.shape[0]
    assoc = assoc.copy()
    transfers: list[Transfer] = []
    rate = model.total_rate(gains, equal_split_powers(assoc, n, model.max_power_w), assoc)
    rounds = 0
    for _ in range(_MAX_ROUNDS):
        u = _utility_matrix(model, gains, assoc)
        best_k = u.argmax(axis=1)
        rows = np.arange(n)
        best_u = u[rows, best_k]
        picks = [(float(best_u[i]), int(i), int(best_k[i])) for i in rows if best_u[i] > 0.0]
        if not picks:
            break
        rounds += 1
        by_ue: dict[int, tuple[float, int, int]] = {}
        for gain, i, k in picks:
            held = by_ue.get(k)
            if held is None or (gain, -i) > (held[0], -held[1]):
                by_ue[k] = (gain, i, k)
        ordered = sorted(by_ue.values(), key=lambda t: (-t[0], t[1], t[2]))
        round_start = rate
        applied = 0
        for _, dest, k in ordered:
            src = int(assoc.uav_of[k])
            if src < 0 or src == dest:
                continue
            if not _destination_feasible(model, gains, assoc, k, dest):
                continue
            gain_now = transfer_utility(model, gains, assoc, k, dest)
            if gain_now <= 0.0:
                continue
            trial = assoc.copy()
            trial.uav_of[k] = dest
            new_rate = model.total_rate(
                gains, equal_split_powers(trial, n, model.max_power_w), trial
            )
            if new_rate <= rate:  # guard against float-level regressions
                continue
            assoc = trial
            transfers.append(Transfer(ue=k, source=src, destination=dest, gain_bps=new_rate - rate))
            rate = new_rate
            applied += 1
        if applied == 0 or (rate - round_start) < eps:
            break
    else:
        raise RuntimeError("coalition game failed to settle within the round bound")
    return GameResult(assoc=assoc, rounds=rounds, transfers=transfers, total_rate_bps=rate)
