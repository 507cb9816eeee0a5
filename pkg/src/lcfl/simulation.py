"""Compiled replication loop.

One call simulates one replication for a whole horizon.  Randomness is
precomputed outside the kernel (reward bits and candidate samples from the
keyed streams), so the kernel is a deterministic function of its inputs and
mirrors :func:`lcfl.policies.lcfl_step` operation for operation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .environment import InstanceSpec, RewardStream
from .metrics import RunTrace
from .policies import PLACEHOLDER, PickStream, PolicyConfig, PolicyState

WEIGHT_COMBINED, WEIGHT_QUEUE, WEIGHT_UCB = 0, 1, 2


@dataclass(frozen=True)
class Diagnostics:
    shadow_argmax: bool = False
    lemma2_assert: bool = False


@numba.njit(cache=True)
def _score(offsets, arms, idx, weights):
    total = 0.0
    for k in range(offsets[idx], offsets[idx + 1]):
        total += weights[arms[k]]
    return total


@numba.njit(cache=True)
def _argmax_all(offsets, arms, weights):
    best = -1
    best_w = 0.0
    for idx in range(offsets.size - 1):
        w = _score(offsets, arms, idx, weights)
        if best == -1 or w > best_w:
            best = idx
            best_w = w
    return best, best_w


@numba.njit(cache=True)
def _ucb(pulls, reward_sum, t):
    if pulls == 0:
        return 1.0
    bonus = 0.0
    if t > 0:
        bonus = math.sqrt(3.0 * max(math.log(t), 0.0) / (2.0 * pulls))
    return min(reward_sum / pulls + bonus, 1.0)


@numba.njit(cache=True)
def _run(offsets, arms, targets, epsilon, eta, weight_kind, full_argmax, picks, outcomes,
         t_start, drift_horizon, shadow, check_drift,
         queues, pulls, reward_sums, ucb, prev,
         selections, service, best_pick, queue_gap):
    n_arms = queues.size
    n_rounds = outcomes.shape[0]
    m = picks.shape[1]
    weights = np.empty(n_arms)
    old_ucb = np.empty(n_arms)
    old_pulls = np.empty(n_arms, dtype=np.int64)
    comparisons = 0
    drift_violations = 0
    for i in range(n_rounds):
        t = t_start + i
        for n in range(n_arms):
            if weight_kind == 0:
                weights[n] = queues[n] + eta * ucb[n]
            elif weight_kind == 1:
                weights[n] = queues[n]
            else:
                weights[n] = ucb[n]

        if full_argmax:
            best, best_w = _argmax_all(offsets, arms, weights)
            comparisons += offsets.size - 1
        else:
            best = -1
            best_w = 0.0
            for j in range(m):
                idx = picks[i, j]
                w = _score(offsets, arms, idx, weights)
                if best == -1 or w > best_w or (w == best_w and idx < best):
                    best = idx
                    best_w = w
            if prev != -1:
                w = _score(offsets, arms, prev, weights)
                if w > best_w or (w == best_w and prev < best):
                    best = prev
                    best_w = w
            comparisons += m + 1

        if shadow:
            dagger, _ = _argmax_all(offsets, arms, weights)
            hit = full_argmax
            for j in range(m):
                if picks[i, j] == dagger:
                    hit = True
            best_pick[i] = hit
            ddagger, q_best = _argmax_all(offsets, arms, queues)
            queue_gap[i] = q_best - _score(offsets, arms, best, queues)

        selections[i] = best
        for n in range(n_arms):
            old_ucb[n] = ucb[n]
            old_pulls[n] = pulls[n]
        for k in range(offsets[best], offsets[best + 1]):
            n = arms[k]
            x = outcomes[i, n]
            service[i, n] = x
            pulls[n] += 1
            reward_sums[n] += x
        for n in range(n_arms):
            q = queues[n] + targets[n] - service[i, n] + epsilon
            queues[n] = q if q > 0.0 else 0.0
        for n in range(n_arms):
            ucb[n] = _ucb(pulls[n], reward_sums[n], t + 1)
        if check_drift:
            for n in range(n_arms):
                change = ucb[n] - old_ucb[n]
                h = old_pulls[n]
                if h >= 1:
                    floor = -1.0 / h - math.sqrt(3.0 * max(math.log(drift_horizon), 0.0) / (2.0 * h))
                    if change < floor - 1e-12:
                        drift_violations += 1
                elif pulls[n] == h:
                    if change != 0.0:
                        drift_violations += 1
                elif change < -1.0 - 1e-12:
                    drift_violations += 1
        prev = best
    return prev, comparisons, drift_violations


def _weight_kind(cfg: PolicyConfig) -> int:
    if cfg.variant == "queue-pc":
        return WEIGHT_QUEUE
    if cfg.variant == "ucb-pc":
        return WEIGHT_UCB
    return WEIGHT_COMBINED


def family_csr(bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Member arm lists as (offsets, arms), arms increasing within a member."""
    rows, cols = np.nonzero(bits)
    offsets = np.zeros(bits.shape[0] + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=bits.shape[0]), out=offsets[1:])
    return offsets, cols.astype(np.int64)


def simulate_replication(instance: InstanceSpec, cfg: PolicyConfig, horizon: int,
                         master_seed: int, replication: int,
                         diagnostics: Diagnostics = Diagnostics()) -> RunTrace:
    """Run one replication of ``cfg`` for ``horizon`` rounds from the initial state."""
    family = instance.family
    m = cfg.picks(family.size)
    offsets, arms = family_csr(family.bits)
    outcomes = RewardStream(instance, master_seed, replication).outcomes(0, horizon)
    if cfg.samples:
        picks = PickStream(family.size, m, master_seed, replication).picks(0, horizon)
    else:
        picks = np.zeros((horizon, 0), dtype=np.int64)
    state = PolicyState.initial(instance.num_arms)

    selections = np.empty(horizon, dtype=np.int64)
    service = np.zeros((horizon, instance.num_arms), dtype=np.uint8)
    shadow = diagnostics.shadow_argmax
    best_pick = np.zeros(horizon if shadow else 0, dtype=np.bool_)
    queue_gap = np.zeros(horizon if shadow else 0)

    prev, comparisons, l2 = _run(
        offsets, arms, instance.targets, float(cfg.epsilon), float(cfg.effective_eta),
        _weight_kind(cfg), not cfg.samples, picks, outcomes,
        0, horizon, shadow, diagnostics.lemma2_assert,
        state.queues, state.pulls, state.reward_sums, state.ucb, PLACEHOLDER,
        selections, service, best_pick, queue_gap,
    )
    state.prev_selection = int(prev)
    state.round = horizon
    state.comparisons = int(comparisons)

    regret_step = instance.member_means()
    return RunTrace(
        horizon=horizon,
        replication=replication,
        selections=selections,
        service=service,
        member_means=regret_step,
        bits=family.bits,
        comparisons=int(comparisons),
        comparisons_per_round=cfg.comparisons_per_round(family.size),
        final_state=state,
        best_pick=best_pick if shadow else None,
        queue_gap=queue_gap if shadow else None,
        drift_violations=int(l2) if diagnostics.lemma2_assert else None,
    )
