"""Fair-learning policies: UCB weights, virtual queues and the pick-and-compare step.

Four variants share one state machine:

``lcfl``
    sample ``M`` members uniformly, keep the heaviest of those and the
    previous selection under per-arm weight ``Q_n + eta * w_n``.
``pessimistic-optimistic``
    full-family argmax of the same weight (``M = |S|`` without sampling).
``queue-pc``
    pick-and-compare on queue lengths alone (``eta = 0``).
``ucb-pc``
    pick-and-compare on UCB weights alone; the large-``eta`` limit with queues
    dropped from the weight instead of scaling ``w`` by a huge number.

This module holds the scalar reference implementation.  The compiled
replication loop in :mod:`lcfl.simulation` follows it operation for
operation and is tested against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .environment import PICK_STREAM, CHUNK_ROUNDS, RewardDraw, RewardStream, stream_generator
from .feasible_sets import FeasibleFamily, SuperArm, sample_distinct, sample_distinct_rounds

VARIANTS = ("lcfl", "pessimistic-optimistic", "queue-pc", "ucb-pc")
PLACEHOLDER = -1


class PolicyConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PolicyConfig:
    eta: float = 100.0
    epsilon: float = 1e-5
    m_picks: int | None = 3
    variant: str = "lcfl"
    label: str | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise PolicyConfigError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if not (self.eta >= 0 and math.isfinite(self.eta)):
            raise PolicyConfigError(f"eta must be a finite nonnegative number, got {self.eta}")
        if not 0 <= self.epsilon < 1:
            raise PolicyConfigError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if self.variant != "pessimistic-optimistic":
            if self.m_picks is None or int(self.m_picks) != self.m_picks or self.m_picks < 1:
                raise PolicyConfigError(f"m_picks must be a positive integer, got {self.m_picks}")

    @classmethod
    def from_dict(cls, data: dict) -> "PolicyConfig":
        known = {"eta", "epsilon", "m_picks", "variant", "label"}
        extra = set(data) - known
        if extra:
            raise PolicyConfigError(f"unknown sweep-entry fields {sorted(extra)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise PolicyConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return {"variant": self.variant, "eta": self.eta, "epsilon": self.epsilon,
                "m_picks": self.m_picks, "label": self.name}

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.variant == "pessimistic-optimistic":
            return f"pessimistic-optimistic_eta{self.eta:g}"
        if self.variant == "ucb-pc":
            return f"ucb-pc_M{self.m_picks}"
        return f"{self.variant}_eta{self.effective_eta:g}_M{self.m_picks}"

    @property
    def effective_eta(self) -> float:
        return 0.0 if self.variant == "queue-pc" else self.eta

    @property
    def samples(self) -> bool:
        return self.variant != "pessimistic-optimistic"

    def picks(self, family_size: int) -> int:
        """Members sampled per round (``|S|`` for the full-argmax variant)."""
        if not self.samples:
            return family_size
        if self.m_picks > family_size:
            raise PolicyConfigError(f"m_picks={self.m_picks} exceeds family size {family_size}")
        return int(self.m_picks)

    def comparisons_per_round(self, family_size: int) -> int:
        return family_size if not self.samples else self.picks(family_size) + 1


@dataclass
class PolicyState:
    queues: np.ndarray
    pulls: np.ndarray
    reward_sums: np.ndarray
    ucb: np.ndarray
    round: int = 0
    prev_selection: int = PLACEHOLDER
    comparisons: int = 0

    @classmethod
    def initial(cls, num_arms: int) -> "PolicyState":
        return cls(
            queues=np.zeros(num_arms),
            pulls=np.zeros(num_arms, dtype=np.int64),
            reward_sums=np.zeros(num_arms, dtype=np.int64),
            ucb=np.ones(num_arms),
        )

    def copy(self) -> "PolicyState":
        return replace(self, queues=self.queues.copy(), pulls=self.pulls.copy(),
                       reward_sums=self.reward_sums.copy(), ucb=self.ucb.copy())


def ucb_weight(pulls: int, reward_sum: int, t: int) -> float:
    """Truncated UCB estimate; 1 for an arm never pulled.  Natural log."""
    if pulls == 0:
        return 1.0
    bonus = math.sqrt(3.0 * max(math.log(t), 0.0) / (2.0 * pulls)) if t > 0 else 0.0
    return min(reward_sum / pulls + bonus, 1.0)


def queue_update(q: float, target: float, pad: float, pulled: int, reward: int) -> float:
    return max(q + target - pulled * reward + pad, 0.0)


def per_arm_weights(state: PolicyState, cfg: PolicyConfig) -> np.ndarray:
    if cfg.variant == "ucb-pc":
        return state.ucb.copy()
    if cfg.variant == "queue-pc":
        return state.queues.copy()
    return state.queues + cfg.eta * state.ucb


def superarm_weight(s: SuperArm | None, state: PolicyState, eta: float) -> float:
    """Total weight ``sum_n (Q_n + eta w_n) S_n``; the empty placeholder weighs 0."""
    if s is None:
        return 0.0
    total = 0.0
    for n in s.arms:
        total += state.queues[n] + eta * state.ucb[n]
    return total


def _score(arms, weights: np.ndarray) -> float:
    total = 0.0
    for n in arms:
        total += weights[n]
    return total


class PickStream:
    """Per-replication candidate samples, addressable by round."""

    def __init__(self, family_size: int, m: int, master_seed: int, replication: int,
                 chunk_rounds: int = CHUNK_ROUNDS):
        self.family_size = family_size
        self.m = m
        self.master_seed = master_seed
        self.replication = replication
        self.chunk_rounds = chunk_rounds
        self._cached: tuple[int, np.ndarray] | None = None

    def _chunk(self, k: int) -> np.ndarray:
        if self._cached is None or self._cached[0] != k:
            rng = stream_generator(self.master_seed, self.replication, PICK_STREAM, k)
            self._cached = (k, sample_distinct_rounds(self.family_size, self.m, rng, self.chunk_rounds))
        return self._cached[1]

    def picks(self, start: int, stop: int) -> np.ndarray:
        c = self.chunk_rounds
        out = np.empty((max(stop - start, 0), self.m), dtype=np.int64)
        t = start
        while t < stop:
            k = t // c
            hi = min(stop, (k + 1) * c)
            out[t - start:hi - start] = self._chunk(k)[t - k * c:hi - k * c]
            t = hi
        return out

    def candidates(self, t: int) -> list[int]:
        return [int(i) for i in self.picks(t, t + 1)[0]]


def lcfl_step(state: PolicyState, family: FeasibleFamily, cfg: PolicyConfig,
              env: RewardStream, rng) -> tuple[SuperArm, list[RewardDraw], PolicyState]:
    """Play one round and return ``(selected, draws, next_state)``.

    ``rng`` is a :class:`PickStream` or a :class:`numpy.random.Generator`;
    ``env`` supplies rewards for round ``state.round``.  ``state`` is not
    modified.
    """
    t = state.round
    weights = per_arm_weights(state, cfg)
    bits = family.bits

    if cfg.samples:
        m = cfg.picks(family.size)
        if isinstance(rng, PickStream):
            sampled = rng.candidates(t)
        else:
            sampled = sample_distinct(family, m, rng)
        best, best_w = PLACEHOLDER, 0.0
        for idx in sampled:
            w = _score(np.flatnonzero(bits[idx]), weights)
            if best == PLACEHOLDER or w > best_w or (w == best_w and idx < best):
                best, best_w = idx, w
        if state.prev_selection != PLACEHOLDER:
            idx = state.prev_selection
            w = _score(np.flatnonzero(bits[idx]), weights)
            if w > best_w or (w == best_w and idx < best):
                best, best_w = idx, w
        evaluated = m + 1
    else:
        best, best_w = PLACEHOLDER, 0.0
        for idx in range(family.size):
            w = _score(np.flatnonzero(bits[idx]), weights)
            if best == PLACEHOLDER or w > best_w:
                best, best_w = idx, w
        evaluated = family.size

    selected = family.member(best)
    draws = env.draw(t, selected)
    reward = {d.arm: d.value for d in draws}

    nxt = state.copy()
    for n in range(family.num_arms):
        pulled = 1 if n in reward else 0
        x = reward.get(n, 0)
        nxt.pulls[n] += pulled
        nxt.reward_sums[n] += x
        nxt.queues[n] = queue_update(state.queues[n], float(env.instance.targets[n]), cfg.epsilon, pulled, x)
    for n in range(family.num_arms):
        nxt.ucb[n] = ucb_weight(int(nxt.pulls[n]), int(nxt.reward_sums[n]), t + 1)
    nxt.prev_selection = best
    nxt.round = t + 1
    nxt.comparisons = state.comparisons + evaluated
    return selected, draws, nxt


def ucb_drop_floor(prev_pulls: int, horizon: int) -> float:
    """Smallest per-round UCB change allowed for an arm pulled before."""
    return -1.0 / prev_pulls - math.sqrt(3.0 * max(math.log(horizon), 0.0) / (2.0 * prev_pulls))
