"""Ground-truth bandit instance and Bernoulli reward generation.

Rewards come from uniforms keyed by ``(master_seed, replication, stream,
chunk)`` through :class:`numpy.random.SeedSequence`; inside a chunk the
position is ``(round, arm)``.  Arm ``n`` in round ``t`` therefore sees the same
uniform whatever the policy did, giving common random numbers across policies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, NamedTuple

import numpy as np

from .feasible_sets import FeasibleFamily, FamilyError, SuperArm, enumerate_family

REWARD_STREAM = 0
PICK_STREAM = 1
CHUNK_ROUNDS = 4096


class InstanceError(ValueError):
    pass


class RewardDraw(NamedTuple):
    arm: int
    value: int


@dataclass(frozen=True, eq=False)
class InstanceSpec:
    means: np.ndarray
    targets: np.ndarray
    family: FeasibleFamily
    family_spec: dict = field(default_factory=dict)

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        targets = np.asarray(self.targets, dtype=float)
        if means.ndim != 1 or means.size == 0:
            raise InstanceError("means must be a nonempty vector")
        if targets.shape != means.shape:
            raise InstanceError(f"targets has shape {targets.shape}, means has {means.shape}")
        if np.any(means <= 0) or np.any(means > 1):
            raise InstanceError("every mean must lie in (0, 1]")
        if np.any(targets <= 0):
            raise InstanceError("every fairness target must be positive")
        if self.family.num_arms != means.size:
            raise InstanceError(f"family covers {self.family.num_arms} arms, means has {means.size}")
        means.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "targets", targets)

    @classmethod
    def from_config(cls, data: Mapping[str, Any]) -> "InstanceSpec":
        try:
            means = np.asarray(data["means"], dtype=float)
            targets = np.asarray(data["targets"], dtype=float)
            family_spec = dict(data.get("family", {"type": "singletons"}))
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"bad instance block: {exc}") from exc
        if "num_arms" in data and int(data["num_arms"]) != means.size:
            raise InstanceError(f"num_arms={data['num_arms']} but {means.size} means given")
        family = enumerate_family(family_spec, means.size)
        return cls(means, targets, family, family_spec)

    @property
    def num_arms(self) -> int:
        return self.means.size

    @property
    def mu_min(self) -> float:
        return float(self.means.min())

    @property
    def mu_max(self) -> float:
        return float(self.means.max())

    @property
    def s_max(self) -> int:
        return self.family.s_max

    def member_means(self) -> np.ndarray:
        """Expected reward of every family member, ``sum_n mu_n S_n``."""
        return self.family.bits @ self.means


def _as_bits(instance: InstanceSpec, pulled) -> np.ndarray:
    if pulled is None:
        return np.zeros(instance.num_arms, dtype=np.uint8)
    if isinstance(pulled, SuperArm):
        bits = np.asarray(pulled.membership, dtype=np.uint8)
    else:
        bits = np.asarray(pulled, dtype=np.uint8)
    if not bits.any():
        return bits
    instance.family.index_of(bits)
    return bits


def draw_rewards(instance: InstanceSpec, pulled, rng: np.random.Generator) -> list[RewardDraw]:
    """Bernoulli rewards for the arms of ``pulled`` only (bandit feedback).

    ``pulled`` may be a :class:`SuperArm`, a bit vector, or ``None`` / an
    all-zero vector for the empty placeholder.  One uniform is consumed per
    arm regardless of membership so that arm positions stay aligned.
    """
    try:
        bits = _as_bits(instance, pulled)
    except FamilyError as exc:
        raise InstanceError(str(exc)) from exc
    u = rng.random(instance.num_arms)
    return [RewardDraw(int(n), int(u[n] < instance.means[n])) for n in np.flatnonzero(bits)]


def stream_generator(master_seed: int, replication: int, stream: int, chunk: int) -> np.random.Generator:
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(replication), int(stream), int(chunk)))
    return np.random.Generator(np.random.Philox(seq))


class RewardStream:
    """Per-replication source of reward uniforms, addressable by round."""

    def __init__(self, instance: InstanceSpec, master_seed: int, replication: int,
                 chunk_rounds: int = CHUNK_ROUNDS):
        self.instance = instance
        self.master_seed = master_seed
        self.replication = replication
        self.chunk_rounds = chunk_rounds
        self._cached: tuple[int, np.ndarray] | None = None

    def _chunk(self, k: int) -> np.ndarray:
        if self._cached is None or self._cached[0] != k:
            rng = stream_generator(self.master_seed, self.replication, REWARD_STREAM, k)
            self._cached = (k, rng.random((self.chunk_rounds, self.instance.num_arms)))
        return self._cached[1]

    def uniforms(self, start: int, stop: int) -> np.ndarray:
        """Uniforms for rounds ``start <= t < stop`` as a ``(stop - start, N)`` array."""
        c = self.chunk_rounds
        parts = []
        for k in range(start // c, (stop - 1) // c + 1 if stop > start else start // c):
            lo, hi = max(start, k * c), min(stop, (k + 1) * c)
            parts.append(self._chunk(k)[lo - k * c:hi - k * c])
        if not parts:
            return np.empty((0, self.instance.num_arms))
        return np.concatenate(parts)

    def outcomes(self, start: int, stop: int) -> np.ndarray:
        """Counterfactual reward bits ``X_n(t)`` for every arm, as uint8."""
        return (self.uniforms(start, stop) < self.instance.means).astype(np.uint8)

    def draw(self, t: int, pulled) -> list[RewardDraw]:
        bits = _as_bits(self.instance, pulled)
        x = self.outcomes(t, t + 1)[0]
        return [RewardDraw(int(n), int(x[n])) for n in np.flatnonzero(bits)]
