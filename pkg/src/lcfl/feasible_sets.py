"""Feasible super-arm families: enumeration, canonical order and sampling.

A family is stored as a dense ``(|S|, N)`` 0/1 matrix whose rows are sorted
lexicographically on their increasing arm lists, so that
``{1} < {1,3} < {2} < {3}``.  Row position is the canonical index used for
tie-breaking.
"""

from __future__ import annotations

import itertools
from math import comb
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

DEFAULT_MAX_MEMBERS = 10**6


class FamilyError(ValueError):
    """Malformed descriptor or a family that leaves some arm uncovered."""


class FamilyTooLarge(RuntimeError):
    """Enumeration would exceed the configured member cap."""


@dataclass(frozen=True)
class SuperArm:
    membership: tuple[int, ...]
    index: int

    @property
    def arms(self) -> tuple[int, ...]:
        """Zero-based indices of the pulled arms."""
        return tuple(n for n, bit in enumerate(self.membership) if bit)

    def __len__(self) -> int:
        return sum(self.membership)


@dataclass(frozen=True, eq=False)
class FeasibleFamily:
    bits: np.ndarray
    generator: dict = field(default_factory=dict)

    def __post_init__(self):
        self.bits.setflags(write=False)

    @property
    def num_arms(self) -> int:
        return self.bits.shape[1]

    @property
    def size(self) -> int:
        return self.bits.shape[0]

    def __len__(self) -> int:
        return self.size

    @property
    def s_max(self) -> int:
        return int(self.bits.sum(axis=1).max())

    def member(self, index: int) -> SuperArm:
        return SuperArm(tuple(int(b) for b in self.bits[index]), int(index))

    @property
    def members(self) -> list[SuperArm]:
        return [self.member(i) for i in range(self.size)]

    def index_of(self, membership: Sequence[int]) -> int:
        """Canonical index of ``membership``; raises if it is not a member."""
        row = np.asarray(membership, dtype=np.uint8)
        if row.shape != (self.num_arms,):
            raise FamilyError(f"membership has length {row.size}, expected {self.num_arms}")
        hits = np.flatnonzero((self.bits == row).all(axis=1))
        if hits.size == 0:
            raise FamilyError(f"{tuple(int(b) for b in row)} is not a feasible super arm")
        return int(hits[0])


def _canonical(rows: np.ndarray) -> np.ndarray:
    order = sorted(range(rows.shape[0]), key=lambda i: tuple(np.flatnonzero(rows[i])))
    return np.ascontiguousarray(rows[order])


def _from_rows(rows: np.ndarray, generator: dict) -> FeasibleFamily:
    rows = np.asarray(rows, dtype=np.uint8)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise FamilyError("a feasible family needs at least one member")
    if np.any(rows > 1):
        raise FamilyError("membership entries must be 0 or 1")
    if np.any(rows.sum(axis=1) == 0):
        raise FamilyError("the empty set is not a feasible super arm")
    if np.unique(rows, axis=0).shape[0] != rows.shape[0]:
        raise FamilyError("duplicate members in family")
    uncovered = np.flatnonzero(rows.sum(axis=0) == 0)
    if uncovered.size:
        raise FamilyError(
            f"arms {[int(n) + 1 for n in uncovered]} belong to no super arm; "
            "their fairness targets cannot be met"
        )
    return FeasibleFamily(_canonical(rows), dict(generator))


def _check_cap(count: int, cap: int):
    if count > cap:
        raise FamilyTooLarge(f"family would have {count} members, cap is {cap}")


def singletons(num_arms: int) -> FeasibleFamily:
    return _from_rows(np.eye(num_arms, dtype=np.uint8), {"type": "singletons"})


def k_subsets(num_arms: int, k: int, max_members: int = DEFAULT_MAX_MEMBERS) -> FeasibleFamily:
    if not 1 <= k <= num_arms:
        raise FamilyError(f"k must lie in [1, {num_arms}], got {k}")
    _check_cap(comb(num_arms, k), max_members)
    rows = np.zeros((comb(num_arms, k), num_arms), dtype=np.uint8)
    for i, combo in enumerate(itertools.combinations(range(num_arms), k)):
        rows[i, list(combo)] = 1
    return _from_rows(rows, {"type": "k_subsets", "k": k})


def independent_sets(
    num_arms: int,
    edges: Sequence[Sequence[int]],
    max_size: int | None = None,
    max_members: int = DEFAULT_MAX_MEMBERS,
) -> FeasibleFamily:
    """Nonempty independent sets of a conflict graph, at most ``max_size`` arms.

    ``edges`` use one-based arm labels, as in the config file.
    """
    max_size = num_arms if max_size is None else max_size
    if max_size < 1:
        raise FamilyError("max_size must be at least 1")
    adj = [set() for _ in range(num_arms)]
    for edge in edges:
        if len(edge) != 2:
            raise FamilyError(f"edge {edge!r} must have two endpoints")
        a, b = (int(v) - 1 for v in edge)
        if not (0 <= a < num_arms and 0 <= b < num_arms) or a == b:
            raise FamilyError(f"edge {list(edge)} is not a valid pair of arms in 1..{num_arms}")
        adj[a].add(b)
        adj[b].add(a)

    found: list[tuple[int, ...]] = []

    # Depth-first extension in increasing arm order; each set is visited once.
    def extend(current: list[int], blocked: set[int], start: int):
        for v in range(start, num_arms):
            if v in blocked:
                continue
            current.append(v)
            found.append(tuple(current))
            if len(found) > max_members:
                raise FamilyTooLarge(f"independent-set family exceeds cap {max_members}")
            if len(current) < max_size:
                extend(current, blocked | adj[v], v + 1)
            current.pop()

    extend([], set(), 0)
    rows = np.zeros((len(found), num_arms), dtype=np.uint8)
    for i, members in enumerate(found):
        rows[i, list(members)] = 1
    return _from_rows(
        rows,
        {"type": "independent_sets", "edges": [list(map(int, e)) for e in edges], "max_size": max_size},
    )


def explicit(members: Sequence[Sequence[int]]) -> FeasibleFamily:
    rows = np.asarray(members)
    if rows.ndim != 2:
        raise FamilyError("explicit members must be a list of equal-length bit vectors")
    return _from_rows(rows, {"type": "explicit", "members": rows.astype(int).tolist()})


def enumerate_family(
    descriptor: Mapping[str, Any], num_arms: int, max_members: int = DEFAULT_MAX_MEMBERS
) -> FeasibleFamily:
    """Build the canonical family described by a config-file descriptor."""
    if not isinstance(descriptor, Mapping) or "type" not in descriptor:
        raise FamilyError(f"family descriptor needs a 'type' field: {descriptor!r}")
    kind = descriptor["type"]
    if kind == "singletons":
        family = singletons(num_arms)
    elif kind == "k_subsets":
        family = k_subsets(num_arms, int(descriptor["k"]), max_members)
    elif kind == "independent_sets":
        family = independent_sets(
            num_arms, descriptor.get("edges", []), descriptor.get("max_size"), max_members
        )
    elif kind == "explicit":
        family = explicit(descriptor["members"])
    else:
        raise FamilyError(f"unknown family type {kind!r}")
    if family.num_arms != num_arms:
        raise FamilyError(f"family has {family.num_arms} arms, instance has {num_arms}")
    _check_cap(family.size, max_members)
    return family


def sample_distinct_rounds(
    num_members: int, m: int, rng: np.random.Generator, rounds: int
) -> np.ndarray:
    """Draw ``rounds`` independent uniform ``m``-subsets of ``range(num_members)``.

    Returns an ``(rounds, m)`` int64 array.  Small ``m`` uses Floyd's
    algorithm; otherwise the ``m`` smallest of i.i.d. uniform keys.  Both give
    every ``m``-combination probability ``1 / C(num_members, m)``.
    """
    if not 1 <= m <= num_members:
        raise ValueError(f"m must lie in [1, {num_members}], got {m}")
    if m == num_members:
        return np.broadcast_to(np.arange(num_members, dtype=np.int64), (rounds, m)).copy()
    if m * m <= 8 * num_members:
        out = np.empty((rounds, m), dtype=np.int64)
        for k, j in enumerate(range(num_members - m, num_members)):
            draw = rng.integers(0, j + 1, size=rounds, dtype=np.int64)
            seen = (out[:, :k] == draw[:, None]).any(axis=1)
            out[:, k] = np.where(seen, j, draw)
        return out
    keys = rng.random((rounds, num_members))
    return np.argpartition(keys, m - 1, axis=1)[:, :m].astype(np.int64)


def sample_distinct(family: FeasibleFamily | int, m: int, rng: np.random.Generator) -> list[int]:
    """Uniformly random ``m`` distinct member indices (without replacement)."""
    size = family if isinstance(family, int) else family.size
    return [int(i) for i in sample_distinct_rounds(size, m, rng, 1)[0]]
