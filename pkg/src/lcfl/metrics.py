"""Empirical metrics over simulated traces.

Round indices follow the convention "metric at ``t`` covers rounds
``0 .. t-1``", so every curve has ``T + 1`` entries with value 0 at ``t = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# Positive debt below this is treated as zero (floating residue of lambda*t).
ZERO_TOL = 1e-9


class DiagnosticUnavailable(RuntimeError):
    pass


@dataclass
class RunTrace:
    horizon: int
    replication: int
    selections: np.ndarray
    service: np.ndarray
    member_means: np.ndarray
    bits: np.ndarray
    comparisons: int
    comparisons_per_round: int
    final_state: object = None
    best_pick: np.ndarray | None = None
    queue_gap: np.ndarray | None = None
    drift_violations: int | None = None
    pseudo_regret: np.ndarray | None = field(default=None, repr=False)

    @property
    def realized_rewards(self) -> np.ndarray:
        return self.service.sum(axis=1, dtype=np.int64)

    def cumulative_service(self) -> np.ndarray:
        """``(T + 1, N)`` cumulative per-arm service, row 0 all zero."""
        out = np.zeros((self.horizon + 1, self.service.shape[1]))
        np.cumsum(self.service, axis=0, out=out[1:])
        return out

    def attach_oracle(self, optimal_reward: float) -> None:
        """Store the cumulative pseudo-regret curve against ``optimal_reward``."""
        per_round = optimal_reward - self.member_means[self.selections]
        curve = np.zeros(self.horizon + 1)
        np.cumsum(per_round, out=curve[1:])
        self.pseudo_regret = curve


def violation_from_cumulative(cum_service: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """``sum_n (lambda_n t - service_n(t))^+`` for every row ``t`` of ``cum_service``."""
    t = np.arange(cum_service.shape[0], dtype=float)[:, None]
    debt = targets[None, :] * t - cum_service
    debt = np.where(debt > ZERO_TOL, debt, 0.0)
    return debt.sum(axis=1)


def violation_curve(trace: RunTrace, targets) -> np.ndarray:
    return violation_from_cumulative(trace.cumulative_service(), np.asarray(targets, dtype=float))


def mean_cumulative_service(traces: Sequence[RunTrace]) -> np.ndarray:
    total = None
    for tr in traces:
        cum = tr.cumulative_service()
        total = cum if total is None else total + cum
    return total / len(traces)


def mean_violation_curve(traces: Sequence[RunTrace], targets) -> np.ndarray:
    """Violation of the cross-replication mean service (the expectation form)."""
    return violation_from_cumulative(mean_cumulative_service(traces), np.asarray(targets, dtype=float))


def cumulative_violation(trace, targets, upto: int) -> float | dict:
    """Cumulative positive-part fairness debt after ``upto`` rounds.

    Given a single trace, returns the realized value.  Given a sequence of
    traces, returns ``{"realized": [...], "mean_service": v}``.
    """
    targets = np.asarray(targets, dtype=float)
    if isinstance(trace, RunTrace):
        if not 0 <= upto <= trace.horizon:
            raise ValueError(f"upto={upto} outside [0, {trace.horizon}]")
        served = trace.service[:upto].sum(axis=0, dtype=np.int64).astype(float)
        return _debt(targets, upto, served)
    traces = list(trace)
    realized = [cumulative_violation(tr, targets, upto) for tr in traces]
    mean_served = np.mean([tr.service[:upto].sum(axis=0, dtype=np.int64) for tr in traces], axis=0)
    return {"realized": realized, "mean_service": _debt(targets, upto, mean_served)}


def _debt(targets: np.ndarray, t: int, served: np.ndarray) -> float:
    debt = targets * t - served
    return float(np.where(debt > ZERO_TOL, debt, 0.0).sum())


def zero_violation_point(curve: np.ndarray) -> int | None:
    """Smallest ``t*`` with ``curve[t] == 0`` for every ``t`` in ``[t*, T]``."""
    curve = np.asarray(curve)
    if curve[-1] > 0:
        return None
    positive = np.flatnonzero(curve > 0)
    return 0 if positive.size == 0 else int(positive[-1]) + 1


def pseudo_regret(trace: RunTrace, oracle, means, upto: int | None = None) -> float:
    """``sum_{tau < t} sum_n mu_n (E[S*_n] - S_n(tau))`` from per-arm marginals."""
    upto = trace.horizon if upto is None else upto
    means = np.asarray(means, dtype=float)
    if upto == 0:
        return 0.0
    counts = np.bincount(trace.selections[:upto], minlength=trace.bits.shape[0])
    pulls = counts @ trace.bits.astype(np.int64)
    return float(np.dot(means, upto * np.asarray(oracle.marginals) - pulls))


def final_service_rates(traces: Sequence[RunTrace]) -> np.ndarray:
    """Mean over replications of each arm's average service per round at ``T``."""
    return np.mean([tr.service.sum(axis=0) / tr.horizon for tr in traces], axis=0)


# --- best-pick statistics -------------------------------------------------

@dataclass(frozen=True)
class BestPickStats:
    inclusion_rate: float
    rounds: int
    gaps: np.ndarray
    max_gaps: np.ndarray

    @property
    def gap_mean(self) -> float:
        return float(self.gaps.mean())

    @property
    def gap_mean_se(self) -> float:
        return float(self.gaps.std(ddof=1) / math.sqrt(self.gaps.size)) if self.gaps.size > 1 else 0.0

    @property
    def gap_second_moment(self) -> float:
        return float(np.mean((self.gaps - 1.0) ** 2))

    @property
    def gap_second_moment_se(self) -> float:
        sq = (self.gaps - 1.0) ** 2
        return float(sq.std(ddof=1) / math.sqrt(sq.size)) if sq.size > 1 else 0.0


def best_pick_gaps(best_pick: np.ndarray) -> np.ndarray:
    """Gaps between successive best-pick rounds, with round 0 always counted
    as the first and the last gap truncated at the horizon."""
    horizon = best_pick.size
    rounds = np.concatenate([[0], np.flatnonzero(best_pick[1:]) + 1, [horizon]])
    return np.diff(rounds)


def best_pick_stats(traces: Sequence[RunTrace]) -> BestPickStats:
    parts, maxima, hits, total = [], [], 0, 0
    for tr in traces:
        if tr.best_pick is None:
            raise DiagnosticUnavailable("best-pick statistics need shadow_argmax diagnostics")
        g = best_pick_gaps(tr.best_pick)
        parts.append(g)
        maxima.append(g.max())
        hits += int(tr.best_pick.sum())
        total += tr.best_pick.size
    return BestPickStats(hits / total, total, np.concatenate(parts).astype(float), np.asarray(maxima))


def lemma3_gap_frequency(trace: RunTrace, family=None, b1: float = 0.0) -> float:
    """Fraction of rounds whose queue-weight gap to the queue argmax is at most ``b1``."""
    if trace.queue_gap is None:
        raise DiagnosticUnavailable("queue-gap frequency needs shadow_argmax diagnostics")
    return float(np.mean(trace.queue_gap <= b1))
