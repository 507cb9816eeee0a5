"""Benchmark randomized policy and reference argmax utilities.

The benchmark is the linear program

    maximize    sum_S q(S) sum_n mu_n S_n
    subject to  lambda_n + delta <= sum_S q(S) S_n mu_n   for every arm n
                sum_S q(S) = 1,  q >= 0

over the enumerated family.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .environment import InstanceSpec
from .feasible_sets import FeasibleFamily, SuperArm
from .lp import LPInfeasible, simplex


class InfeasibleFairness(ValueError):
    """No distribution over the family meets every fairness target.

    ``certificate`` is a Farkas vector over the rows ``[arm 1..N; sum q = 1]``
    of the benchmark program (see :class:`lcfl.lp.LPInfeasible`).
    ``violated_arms`` lists the arms carrying nonzero certificate weight.
    """

    def __init__(self, message: str, certificate: np.ndarray | None = None):
        super().__init__(message)
        self.certificate = certificate
        if certificate is None:
            self.violated_arms: list[int] = []
        else:
            self.violated_arms = [int(n) for n in np.flatnonzero(np.abs(certificate[:-1]) > 1e-12)]


@dataclass(frozen=True)
class OracleSolution:
    distribution: np.ndarray
    optimal_reward: float
    marginals: np.ndarray
    delta_used: float

    def to_dict(self) -> dict:
        return {
            "distribution": self.distribution.tolist(),
            "optimal_reward": self.optimal_reward,
            "marginals": self.marginals.tolist(),
            "delta_used": self.delta_used,
        }


def _family_of(instance: InstanceSpec, family: FeasibleFamily | None) -> FeasibleFamily:
    return instance.family if family is None else family


def solve_benchmark(instance: InstanceSpec, family: FeasibleFamily | None = None,
                    delta: float = 0.0) -> OracleSolution:
    """Exact optimum of the benchmark program at tightness ``delta``."""
    fam = _family_of(instance, family)
    return solve_program(fam.bits, instance.means, instance.targets, delta)


def solve_program(bits: np.ndarray, means, targets, delta: float = 0.0) -> OracleSolution:
    """Benchmark program on raw arrays; ``targets`` may contain zeros here."""
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    bits = np.asarray(bits, dtype=float)
    mu = np.asarray(means, dtype=float)
    lam = np.asarray(targets, dtype=float)
    rewards = bits @ mu
    # -(S_n mu_n) q <= -(lambda_n + delta)
    A_ub = -(bits * mu).T
    b_ub = -(lam + delta)
    try:
        res = simplex(rewards, A_ub, b_ub, np.ones((1, bits.shape[0])), [1.0])
    except LPInfeasible as exc:
        load = float(np.sum((lam + delta) / mu))
        raise InfeasibleFairness(
            f"fairness targets infeasible at delta={delta} (sum (lambda+delta)/mu = {load:.6g})",
            exc.certificate,
        ) from exc
    q = np.where(res.x < 1e-12, 0.0, res.x)
    q = q / q.sum()
    marginals = q @ bits
    return OracleSolution(q, float(q @ rewards), marginals, float(delta))


def max_slack(instance: InstanceSpec, family: FeasibleFamily | None = None) -> float:
    """Largest delta for which the benchmark program stays feasible.

    May be zero or negative; callers treat ``<= 0`` as infeasible fairness.
    """
    fam = _family_of(instance, family)
    bits = fam.bits.astype(float)
    mu, lam = instance.means, instance.targets
    k = fam.size
    # Variables [q (k), delta_plus, delta_minus]; delta = delta_plus - delta_minus.
    c = np.zeros(k + 2)
    c[k], c[k + 1] = 1.0, -1.0
    A_ub = np.zeros((instance.num_arms, k + 2))
    A_ub[:, :k] = -(bits * mu).T
    A_ub[:, k] = 1.0
    A_ub[:, k + 1] = -1.0
    A_eq = np.zeros((1, k + 2))
    A_eq[0, :k] = 1.0
    res = simplex(c, A_ub, -lam, A_eq, [1.0])
    return float(res.x[k] - res.x[k + 1])


def member_weights(bits: np.ndarray, per_arm: np.ndarray) -> np.ndarray:
    """``sum_n per_arm[n] * S_n`` for every row of ``bits``.

    Accumulates arm by arm in index order so every code path that scores a
    super arm produces bit-identical totals (ties must be detected exactly).
    """
    per_arm = np.asarray(per_arm, dtype=float)
    total = np.zeros(bits.shape[0])
    for n in range(bits.shape[1]):
        col = bits[:, n].astype(bool)
        total[col] += per_arm[n]
    return total


def full_argmax(family: FeasibleFamily, per_arm_weights) -> SuperArm:
    """Member of maximum total weight; the smallest canonical index wins ties."""
    w = np.asarray(per_arm_weights, dtype=float)
    if not np.all(np.isfinite(w)):
        raise ValueError("per-arm weights must be finite")
    totals = member_weights(family.bits, w)
    return family.member(int(np.argmax(totals)))
