"""Analytical constants for the regret and zero-violation guarantees.

All logarithms are natural.  Fields that need ``kappa = gamma*delta + gamma - 1 > 0``
are ``None`` when that fails, with the reason in ``unavailable``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .environment import InstanceSpec
from .feasible_sets import FeasibleFamily
from .policies import PolicyConfig

PASS, FAIL, NOT_IN_FORCE = "pass", "fail", "not-in-force"
MAX_D = 10**7


@dataclass
class BoundReport:
    alpha: float
    c1: float
    c2: float
    c3: float
    d_rounds: int | None
    gamma: float | None
    b1: float | None
    zeta: float
    kappa: float | None
    u_const: float | None
    theta: float | None
    v0: float | None
    g0: float | None
    t0: float | None
    regret_bound: float
    regret_bound_uncapped: float
    delta: float
    epsilon: float
    eta: float
    horizon: int
    regret_guarantee_in_force: bool
    violation_guarantee_in_force: bool
    unavailable: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {k: _jsonable(v) for k, v in asdict(self).items()}


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return v


def pick_constants(alpha: float) -> tuple[float, float, float]:
    """Best-pick gap constants ``(C1, C2, C3)`` for inclusion probability ``alpha``."""
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    c1 = (alpha * alpha - 3 * alpha + 2) / (alpha * alpha)
    c2 = 1 / alpha - 1
    c3 = math.inf if alpha == 1 else -math.log(1 - alpha)
    return c1, c2, c3


def gamma_of(alpha: float, d: int) -> float:
    return 1.0 - (1.0 - alpha) ** d


def minimal_d(alpha: float, delta: float) -> int | None:
    """Smallest integer ``D >= 1`` with ``1 - (1 - alpha)^D >= 1 / (1 + delta)``."""
    if delta <= 0:
        return None
    target = 1.0 / (1.0 + delta)
    if alpha >= 1:
        return 1
    # Closed-form guess, then settle by direct evaluation of the formula.
    d = max(1, math.ceil(math.log(1 - target) / math.log(1 - alpha)) - 1)
    while gamma_of(alpha, d) < target:
        d += 1
        if d > MAX_D:
            return None
    while d > 1 and gamma_of(alpha, d - 1) >= target:
        d -= 1
    return d


def regret_bound_terms(n: int, s_max: int, mu_min: float, eta: float, horizon: int,
                       c1: float, c2: float, c3: float) -> float:
    """Right-hand side of the regret guarantee before the cap ``S_max mu_max T``."""
    T = float(horizon)
    logT = math.log(T)
    root = math.sqrt(6 * n * s_max * T * logT)
    inv_eta = math.inf if eta == 0 else 1.0 / eta
    total = (
        n * T * inv_eta / mu_min
        + 2 * root
        + n * (1 + 5 * math.pi**2 / 12)
        + (2 * c1 * n * T * inv_eta if c1 > 0 else 0.0)
        + c2 * n * math.pi**2 / 6
        + (1 + logT) / c3 * n * math.log(s_max * T / n)
        + c2 * n
        + (1 + logT) * root / (2 * c3)
    )
    return total


def compute_bounds(instance: InstanceSpec, family: FeasibleFamily | None, cfg: PolicyConfig,
                   horizon: int, delta: float) -> BoundReport:
    fam = instance.family if family is None else family
    n = instance.num_arms
    s_max = fam.s_max
    mu_min, mu_max = instance.mu_min, instance.mu_max
    eta = math.inf if cfg.variant == "ucb-pc" else cfg.effective_eta
    eps = cfg.epsilon
    alpha = cfg.picks(fam.size) / fam.size
    c1, c2, c3 = pick_constants(alpha)
    unavailable: list[str] = []

    uncapped = regret_bound_terms(n, s_max, mu_min, eta, horizon, c1, c2, c3)
    regret_bound = min(uncapped, s_max * mu_max * horizon)

    zeta = n / mu_min
    d = minimal_d(alpha, delta)
    gamma = b1 = kappa = u = theta = v0 = g0 = t0 = None
    if d is None:
        unavailable.append(f"no D with gamma(M,D) >= 1/(1+delta) for delta={delta:.6g}")
    else:
        gamma = gamma_of(alpha, d)
        b1 = 2 * n * d * (1 + eta)
        kappa = gamma * delta + gamma - 1
        if kappa <= 0:
            unavailable.append(f"gamma*delta + gamma - 1 = {kappa:.6g} <= 0")
        elif not math.isfinite(eta):
            unavailable.append("zero-violation constants need a finite eta")
        else:
            u = 2 * n / (mu_min * kappa) + 8 * n * d * (1 + eta) / kappa
            theta = 3 * kappa / (12 * zeta**2 + kappa * zeta)
            v0 = 8 / (kappa * theta)
            g0 = math.sqrt(n) * (math.log(v0 + 1) / theta + zeta + u)
            t0 = g0 / eps if eps > 0 else math.inf

    regret_ok = delta > 0 and eps <= delta / 2 and cfg.variant != "ucb-pc"
    violation_ok = kappa is not None and kappa > 0 and eps <= kappa / 2 and t0 is not None
    if not regret_ok:
        unavailable.append("regret guarantee not in force (needs delta > 0, epsilon <= delta/2)")
    if not violation_ok:
        unavailable.append("zero-violation guarantee not in force (needs epsilon <= kappa/2)")

    return BoundReport(
        alpha=alpha, c1=c1, c2=c2, c3=c3, d_rounds=d, gamma=gamma, b1=b1, zeta=zeta,
        kappa=kappa, u_const=u, theta=theta, v0=v0, g0=g0, t0=t0,
        regret_bound=regret_bound, regret_bound_uncapped=uncapped,
        delta=delta, epsilon=eps, eta=eta, horizon=horizon,
        regret_guarantee_in_force=regret_ok, violation_guarantee_in_force=violation_ok,
        unavailable=unavailable,
    )
