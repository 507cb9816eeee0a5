import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lcfl.bounds import compute_bounds, gamma_of, minimal_d, pick_constants, regret_bound_terms
from lcfl.oracle import max_slack
from lcfl.policies import PolicyConfig


def test_half_inclusion_constants():
    c1, c2, c3 = pick_constants(0.5)
    assert c1 == pytest.approx(3.0)
    assert c2 == pytest.approx(1.0)
    assert c3 == pytest.approx(math.log(2))


def test_full_inclusion_constants():
    assert pick_constants(1.0) == (0.0, 0.0, math.inf)


def test_minimal_d_example():
    d = minimal_d(0.3, 0.2)
    assert d == 6
    assert gamma_of(0.3, 6) == pytest.approx(1 - 0.7**6)
    assert gamma_of(0.3, 6) == pytest.approx(0.882, abs=5e-4)


@given(st.floats(0.01, 0.99), st.floats(1e-4, 5.0))
def test_minimal_d_is_minimal(alpha, delta):
    d = minimal_d(alpha, delta)
    target = 1 / (1 + delta)
    assert gamma_of(alpha, d) >= target
    assert d == 1 or gamma_of(alpha, d - 1) < target


def test_no_d_without_slack():
    assert minimal_d(0.3, 0.0) is None


@given(st.floats(0.01, 1.0))
def test_gap_constants_nonnegative(alpha):
    c1, c2, c3 = pick_constants(alpha)
    assert c1 >= -1e-12 and c2 >= -1e-12 and c3 > 0


def test_regret_bound_decreases_in_eta():
    args = dict(n=10, s_max=1, mu_min=0.6, horizon=200_000, c1=13.2, c2=2.3, c3=0.36)
    vals = [regret_bound_terms(eta=e, **args) for e in (1, 10, 100, 1000)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_synthetic_report(synthetic):
    delta = max_slack(synthetic)
    rep = compute_bounds(synthetic, None, PolicyConfig(eta=100, m_picks=3, epsilon=1e-5), 200_000, delta)
    assert rep.alpha == pytest.approx(0.3)
    assert rep.regret_guarantee_in_force and rep.violation_guarantee_in_force
    assert rep.regret_bound == min(rep.regret_bound_uncapped, 0.95 * 200_000)
    assert rep.kappa == pytest.approx(rep.gamma * delta + rep.gamma - 1)
    assert rep.b1 == 2 * 10 * rep.d_rounds * 101
    zeta = 10 / 0.6
    assert rep.theta == pytest.approx(3 * rep.kappa / (12 * zeta**2 + rep.kappa * zeta))
    assert rep.v0 == pytest.approx(8 / (rep.kappa * rep.theta))
    assert rep.t0 == pytest.approx(rep.g0 / 1e-5)
    d = rep.to_dict()
    assert d["c3"] == pytest.approx(-math.log(0.7))


def test_preconditions_reported(synthetic):
    rep = compute_bounds(synthetic, None, PolicyConfig(eta=100, m_picks=1, epsilon=0.05), 1000, 0.04)
    assert not rep.regret_guarantee_in_force
    assert not rep.violation_guarantee_in_force
    assert rep.unavailable
    tight = compute_bounds(synthetic, None, PolicyConfig(eta=100, m_picks=1), 1000, 0.001)
    # gamma*delta + gamma - 1 can be negative when the slack is tiny.
    if tight.kappa is not None and tight.kappa <= 0:
        assert tight.t0 is None


def test_full_sample_report(synthetic):
    rep = compute_bounds(synthetic, None, PolicyConfig(variant="pessimistic-optimistic", m_picks=None), 1000, 0.04)
    assert rep.alpha == 1 and rep.c3 == math.inf and rep.d_rounds == 1
    assert rep.to_dict()["c3"] == "inf"
