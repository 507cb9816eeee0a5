import numpy as np
import pytest

from lcfl.environment import InstanceError, InstanceSpec, RewardStream, draw_rewards
from lcfl.feasible_sets import k_subsets

from conftest import singleton_instance


def test_certain_arm_always_pays():
    inst = singleton_instance([1.0, 0.5], [0.1, 0.1])
    rng = np.random.default_rng(0)
    for _ in range(200):
        assert draw_rewards(inst, inst.family.member(0), rng) == [(0, 1)]


def test_placeholder_draws_nothing():
    inst = singleton_instance([0.5, 0.5], [0.1, 0.1])
    assert draw_rewards(inst, None, np.random.default_rng(0)) == []
    assert draw_rewards(inst, [0, 0], np.random.default_rng(0)) == []


def test_non_member_rejected():
    inst = singleton_instance([0.5, 0.5], [0.1, 0.1])
    with pytest.raises(InstanceError):
        draw_rewards(inst, [1, 1], np.random.default_rng(0))


def test_empirical_mean():
    inst = singleton_instance([0.6, 0.3], [0.1, 0.1])
    x = RewardStream(inst, 11, 0).outcomes(0, 100_000)[:, 0]
    assert abs(x.mean() - 0.6) <= 0.005


def test_lag_one_autocorrelation(synthetic):
    x = RewardStream(synthetic, 5, 3).outcomes(0, 100_000).astype(float)
    for n in range(synthetic.num_arms):
        assert abs(np.corrcoef(x[:-1, n], x[1:, n])[0, 1]) <= 0.02


def test_arms_are_uncorrelated(synthetic):
    x = RewardStream(synthetic, 5, 3).outcomes(0, 50_000).astype(float)
    c = np.corrcoef(x.T)
    assert np.max(np.abs(c - np.eye(synthetic.num_arms))) <= 0.03


def test_stream_is_deterministic_and_chunk_independent(synthetic):
    a = RewardStream(synthetic, 9, 2).uniforms(0, 10_000)
    b = RewardStream(synthetic, 9, 2, chunk_rounds=4096)
    pieces = np.concatenate([b.uniforms(0, 5000), b.uniforms(5000, 10_000)])
    assert np.array_equal(a, pieces)
    assert np.array_equal(RewardStream(synthetic, 9, 2).uniforms(4090, 4100), a[4090:4100])
    assert not np.array_equal(RewardStream(synthetic, 9, 3).uniforms(0, 100), a[:100])


def test_round_reward_bounded_by_largest_member():
    inst = InstanceSpec.from_config({"means": [0.9] * 6, "targets": [0.05] * 6,
                                     "family": {"type": "k_subsets", "k": 3}})
    stream = RewardStream(inst, 1, 0)
    rng = np.random.default_rng(4)
    for t in range(500):
        member = inst.family.member(int(rng.integers(inst.family.size)))
        assert sum(d.value for d in stream.draw(t, member)) <= inst.s_max


@pytest.mark.parametrize("block, msg", [
    ({"means": [0.0, 0.5], "targets": [0.1, 0.1]}, "mean"),
    ({"means": [0.5, 1.2], "targets": [0.1, 0.1]}, "mean"),
    ({"means": [0.5, 0.5], "targets": [0.0, 0.1]}, "target"),
    ({"means": [0.5, 0.5], "targets": [0.1]}, "shape"),
    ({"means": [0.5, 0.5], "targets": [0.1, 0.1], "num_arms": 3}, "num_arms"),
])
def test_instance_validation(block, msg):
    with pytest.raises(InstanceError, match=msg):
        InstanceSpec.from_config(block)


def test_member_means():
    inst = InstanceSpec.from_config({"means": [0.2, 0.4, 0.8], "targets": [0.01] * 3,
                                     "family": {"type": "k_subsets", "k": 2}})
    assert np.allclose(inst.member_means(), [0.6, 1.0, 1.2])
    assert inst.s_max == 2 and inst.mu_min == 0.2
