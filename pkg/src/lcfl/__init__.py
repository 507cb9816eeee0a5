"""Fairness-constrained combinatorial bandits with pick-and-compare learning."""

from .bounds import BoundReport, compute_bounds
from .config import ConfigError, ExperimentConfig, load_config
from .environment import InstanceSpec, RewardStream, draw_rewards
from .feasible_sets import FeasibleFamily, SuperArm, enumerate_family, sample_distinct
from .metrics import RunTrace, cumulative_violation, pseudo_regret, zero_violation_point
from .oracle import InfeasibleFairness, OracleSolution, max_slack, solve_benchmark
from .policies import PolicyConfig, PolicyState, lcfl_step
from .runner import compare_policies, run
from .simulation import Diagnostics, simulate_replication

__version__ = "0.1.0"

__all__ = [
    "BoundReport", "ConfigError", "Diagnostics", "ExperimentConfig", "FeasibleFamily",
    "InfeasibleFairness", "InstanceSpec", "OracleSolution", "PolicyConfig", "PolicyState",
    "RewardStream", "RunTrace", "SuperArm", "compare_policies", "compute_bounds",
    "cumulative_violation", "draw_rewards", "enumerate_family", "lcfl_step", "load_config",
    "max_slack", "pseudo_regret", "run", "sample_distinct", "simulate_replication",
    "solve_benchmark", "zero_violation_point",
]
