import numpy as np
import pytest

from lcfl.config import default_config_dict
from lcfl.environment import InstanceSpec

MEANS = [0.6, 0.68, 0.75, 0.73, 0.65, 0.7, 0.85, 0.95, 0.9, 0.8]
WEIGHTS = [0.6, 1.36, 2.25, 2.92, 3.25, 4.2, 5.95, 7.6, 8.1, 8]


@pytest.fixture(scope="session")
def synthetic():
    """The ten-arm singleton instance shipped as the default config."""
    return InstanceSpec.from_config(default_config_dict()["instance"])


def singleton_instance(means, targets):
    return InstanceSpec.from_config({"means": list(means), "targets": list(targets)})


def random_feasible_singletons(rng, n):
    means = rng.uniform(0.2, 1.0, n)
    share = rng.dirichlet(np.ones(n)) * rng.uniform(0.2, 0.9)
    return singleton_instance(means, share * means)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
