import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from isonorm.constructions import GroupAction, group_as_groupoid, transformation_groupoid
from isonorm.groups import cyclic_group

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def z2():
    return group_as_groupoid(cyclic_group(2), name="z2")


@pytest.fixture
def swap():
    """Z/2 swapping two points: 4 elements, 2 units, trivial isotropy."""
    act = GroupAction.from_function(cyclic_group(2), ["a", "b"],
                                    lambda g, x: x if g == "0" else {"a": "b", "b": "a"}[x])
    return transformation_groupoid(act, name="swap")


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(acceptance_log.LINES):
            terminalreporter.write_line(acceptance_log.LINES[k])
