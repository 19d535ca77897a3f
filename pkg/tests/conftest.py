import sys

import numpy as np
import pytest

from cglbranch.spectral import BoxDomain, group_for_modes, nth_group


@pytest.fixture(scope="session")
def square():
    return BoxDomain.cube(2)


@pytest.fixture(scope="session")
def square_group(square):
    """Double eigenvalue 5 on (0, pi)^2: modes (1,2), (2,1)."""
    return nth_group(square, 2)


@pytest.fixture(scope="session")
def cube_group():
    """Triple eigenvalue 6 on (0, pi)^3."""
    return nth_group(BoxDomain.cube(3), 2)


@pytest.fixture(scope="session")
def interval():
    return BoxDomain.interval()


@pytest.fixture(scope="session")
def sigma4_group():
    """Triple eigenvalue 50 pi^2 of the unit square, u_3 = sin(5 pi x) sin(5 pi y)."""
    return group_for_modes([(1, 7), (7, 1), (5, 5)], BoxDomain((1, 1)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
