from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from rectipoly.constructions import make_cube, make_frame_torus, make_octopus, make_octopus_cubes

settings.register_profile(
    "repo", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")

# filled by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def cube():
    return make_cube()


@pytest.fixture(scope="session")
def torus():
    return make_frame_torus()


@pytest.fixture(scope="session")
def octopus():
    return make_octopus()


@pytest.fixture(scope="session")
def octopus_cubes():
    return make_octopus_cubes()
