import numpy as np
import pytest

from eulab.acceptance import default_perturbed, example_map, example_profile, example_t3_profile

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def s3_profile():
    return example_profile()


@pytest.fixture(scope="session")
def t3_profile():
    return example_t3_profile()


@pytest.fixture(scope="session")
def twist():
    return example_map()


@pytest.fixture(scope="session")
def perturbed():
    """``(Pi0, Pi)`` for the default (2,5) perturbation at eps = 1e-3."""
    return default_perturbed()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
