from collections import OrderedDict

import numpy as np
import pytest

from beliefpool.observation import two_hypothesis_exponential
from beliefpool.topology import (
    NONREGULAR_24_EDGES,
    build_d_regular,
    build_fully_connected_uniform,
    build_lazy_metropolis,
)

BETAS = [0.500, 0.300, 0.025, 0.750, 1.200, 2.250, 0.900, 1.0, 0.250, 0.025]

# criterion id -> list of (check, ok, detail); filled by test_acceptance
ACCEPTANCE = OrderedDict()


@pytest.fixture(scope="session")
def paper_model():
    return two_hypothesis_exponential(BETAS)


@pytest.fixture(scope="session")
def ring2():
    return build_d_regular(10, 2, 0.05)


@pytest.fixture(scope="session")
def ring3():
    return build_d_regular(10, 3, 0.05)


@pytest.fixture(scope="session")
def uniform10():
    return build_fully_connected_uniform(10)


@pytest.fixture(scope="session")
def nonregular():
    return build_lazy_metropolis(NONREGULAR_24_EDGES, 0.05)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, checks in ACCEPTANCE.items():
        ok = all(c[1] for c in checks)
        detail = "; ".join(f"{name} {'ok' if good else 'FAILED'}: {d}" for name, good, d in checks)
        terminalreporter.write_line(f"criterion {crit:>2}: {'PASS' if ok else 'FAIL'}  [{detail}]")
