import os

import numpy as np
import pytest

from blockdeim.data import gen_random_orthonormal

EPS_TRAP = 1e-15


def greedy_trap_basis(eps=EPS_TRAP):
    """The 3 x 2 singular-vector matrix where greedy DEIM picks badly."""
    a = np.sqrt(3) / 3
    c = np.sqrt(2) / 2
    return np.array([[a + eps, 0.0],
                     [a, c + eps],
                     [a, -c]])


@pytest.fixture
def trap():
    return greedy_trap_basis()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def orthonormal_batch(count, m, k, seed=0):
    return [gen_random_orthonormal(m, k, seed + t) for t in range(count)]


def pytest_collection_modifyitems(config, items):
    if os.environ.get("BLOCKDEIM_FULL_SCALE") == "1":
        return
    skip = pytest.mark.skip(reason="set BLOCKDEIM_FULL_SCALE=1 for full-scale runs")
    for item in items:
        if "fullscale" in item.keywords:
            item.add_marker(skip)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
