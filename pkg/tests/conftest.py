import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


def random_spd(rng, d):
    M = rng.standard_normal((d, d))
    return M.T @ M + np.eye(d)


def rel_fro(A, B):
    return np.linalg.norm(A - B) / np.linalg.norm(B)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
