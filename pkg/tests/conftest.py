import numpy as np
import pytest

# verdict lines appended by test_acceptance.py, echoed in the summary
ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_blobs(seed=7, n_target=60, n_outlier=60, dim=5, shift=8.0):
    """Two Gaussian blobs: target at the origin (sigma 1), outliers shifted by
    ``shift`` along the all-ones direction. Returns (X_target, X_outlier),
    both dim x n."""
    gen = np.random.default_rng(seed)
    target = gen.standard_normal((dim, n_target))
    outlier = gen.standard_normal((dim, n_outlier)) + shift
    return target, outlier


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance checks")
