import numpy as np
import pytest

from delo import PointSet

_acceptance_outcomes: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criteria")


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        _acceptance_outcomes[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for nodeid in sorted(_acceptance_outcomes):
        name = nodeid.split("::")[-1]
        outcome = _acceptance_outcomes[nodeid].upper()
        terminalreporter.write_line(f"{name}: {outcome}")


def random_pointset(seed: int, n: int, k: int, lo=-1.0, hi=1.0) -> PointSet:
    rng = np.random.default_rng(seed)
    return PointSet(rng.uniform(lo, hi, size=(n, k)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
