import numpy as np
import pytest

from randgsc.scenario import (
    RngStream,
    ScenarioSpec,
    make_covariance_model,
    sample_training,
    split_channels,
)


def make_instance(n, k, j=None, seed=0, theta=75.0):
    """(model, soi, data) for a random scenario of size n with k samples."""
    j = j if j is not None else max(1, min(k, n - 1) // 2)
    spec = ScenarioSpec(n=n, j=j, k=k, theta_deg=theta)
    rng = RngStream(seed, (99,))
    model, soi = make_covariance_model(spec, rng)
    data = split_channels(soi, sample_training(model, k, rng.child(50)))
    return model, soi, data


@pytest.fixture
def instance():
    return make_instance


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record the outcome of an acceptance criterion for the end-of-run summary."""
    def record(number, passed, detail):
        _CRITERIA[number] = (bool(passed), detail)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"CRITERION {number}: {'PASS' if passed else 'FAIL'} - {detail}")
