import numpy as np
import pytest

from spinn import _backend
from spinn.data import Dataset
from spinn.losses import Binary, Continuous, Survival


@pytest.fixture(params=_backend.available())
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def make_dataset(kind, n=40, d=5, seed=0, ties=False, censor=0.3):
    r = np.random.default_rng(seed)
    X = r.standard_normal((n, d))
    signal = X[:, 0] - 0.5 * X[:, 1] ** 2
    if kind == "regression":
        return Dataset(X, Continuous(signal + 0.1 * r.standard_normal(n)))
    if kind == "classification":
        return Dataset(X, Binary((signal + r.standard_normal(n) > 0).astype(float)))
    time = r.exponential(np.exp(-signal))
    if ties:
        time = np.round(time * 4) / 4 + 0.25
    event = (r.random(n) > censor).astype(float)
    event[0] = 1.0
    return Dataset(X, Survival(time, event))


KINDS = ("regression", "classification", "survival")


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
