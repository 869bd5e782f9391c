import numpy as np
import pytest

from mcckf.model import StateSpaceModel

ACCEPTANCE_LINES = []


def random_spd(rng, n, floor=0.1):
    A = rng.standard_normal((n, n))
    return A @ A.T + floor * np.eye(n)


def random_model(rng, n, m, q):
    F = rng.standard_normal((n, n))
    F /= max(1.0, np.max(np.abs(np.linalg.eigvals(F))) / 0.95)
    return StateSpaceModel(
        F=F,
        G=rng.standard_normal((n, q)),
        H=rng.standard_normal((m, n)),
        Q=random_spd(rng, q),
        R=random_spd(rng, m),
        x0=rng.standard_normal(n),
        P0=random_spd(rng, n),
    )


def simulate_gaussian(rng, model, K):
    x = model.x0 + model.P0_sqrt @ rng.standard_normal(model.n)
    ys = []
    for _ in range(K):
        ys.append(model.H @ x + model.R_sqrt @ rng.standard_normal(model.m))
        x = model.F @ x + model.G @ (model.Q_sqrt @ rng.standard_normal(model.q))
    return np.array(ys)


def rel(a, b):
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / np.linalg.norm(b)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def scalar_model():
    return StateSpaceModel(F=[[1.0]], G=[[0.0]], H=[[1.0]], Q=[[1.0]], R=[[1.0]], x0=[0.0], P0=[[1.0]])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
