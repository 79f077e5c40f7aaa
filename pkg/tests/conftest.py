import numpy as np
import pytest

from fdaclust import FunctionalSample, Grid

_ACCEPTANCE_LINES = []


def record_criterion(name: str, passed: bool, detail: str) -> str:
    line = f"{'PASS' if passed else 'FAIL'}  {name}: {detail}"
    _ACCEPTANCE_LINES.append(line)
    print(line)
    return line


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_grid():
    return Grid.linspace(0.0, 1.0, 30)


def make_sample(values, grid=None, labels=None):
    values = np.asarray(values, dtype=float)
    grid = grid or Grid.linspace(0.0, 1.0, values.shape[1])
    return FunctionalSample(values, grid, labels)


def two_blobs(rng, n_per=20, centers=((0.0, 0.0), (10.0, 10.0)), radius=1.0):
    pts, labels = [], []
    for g, c in enumerate(centers):
        ang = rng.uniform(0, 2 * np.pi, n_per)
        r = radius * np.sqrt(rng.uniform(0, 1, n_per))
        pts.append(np.c_[c[0] + r * np.cos(ang), c[1] + r * np.sin(ang)])
        labels.append(np.full(n_per, g))
    return np.vstack(pts), np.concatenate(labels)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
