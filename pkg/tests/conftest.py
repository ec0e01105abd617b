import math

import pytest

from leedecay.model import make_model
from leedecay.spectral import spectral_density

FIG1 = dict(m0=3.0, channels=[(0.36, 0.0, 5.0)])
FIG2 = dict(m0=3.0, channels=[(0.36, 0.0, 5.0), (0.16, 0.5, 4.0)])
# symmetric window of half-width 50 around m0 approximates the infinite band
WIDE = dict(m0=3.0, channels=[(0.36, -47.0, 53.0)])

_ACCEPTANCE: list[str] = []


@pytest.fixture(scope="session")
def fig1_model():
    return make_model(**FIG1)


@pytest.fixture(scope="session")
def fig1_sd(fig1_model):
    return spectral_density(fig1_model)


@pytest.fixture(scope="session")
def fig2_sd():
    return spectral_density(make_model(**FIG2))


@pytest.fixture(scope="session")
def wide_sd():
    return spectral_density(make_model(**WIDE))


@pytest.fixture
def report():
    """Record one acceptance line; printed in the terminal summary."""

    def _report(name: str, ok: bool, detail: str = ""):
        _ACCEPTANCE.append(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


def exp_decay(gamma, t):
    return math.exp(-gamma * t)
