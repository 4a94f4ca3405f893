import numpy as np
import pytest

from spheroidal import ModeParams, wronskian
from spheroidal.integrator import Problem

ACCEPTANCE = {}


def record(number: int, passed: bool, summary: str) -> None:
    ACCEPTANCE[number] = (bool(passed), summary)
    print(f"ACCEPTANCE {number:2d} {'PASS' if passed else 'FAIL'}  {summary}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {text}")


@pytest.fixture(scope="session", autouse=True)
def warm_jit():
    """Compile the integrator once so timed checks measure steady state."""
    wronskian(Problem.from_params(ModeParams(0, 0, 0)), 1.0)
    wronskian(Problem.from_params(ModeParams(2, 2, 4 + 0.4j)), 10.0 + 1j)


@pytest.fixture(scope="session")
def p424():
    return ModeParams(2, 2, 4 + 0.4j)


@pytest.fixture(scope="session")
def track424(p424):
    from spheroidal.homotopy import track_spectrum

    return track_spectrum(p424, 15, reverse=True)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)
