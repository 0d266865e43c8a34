import numpy as np
import pytest

from gksl_grape import ControlGrid, GateProblem, SystemParams, default_initial_controls


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def params():
    return SystemParams(omega=1.0, mu=0.1, gamma=0.01)


@pytest.fixture
def grid():
    return ControlGrid.uniform(5.0, 10)


@pytest.fixture
def h_problem():
    return GateProblem.for_gate("H")


@pytest.fixture
def x_problem():
    return GateProblem.for_gate("X")


@pytest.fixture
def paper_init(grid):
    return default_initial_controls(grid)


def random_density(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = z @ z.conj().T
    return rho / np.trace(rho)


def random_unitary(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion; a test that dies early records FAIL."""
    state = {}

    def record(number, passed, detail):
        state["line"] = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        return passed

    yield record
    if "line" not in state:
        state["line"] = f"{request.node.name}: FAIL  (no result recorded)"
    ACCEPTANCE_LINES.append(state["line"])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
