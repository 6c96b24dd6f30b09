import numpy as np
import pytest

from spinwalk.hilbert import BasisIndex, Boundary, Lattice, StateVector


def random_state(lattice, rng):
    basis = BasisIndex(lattice)
    amps = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    return StateVector(amps / np.linalg.norm(amps), basis)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=[Boundary.PERIODIC, Boundary.REFLECTIVE], ids=["p", "b"])
def boundary(request):
    return request.param


ACCEPTANCE_LINES = []


def report(number: int, ok: bool, detail: str) -> bool:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append((number, line))
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
