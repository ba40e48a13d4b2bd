import numpy as np
import pytest

from tpspace import PureStateSpace, Ray


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def ray(*components, sector=0):
    return Ray.from_vector(np.asarray(components, dtype=complex), sector)


def haar_unitary(rng, d):
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(X)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def hermitian(rng, d):
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (X + X.conj().T) / 2


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

C2 = PureStateSpace((2,))
C3 = PureStateSpace((3,))
C2C3 = PureStateSpace((2, 3))


# one summary line per acceptance criterion, shown after the test run
CRITERIA = {}


@pytest.fixture
def criterion():
    def record(number, title, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        CRITERIA[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[n])
