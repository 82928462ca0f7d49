import mpmath
import numpy as np
import pytest


def binary_expansion(constant, nbits: int) -> np.ndarray:
    """Leading ``nbits`` bits of a constant's binary expansion (integer part included)."""
    with mpmath.workprec(nbits + 64):
        value = constant()
        intbits = int(mpmath.floor(mpmath.log(value, 2))) + 1
        v = int(mpmath.floor(value * mpmath.mpf(2) ** (nbits - intbits)))
    s = bin(v)[2:]
    assert len(s) == nbits
    return np.frombuffer(s.encode(), np.uint8) - ord("0")


@pytest.fixture(scope="session")
def e_bits():
    return binary_expansion(lambda: mpmath.e, 1_000_000)


@pytest.fixture(scope="session")
def pi_bits_100():
    return binary_expansion(lambda: mpmath.pi, 100)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
