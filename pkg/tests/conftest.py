import numpy as np
import pytest

from entdet import normalize, parse_state

NAMED = {
    "ghz3": "(1/sqrt(2))(|000>+|111>)",
    "w3": "(1/sqrt(3))(|001>+|010>+|100>)",
    "cluster3": "(1/sqrt(8))(|000>+|001>+|010>-|011>+|100>+|101>-|110>+|111>)",
    "psi3": "(1/2)(|001>+|010>+|100>+|111>)",
    "phi3": "(1/2)(|000>+|011>+|101>+|110>)",
    "ghz4": "(1/sqrt(2))(|0000>+|1111>)",
    "w4": "(1/sqrt(4))(|0001>+|0010>+|0100>+|1000>)",
    "cluster4": "(1/sqrt(4))(|0000>+|0011>+|1100>-|1111>)",
    "psi4": "(1/sqrt(8))(|0001>+|0010>+|0100>+|0111>+|1000>+|1011>-|1101>+|1110>)",
    "phi4": "(1/sqrt(8))(|0000>+|0011>+|0101>+|0110>+|1001>+|1010>-|1100>+|1111>)",
}


def named(key):
    return normalize(parse_state(NAMED[key]))


@pytest.fixture
def ghz():
    return named("ghz3")


@pytest.fixture
def w_state():
    return named("w3")


def haar_unitary(d, rng):
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# -- acceptance summary ---------------------------------------------------------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
