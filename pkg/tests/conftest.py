import sys
import numpy as np
import pytest
from scipy.linalg import expm


def spin_matrices(ell2):
    """Independent spin-j matrices (j = ell2 / 2) in the descending-m basis."""
    d = ell2 + 1
    j = ell2 / 2
    m = j - np.arange(d)
    jp = np.zeros((d, d))
    for i in range(1, d):
        jp[i - 1, i] = np.sqrt(j * (j + 1) - m[i] * (m[i] + 1))
    jz = np.diag(m)
    jy = (jp - jp.T) / 2j
    return jz, jp, jy


def rotation_oracle(ell2, alpha, beta, gamma=0.0):
    jz, _, jy = spin_matrices(ell2)
    return expm(-1j * alpha * jz) @ expm(-1j * beta * jy) @ expm(-1j * gamma * jz)


@pytest.fixture
def rng():
    return np.random.default_rng(20211)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
