from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qnash.oracle import MatrixInstance, OracleHandle

settings.register_profile(
    "repo", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


def F(text):
    return Fraction(text)


def mat(rows, mode="exact"):
    return MatrixInstance.from_rows(rows, mode)


def naive_equilibrium_check(rows, x, y):
    """Independent of the package: plain loops over Python Fractions."""
    n, m = len(rows), len(rows[0])
    row_pay = [sum(rows[i][j] * y[j] for j in range(m)) for i in range(n)]
    col_pay = [sum(rows[i][j] * x[i] for i in range(n)) for j in range(m)]
    v = sum(x[i] * row_pay[i] for i in range(n))
    return max(row_pay) <= v <= min(col_pay), v


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def oracle_of():
    def make(rows, mode="exact"):
        return OracleHandle(mat(rows, mode))

    return make


@pytest.fixture
def ip3():
    """I + E_{1,2}/2 with n = 3 (0-based perturbed entry (0, 1))."""
    return mat([[1, F("1/2"), 0], [0, 1, 0], [0, 0, 1]])


@pytest.fixture
def thm1_4_2():
    """Lower-bound instance n=4, k=2, hat i=3, hat j=1 (1-based)."""
    return mat([[1, 0, 3, 3], [0, 1, 3, 3], [2, 0, 3, 3], [0, 0, 3, 3]])


@pytest.fixture
def gap3():
    q = F("1/4")
    return mat([[1, 1 + q, 1 + q], [1 - q, 1, 1], [1 - q, 1, 1]])


ACCEPTANCE_LINES: list[str] = []


def record_criterion(name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
