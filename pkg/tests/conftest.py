import numpy as np
import pytest


def random_spd(rng, n, lo=0.2, hi=3.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (q * rng.uniform(lo, hi, n)) @ q.T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion."""
    def _report(number, passed, detail):
        ACCEPTANCE_LINES.append((number, f"{'PASS' if passed else 'FAIL'}  criterion {number:>2}: {detail}"))
        print(ACCEPTANCE_LINES[-1][1])
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
