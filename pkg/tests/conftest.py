from __future__ import annotations

import mpmath
import pytest

from transpole.lateorder import compute_lambda
from transpole.oracle import build_linear_solution
from transpole.precision import PrecisionConfig

MUS = ("0.5", "1", "2")

_lambda_cache: dict = {}
_oracle_cache: dict = {}


def lam(mu: str, n: int = 1000):
    key = (mu, n)
    if key not in _lambda_cache:
        _lambda_cache[key] = compute_lambda(mpmath.mpf(mu), n)
    return _lambda_cache[key]


def sol(mu: str, prec_bits: int = 256):
    key = (mu, prec_bits)
    if key not in _oracle_cache:
        _oracle_cache[key] = build_linear_solution(mpmath.mpf(mu), PrecisionConfig(prec_bits))
    return _oracle_cache[key]


@pytest.fixture(autouse=True)
def _fixed_precision():
    # every test starts from mpmath's default context
    with mpmath.workprec(53):
        yield


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
