import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mpc, mpf

from transpole.precision import (DomainError, PrecisionConfig, cexp, clog, cpow, erf_real, log_gamma)

P = PrecisionConfig()


def close(a, b, bits=P.prec_bits - 8):
    return abs(mpc(a) - mpc(b)) <= mpf(2) ** -bits * max(1, abs(mpc(b)))


def test_config_validation():
    assert P.prec_bits == 256
    assert P.series_tol >= mpf(2) ** (1 - 256)
    with pytest.raises(ValueError):
        PrecisionConfig(32)
    with pytest.raises(ValueError):
        PrecisionConfig(128, series_tol=0)
    with pytest.raises(ValueError):
        PrecisionConfig(64, series_tol=mpf(2) ** -100)


def test_elementary_examples():
    with P.workprec():
        assert cexp(0) == 1
        assert close(cexp(mpc(0, mpmath.pi)), -1)
        assert clog(1) == 0
        assert close(clog(-1), mpc(0, mpmath.pi))
        assert close(clog(2j), mpc(mpmath.log(2), mpmath.pi / 2))
        assert cpow(mpc(3, 1), 0) == 1
        assert close(cpow(4, 0.5), 2)
        assert close(cpow(1j, 1j), mpmath.exp(-mpmath.pi / 2))


def test_cexp_against_double_precision():
    z = -(mpc("3.545", "3.545")) ** 2 / 4
    with P.workprec():
        v = cexp(z)
    with mpmath.workprec(512):
        ref = mpmath.exp(mpc(z))
    with P.workprec():
        assert abs(v - ref) / abs(ref) < mpf(2) ** -(256 - 8)


def test_domain_errors():
    with pytest.raises(DomainError):
        clog(0)
    with pytest.raises(DomainError):
        cpow(0, -1)
    assert cpow(0, 2) == 0
    for z in (0, -1, -7):
        with pytest.raises(DomainError):
            log_gamma(z)


def test_log_gamma_values():
    with P.workprec():
        assert abs(log_gamma(1)) < mpf(2) ** -250
        assert close(log_gamma(5), mpmath.log(24))
        assert close(log_gamma(0.5), mpmath.log(mpmath.sqrt(mpmath.pi)))


def test_erf():
    with P.workprec():
        assert erf_real(0) == 0
        assert abs(erf_real(30) - 1) < P.series_tol
        assert erf_real(-1.3) == -erf_real(1.3)


finite = st.floats(min_value=-6, max_value=6, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=-6 * math.log(10), max_value=6 * math.log(10)),
       st.floats(min_value=-3.1, max_value=3.1))
def test_exp_log_round_trip(logr, theta):
    with P.workprec():
        z = mpmath.exp(mpf(logr)) * mpmath.expj(mpf(theta))
        back = cexp(clog(z))
        ulp = mpf(2) ** (int(mpmath.floor(mpmath.log(abs(z), 2))) + 1 - 256)
        assert abs(back - z) <= 16 * ulp


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=1, max_value=50), st.floats(min_value=-50, max_value=50))
def test_gamma_recurrence(x, y):
    with P.workprec():
        z = mpc(x, y)
        ratio = mpmath.exp(log_gamma(z + 1) - log_gamma(z))
        assert abs(ratio - z) / abs(z) <= mpf(2) ** -(256 - 12)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=64, max_value=400), finite, finite, finite, finite, finite, finite)
def test_field_axioms(prec, a, b, c, d, e, f):
    with mpmath.workprec(prec):
        x, y, z = mpc(a, b), mpc(c, d), mpc(e, f)
        ulp = mpf(2) ** -prec
        scale = (abs(x) + 1) * (abs(y) + 1) * (abs(z) + 1)
        assert abs((x + y) + z - (x + (y + z))) <= 4 * ulp * (abs(x) + abs(y) + abs(z) + 1)
        assert abs((x * y) * z - x * (y * z)) <= 8 * ulp * scale


def test_determinism():
    with P.workprec():
        z = mpc("1.234", "-0.77")
        assert cexp(z) == cexp(z)
        assert log_gamma(z + 10) == log_gamma(z + 10)
