import math
import warnings

import mpmath
import pytest
from mpmath import mpc, mpf

from conftest import lam
from transpole.lateorder import (ConvergenceError, LambdaCache, classify_sector, compute_lambda,
                                 gamma_index, inner_coefficients, late_order_ratio, prefactor,
                                 raw_lambda_sequence, richardson, singulant, stokes_multiplier, u_exp)
from transpole.outer import build_outer_series
from transpole.precision import DomainError, PrecisionConfig

P = PrecisionConfig()

# Lambda(mu=1), frozen from the extrapolated n = 1000 run.
LAMBDA_1 = ("0.00519804613834223186334", "-0.148245312977227683736")


def test_inner_coefficients():
    v = inner_coefficients(1, 3).vhat
    with P.workprec():
        assert v[0] == mpc(0, -0.25)
        assert v[1] == mpc("-0.03125", "-0.125")
        # independent one-step evaluation of the recurrence
        assert v[1] == mpf(0.5) * v[0] + mpf(0.5) * v[0] ** 2


@pytest.mark.parametrize("mu", ["0.5", "1", "3"])
def test_inner_recurrence_symmetric_form(mu):
    # V_n = (n - 1/2) V_{n-1} + 1/(2 sqrt mu) sum_j V_j V_{n-1-j}
    v = inner_coefficients(mu, 30).vhat
    with P.workprec():
        m = mpf(mu)
        for n in range(1, 31):
            s = mpmath.fsum(v[j] * v[n - 1 - j] for j in range(n))
            ref = (n - mpf(0.5)) * v[n - 1] + s / (2 * mpmath.sqrt(m))
            assert abs(ref - v[n]) <= mpf(2) ** -240 * abs(v[n])


@pytest.mark.parametrize("mu", ["0.5", "1", "2"])
def test_inner_matches_outer(mu):
    # Vhat_n (4 mu)^(n + 1/2) = a_{n+1}^(0): the inner series is the outer one rescaled
    from transpole.outer import a0_coefficients
    v = inner_coefficients(mu, 20).vhat
    a = a0_coefficients(mu, 21)
    with P.workprec():
        m = mpf(mu)
        for n in range(21):
            assert abs(v[n] * (4 * m) ** (n + mpf(0.5)) - a[n + 1]) <= mpf(2) ** -240 * abs(a[n + 1])


def test_lambda_value_mu1():
    d = lam("1")
    with P.workprec():
        assert abs(d.lambda_ - mpc(*LAMBDA_1)) < mpf(10) ** -17
        assert d.gamma == mpc(0.5, -0.25)
        assert d.n_used == 1000
        assert d.converged_digits >= 6
        # the plain ratio has only O(1/n) accuracy
        assert 1e-6 < abs(d.raw_lambda - d.lambda_) < 1e-4


def test_lambda_cauchy_property():
    inner = inner_coefficients(1, 1000)
    with P.workprec():
        seq = raw_lambda_sequence(inner)
        est = {n: richardson(seq, n) for n in (100, 125, 200, 250, 400, 500, 1000)}
        diffs = [abs(est[n] - est[2 * n]) for n in (100, 125, 200, 250, 500)]
    assert all(b < a for a, b in zip(diffs, diffs[1:]))
    assert diffs[-1] < 1e-6


def test_lambda_errors():
    with pytest.raises(ValueError):
        compute_lambda(1, 50)
    with pytest.raises(ValueError):
        compute_lambda(-1, 200)
    with pytest.warns(RuntimeWarning, match="lower half-plane"):
        compute_lambda("0.14", 100)


def test_convergence_error_carries_history(monkeypatch):
    import transpole.lateorder as lo

    calls = iter([mpc(0), mpc(1e-3), mpc(1), mpc(100), mpc(0), mpc(0)])
    monkeypatch.setattr(lo, "richardson", lambda seq, n, order=8: mpc(n) ** 2)
    with pytest.raises(ConvergenceError) as info:
        compute_lambda(1, 200)
    assert len(info.value.history) == 3


def test_cache_round_trip(tmp_path):
    cache = LambdaCache(tmp_path / "lambda.jsonl")
    d1 = compute_lambda("0.7", 120, cache=cache)
    d2 = compute_lambda("0.7", 120, cache=cache)
    with P.workprec():
        assert abs(d1.lambda_ - d2.lambda_) < mpf(10) ** -70
    assert len(cache.records()) == 1
    # different precision is a different key
    compute_lambda("0.7", 120, PrecisionConfig(128), cache=cache)
    assert len(cache.records()) == 2
    with open(cache.path, "a") as fh:
        fh.write('{"torn": ')
    assert len(cache.records()) == 2


def test_singulant_and_prefactor():
    d = lam("1")
    with P.workprec():
        assert singulant(0, 1) == 0
        assert singulant(2, 1) == 1
        z = singulant(7 * mpmath.expjpi(0.25), 1)
        assert abs(z.real) < mpf(10) ** -70
        assert abs(abs(prefactor(3.7, d)) - abs(d.lambda_)) < mpf(10) ** -70
        v = prefactor(mpc(0, 2.5), d)
        assert abs(abs(v) - abs(d.lambda_) * mpmath.exp(mpmath.pi / 4)) < mpf(10) ** -70
        # conjugate point on the other side of the real axis: modulus ratio exp(arg/mu)
        xi = mpc(2, 1)
        r = abs(prefactor(xi, d) / prefactor(mpmath.conj(xi), d))
        assert abs(r - mpmath.exp(mpmath.arg(xi))) < mpf(10) ** -70
    with pytest.raises(DomainError):
        prefactor(0, d)


def test_u_exp_identities():
    d = lam("1")
    with P.workprec():
        v = u_exp(mpc(5, 5), d)
        assert abs(abs(v) - 2 * mpmath.pi * abs(d.lambda_) * abs(mpc(5, 5) ** mpc(0, -0.5))) < mpf(10) ** -60
        v3 = u_exp(3, d)
        assert abs(abs(v3) - 2 * mpmath.pi * abs(d.lambda_) * mpmath.exp(-mpf(9) / 4)) < mpf(10) ** -70
        for xi in (mpc(1.3, -0.2), mpc(-4, 2.5), mpc(0.1, 7)):
            c = u_exp(xi, d) * mpmath.exp(xi**2 / 4) * xi ** mpc(0, 0.5)
            assert abs(c - 2j * mpmath.pi * d.lambda_) < mpf(10) ** -60


def test_stokes_multiplier():
    with P.workprec():
        assert stokes_multiplier(0, 3) == mpf(0.5)
        assert stokes_multiplier(-50, 10) < mpf(10) ** -100
        assert abs(stokes_multiplier(50, 10) - 1) < mpf(10) ** -100
        vals = [stokes_multiplier(t, 4) for t in (-1, -0.5, 0, 0.5, 1)]
        assert all(0 <= a < b <= 1 for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        stokes_multiplier(0.1, 0)


@pytest.mark.parametrize("arg,label,sid", [
    (-math.pi / 2, "no_exponential", 1),
    (math.pi / 4, "anti_stokes_curve", 3),
    (3 * math.pi / 4, "anti_stokes_curve", 4),
    (0.0, "stokes_curve", 2),
    (math.pi, "stokes_curve", 4),
    (0.3, "small_exponential", 2),
    (1.5, "large_exponential", 3),
    (2.8, "small_exponential", 4),
    (-0.3, "no_exponential", 1),
])
def test_classify_sector(arg, label, sid):
    sc = classify_sector(2 * mpmath.expj(arg), 1)
    assert (sc.label, sc.sector_id) == (label, sid)


def test_classify_scale_invariance():
    for arg in (-2.5, -1.0, 0.2, 0.9, 2.0, 3.0):
        ref = classify_sector(mpmath.expj(arg), 1)
        for c in (1e-3, 0.5, 7, 1e4):
            assert classify_sector(c * mpmath.expj(arg), 2) == ref
    with pytest.raises(DomainError):
        classify_sector(0, 1)


def test_late_order_ratio():
    t = build_outer_series(1, 40)
    r = late_order_ratio(t, mpc(0, -2), 40)
    assert abs(r - 1) < 0.05


def test_singularity_strength():
    # n = 0 ansatz term Lambda z^(-i/2mu) Gamma(gamma) / (z^2/4mu)^gamma has |z|-exponent -1
    for mu in ("0.5", "1", "2"):
        with P.workprec():
            g = gamma_index(mu)
            assert -2 * g.real == -1
            assert g.imag + 1 / (4 * mpf(mu)) == 0
