import mpmath
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from mpmath import mpc, mpf

from conftest import lam
from transpole.outer import a0_coefficients, build_outer_series, evaluate_truncated
from transpole.precision import DomainError, PrecisionConfig
from transpole.transseries import (A_closed, PoleError, RationalFunction, TransseriesParams,
                                   a_ode_residuals, build_coeff_table, evaluate_resummed,
                                   evaluate_transseries, table_residual, tau, transasymptotic,
                                   verify_A_odes)

P = PrecisionConfig()
MUS = ["0.5", "1", "2"]


def anchors(mu):
    mu = mpf(mu)
    i = mpc(0, 1)
    return {
        (1, 1): i / 2 + 1 / (8 * mu),
        (2, 1): 3 * i * mu / 2 + mpf(1) / 2 + 1 / (128 * mu**2),
        (3, 1): 10 * i * mu**2 + 55 * mu / 12 - 7 * i / 16 + 1 / (24 * mu) - i / (256 * mu**2)
        + 1 / (3072 * mu**3),
        (0, 2): mpc(-1),
        (1, 2): 2 * mu - 1 / (4 * mu),
        (2, 2): -12 * mu**2 - 7 * i * mu + mpf(1) / 4 + i / (8 * mu) - 1 / (32 * mu**2),
    }


@pytest.mark.parametrize("mu", MUS)
def test_table_anchors(mu):
    tb = build_coeff_table(mu, 3, 3)
    with P.workprec():
        for k, v in anchors(mu).items():
            assert abs(tb[k] - v) / abs(v) < mpf(10) ** -20, k
        assert tb[0, 0] == 0 and tb[0, 1] == 1


@pytest.mark.parametrize("mu", MUS)
def test_table_structure(mu):
    tb = build_coeff_table(mu, 6, 10)
    a0 = a0_coefficients(mu, 6)
    with P.workprec():
        assert tb.column(0) == a0
        for n in range(1, 11):
            assert tb[0, n] == (-1) ** (n + 1)
        assert table_residual(tb) < mpf(2) ** -(256 - 20)


def test_table_argument_errors():
    with pytest.raises(ValueError):
        build_coeff_table(1, 1, 4)


@pytest.mark.parametrize("mu", MUS)
def test_taylor_match(mu):
    tb = build_coeff_table(mu, 2, 12)
    with P.workprec():
        for m in range(3):
            tay = transasymptotic(m, mu).rational.taylor(12)
            for n in range(13):
                assert abs(tay[n] - tb[m, n]) <= mpf(2) ** -(256 - 20) * max(1, abs(tb[m, n]))


def test_denominators():
    for m, k in ((0, 1), (1, 2), (2, 3)):
        den = transasymptotic(m, 1).rational.den
        assert len(den) == k + 1
        assert [int(c.real) for c in den] == [mpmath.binomial(k, j) for j in range(k + 1)]


def test_A_examples():
    with P.workprec():
        assert A_closed(0, 0, 1) == 0
        assert A_closed(1, 0, 1) == mpc(0, -0.5)
        assert A_closed(2, 0, 1) == mpc(-0.25, -1)
        assert transasymptotic(0, 1).rational.taylor(6) == [0, 1, -1, 1, -1, 1, -1]
        assert transasymptotic(1, 1).rational.taylor(1)[1] == mpc(0.125, 0.5)
    with pytest.raises(PoleError):
        A_closed(0, -1, 1)
    with pytest.raises(ValueError):
        transasymptotic(3, 1)


def test_A_odes():
    rep = verify_A_odes(1, [mpc(0.3, 0.1)])
    assert rep.ok
    rep = verify_A_odes(2, [mpc(-0.5)])
    assert rep.residuals["A1"][0] < rep.threshold
    # the literal printed k = 1 relation is not satisfied
    assert min(rep.printed_k1) > 0.1


@settings(max_examples=10, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.sampled_from(MUS))
def test_A_odes_random(x, y, mu):
    t = mpc(x, y)
    assume(abs(t + 1) >= 0.5)  # samples stay away from the pole at tau = -1
    rep = verify_A_odes(mu, [t])
    assert rep.ok, rep.residuals


def test_rational_derivative():
    with P.workprec():
        f = RationalFunction((mpc(1), mpc(2), mpc(0, 3)), (mpc(1), mpc(1)))
        t = mpc("0.4", "-0.3")
        num = mpmath.diff(lambda s: f(s), t)
        assert abs(f.derivative()(t) - num) < mpf(10) ** -40


def test_tau():
    d = lam("1")
    p = TransseriesParams.active(d)
    with P.workprec():
        assert p.sigma == 2j * mpmath.pi * d.lambda_
        assert p.alpha == mpc(1, 0.5)
        q = TransseriesParams.inactive(1)
        assert tau(mpc(3, 4), q) == 0
        small = [abs(tau(R * mpmath.expjpi(0.125), p)) for R in (4, 6, 8, 10)]
        assert all(b < a for a, b in zip(small, small[1:]))
        alg = [abs(tau(R * mpmath.expjpi(0.25), p)) * R ** 1 for R in (4, 8, 16)]
        ratios = [b / a for a, b in zip(alg, alg[1:])]
        assert all(abs(r - 1) < 1e-20 for r in ratios)  # |tau| = |sigma| e^{pi/8} / R exactly
    with pytest.raises(DomainError):
        tau(0, p)


def test_resummed_sector1_collapse():
    q = TransseriesParams.inactive(1)
    t = build_outer_series(1, 3)
    for xi in (mpc(2, -3), mpc(-1, -5), mpc(0.5, -0.2)):
        with P.workprec():
            # A_m multiplies xi^(1-2m) and A_0(0) = 0, so m_terms = k keeps k - 1 algebraic terms
            assert evaluate_resummed(xi, q, 2) == evaluate_truncated(t, xi, 1)
            assert evaluate_resummed(xi, q, 3) == evaluate_truncated(t, xi, 2)
            assert evaluate_resummed(xi, q, 1) == 0


def test_resummed_vs_double_sum():
    d = lam("1")
    p = TransseriesParams.active(d)
    tb = build_coeff_table(1, 2, 15)
    tb16 = build_coeff_table(1, 2, 16)
    with P.workprec():
        for xi in (mpc(6, 2), mpc(5, 1.5), 6 * mpmath.expjpi(0.2)):
            t = tau(xi, p)
            assert abs(t) < 0.1
            diff = abs(evaluate_resummed(xi, p, 3) - evaluate_transseries(xi, p, tb, 3))
            omitted = max(abs(tb16[m, 16] * t**16 * xi ** (1 - 2 * m)) for m in range(3))
            assert diff <= 2 * omitted


def test_resummed_large_near_pole():
    from transpole.locator import predict_poles
    d = lam("1")
    p = TransseriesParams.active(d)
    pred = predict_poles(1, d, [5])[0]
    with P.workprec():
        assert abs(evaluate_resummed(pred.xi + mpc(1e-5, 1e-5), p, 2)) > 1e3
    with pytest.raises(PoleError) as info:
        from transpole.transseries import alpha_of
        # construct a point with tau exactly -1 by choosing sigma
        xi = mpc(5, 5)
        with P.workprec():
            s = -1 / (xi ** (-alpha_of(1)) * mpmath.exp(-xi**2 / 4))
        evaluate_resummed(xi, TransseriesParams(mpf(1), s, alpha_of(1)))
    assert info.value.M_estimate is not None
