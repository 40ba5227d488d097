import math
import random

import mpmath
import numpy as np
import pytest
from mpmath import mpc, mpf

from conftest import lam, sol
from transpole.locator import predict_poles, predict_zeros
from transpole.oracle import (FarFieldError, LinearSolution, build_linear_solution, exact_ratio,
                              find_roots, kummer_m, kummer_m_derivatives, phase_grid,
                              required_bits, winding_number)
from transpole.precision import PrecisionConfig, PrecisionError

P = PrecisionConfig()


def test_kummer_examples():
    with P.workprec():
        assert kummer_m(mpc(0.3, 1), 0.5, 0) == 1
        for z in (mpc(1.5, -2), mpc(-7, 3), mpc(10)):
            assert abs(kummer_m(1, 1, z) - mpmath.exp(z)) < mpf(10) ** -70 * abs(mpmath.exp(z))
        a, b = mpc(0.2, -0.7), mpc(0.5)
        z = mpc(-3, 4)
        assert abs(kummer_m(a, b, z) - mpmath.hyp1f1(a, b, z)) < mpf(10) ** -70


def test_kummer_ode_residual():
    with P.workprec():
        a, b = mpc(0, -0.125), mpf(0.5)
        s = -mpc(0, 5) ** 2 / 4
        m, dm, ddm = kummer_m_derivatives(a, b, s)
        r = s * ddm + (b - s) * dm - a * m
        assert abs(r) < mpf(10) ** -70 * max(abs(m), 1)


def test_kummer_guard():
    with pytest.raises(PrecisionError) as info:
        kummer_m(mpc(0, -0.125), 0.5, -60, PrecisionConfig(64))
    assert info.value.required_bits > 64
    with pytest.raises(ValueError):
        kummer_m(1, -2, 1)


def test_far_field_and_exact_ratio():
    s = sol("1")
    with P.workprec():
        assert abs(s.U(mpc(0, -10)) - mpf("0.05")) < 5e-3
        assert abs(s.U(mpc(0, -10)) - mpc("0.0490526704826921", "0.000227741815816932")) < 1e-15
        for mu in ("0.5", "1", "2"):
            assert abs(sol(mu).ratio - exact_ratio(mu)) < mpf(10) ** -60
        assert s.fit_residual < mpf(10) ** -30


def test_fit_failure_is_reported():
    with pytest.raises(FarFieldError):
        build_linear_solution(1, anchors=(2, 3))
    with pytest.raises(ValueError):
        build_linear_solution(1, anchors=(30, 20))


def test_residuals_at_random_points():
    s = sol("1")
    rng = random.Random(7)
    for _ in range(20):
        r, th = 10 * math.sqrt(rng.random()), rng.uniform(-math.pi, 0)
        xi = mpc(r * math.cos(th), r * math.sin(th))
        assert s.riccati_residual(xi) < mpf(10) ** -(P.digits // 2)
        assert s.linear_residual(xi) < mpf(10) ** -(P.digits // 2)


@pytest.mark.parametrize("mu", ["0.3", "1.7"])
def test_linearization_identity(mu):
    s = sol(mu)
    for xi in (mpc(1, 2), mpc(-3, -1), mpc(4, 0.5)):
        assert s.riccati_residual(xi) < mpf(10) ** -60


def test_guard_at_low_precision():
    s64 = build_linear_solution(1, PrecisionConfig(64))
    s64.U(mpc(1, 1))
    with pytest.raises(PrecisionError):
        s64.U(15 * mpmath.expjpi(0.75))
    assert required_bits(mpc(0, -40), 1) > 600


def test_find_roots_mu1():
    d = lam("1")
    s = sol("1")
    preds = predict_poles(1, d, range(1, 16))
    roots = find_roots(s, "pole", preds)
    good = [r for r in roots if r.converged]
    assert len(good) == 15
    assert sorted(r.matched_M for r in good) == list(range(1, 16))
    assert all(r.xi.imag > 0 and r.residual < mpf(10) ** -(P.digits // 3) for r in good)
    with P.workprec():
        assert abs(good[0].xi - mpc("3.61262461417588", "4.30733970126244")) < 1e-12


def test_find_roots_dedup_and_gate():
    s = sol("1")
    seeds = [mpc(3.6, 4.3), mpc(3.62, 4.31), mpc(3.7, 4.2)]
    roots = find_roots(s, "pole", seeds)
    assert len([r for r in roots if r.converged]) == 1
    # regular point far from any root: either converges to a real root or is flagged
    for r in find_roots(s, "zero", [mpc(0.2, -6)]):
        if r.converged:
            w, dw, ddw = s.w_derivs(r.xi)
            assert abs(dw) / abs(ddw) < 1e-20
    with pytest.raises(ValueError):
        find_roots(s, "pole", [])


def test_windings():
    s = sol("1")
    with P.workprec():
        pole = mpc("3.61262461417588", "4.30733970126244")
        zero = mpc("3.90828611458951", "2.36613771142172")
    assert winding_number(s, pole, 0.05) == -1
    assert winding_number(s, zero, 0.05) == 1
    assert winding_number(s, mpc(2, -3), 0.3) == 0


def test_phase_grid_upper_window():
    s = sol("1")
    grid = phase_grid(s, (2.5, 5.5, 1.5, 6.2), (25, 39))
    pts = grid.winding_points()
    kinds = sorted(w for _, _, w in pts)
    assert kinds == [-1, -1, 1, 1]  # poles M=1,2 and zeros M=1,2
    g2 = phase_grid(s, (-0.5, 0.5, -10.5, -9.5), (3, 3))
    assert abs(g2.phase[1, 1]) < 0.01


def test_precision_doubling():
    d = lam("1")
    s256, s512 = sol("1"), sol("1", 512)
    preds = predict_poles(1, d, [1, 3, 5])
    a = find_roots(s256, "pole", preds)
    b = find_roots(s512, "pole", preds)
    with mpmath.workprec(512):
        for x, y in zip(a, b):
            assert abs(x.xi - y.xi) < mpf(10) ** -20
