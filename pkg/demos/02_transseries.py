"""
Transseries coefficients and transasymptotic resummation
========================================================

Tabulates the double-series coefficients, compares them with the closed
forms A_0, A_1, A_2 of the resummed exponential sums, and evaluates the
resummed solution near the first pole.
"""

import mpmath
from mpmath import mpc

from transpole import PrecisionConfig, compute_lambda
from transpole.transseries import (TransseriesParams, build_coeff_table, evaluate_resummed, tau,
                                   transasymptotic, verify_A_odes)

cfg = PrecisionConfig(256)
mu = 1

# Rows are algebraic order m, columns exponential order n
tb = build_coeff_table(mu, 3, 5, cfg)
for m in range(4):
    print(f"m = {m}: " + "  ".join(mpmath.nstr(tb[m, n], 6) for n in range(6)))

# Each row sums to a rational function of tau with a pole of order m + 1 at tau = -1
for m in range(3):
    tay = transasymptotic(m, mu, cfg).rational.taylor(5)
    err = max(abs(tay[n] - tb[m, n]) for n in range(6))
    print(f"A_{m}: Taylor coefficients vs table, max difference {mpmath.nstr(err, 3)}")
print("A_m equations satisfied:", verify_A_odes(mu, [mpc(0.3, 0.4), mpc(-2, 1)], cfg).ok)

# Near a pole tau -> -1 and the resummed U blows up
data = compute_lambda(mu, 1000, cfg)
params = TransseriesParams.active(data)
for xi in (mpc(3, 3), mpc(3.5, 4.2), mpc(3.6, 4.3)):
    print(f"xi = {mpmath.nstr(xi, 4)}  tau = {mpmath.nstr(tau(xi, params, cfg), 6)}  "
          f"U ~ {mpmath.nstr(evaluate_resummed(xi, params, 3, cfg), 6)}")
