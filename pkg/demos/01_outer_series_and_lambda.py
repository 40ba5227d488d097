"""
The divergent far-field series and its Stokes constant
======================================================

Builds the algebraic series for the inner Riccati equation, shows the
factorial-over-power growth of its terms, and estimates the Stokes
constant Lambda from the late-order coefficients.
"""

import mpmath
from mpmath import mpc

from transpole import PrecisionConfig, build_outer_series, compute_lambda
from transpole.lateorder import late_order_ratio
from transpole.outer import a0_coefficients, optimal_truncation, term_magnitudes

cfg = PrecisionConfig(256)
mu = 1

# The first few coefficients a_m of U ~ sum a_m xi^(1 - 2m)
for m, a in enumerate(a0_coefficients(mu, 6, cfg)[1:], start=1):
    print(f"a_{m} = {mpmath.nstr(a, 12)}")

# Terms shrink, then grow: the smallest one sits near n ~ |xi^2 / 4 mu|
table = build_outer_series(mu, 60, cfg)
xi = mpc(0, -8)
mags = term_magnitudes(table, xi)
spec = optimal_truncation(xi, mu)
print(f"\n|V_n(-8i)| is smallest at n = {min(range(len(mags)), key=mags.__getitem__)}, "
      f"optimal truncation keeps N = {spec.N} terms")
for n in (1, 5, 10, 16, 25, 40, 59):
    print(f"  n = {n:2d}  |V_n| = {mpmath.nstr(mags[n], 4)}")

# Late-order check: the ratio of successive terms approaches the factorial-over-power form
for n in (10, 20, 40):
    r = late_order_ratio(table, mpc(0, -2), n)
    print(f"late-order ratio at n = {n}: {mpmath.nstr(r, 10)}")

# Lambda from 1000 inner coefficients, extrapolated in 1/n
data = compute_lambda(mu, 1000, cfg)
print(f"\nLambda({mu}) = {mpmath.nstr(data.lambda_, 20)}")
print(f"converged digits ~ {data.converged_digits}, raw ratio drift {mpmath.nstr(data.raw_drift, 3)}")
