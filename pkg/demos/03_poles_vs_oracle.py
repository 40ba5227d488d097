"""
Predicted poles and zeros against the exact solution
====================================================

The Riccati equation linearises to a Kummer equation, so the exact
solution is available.  Its poles and zeros are found by Newton's method
and compared with the asymptotic predictions at each order.
"""

import mpmath

from transpole import PrecisionConfig, compute_lambda
from transpole.locator import predict_poles, predict_zeros
from transpole.oracle import build_linear_solution, find_roots

cfg = PrecisionConfig(256)
mu = 1
data = compute_lambda(mu, 1000, cfg)
sol = build_linear_solution(mu, cfg)

print(" M   oracle pole                 leading err  log err    full err")
for M in (1, 2, 4, 8, 12, -1, -4, -12):
    preds = {o: predict_poles(mu, data, [M], order=o, cfg=cfg)[0] for o in ("leading", "log-corrected", "full")}
    root = find_roots(sol, "pole", [preds["full"]])[0]
    errs = [abs(preds[o].xi - root.xi) for o in ("leading", "log-corrected", "full")]
    print(f"{M:3d}  {mpmath.nstr(root.xi, 12):26s}  " + "  ".join(f"{mpmath.nstr(e, 3):9s}" for e in errs))

# Zeros interlace with the poles along the ray arg xi = pi/4
print("\n M   |zero|     |pole|")
for M in range(1, 7):
    z = find_roots(sol, "zero", predict_zeros(mu, data, [M], cfg=cfg))[0]
    p = find_roots(sol, "pole", predict_poles(mu, data, [M], cfg=cfg))[0]
    print(f"{M:3d}  {mpmath.nstr(abs(z.xi), 6):9s}  {mpmath.nstr(abs(p.xi), 6)}")
