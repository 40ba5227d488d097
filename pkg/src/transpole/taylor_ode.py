"""Independent Taylor-series integrator, used to cross-check the oracle.

Nothing here uses hypergeometric series or the fitted coefficient ratio.
Initial data come from the optimally truncated far-field series at a point
far down the negative imaginary axis, where the wanted solution is
recessive and truncation error is of order ``exp(-R^2/4mu)``.

Two equations are integrated:

* the Riccati equation itself, along pole-free paths;
* the linear equation ``2 mu^2 w'' + mu xi w' - (i/4) w = 0`` (entire
  solutions), which can be carried to any point; roots of ``w`` and ``w'``
  are then polished by Newton on the local Taylor polynomial.
"""
from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mpc, mpf

from .outer import far_field_value
from .precision import PrecisionConfig, ensure_config


def riccati_taylor(mu, xi0, u0, order: int) -> list[mpc]:
    """Taylor coefficients of U about ``xi0`` with ``U(xi0) = u0``."""
    u = [mpc(u0)]
    for k in range(order):
        prev = u[k - 1] if k >= 1 else 0
        conv = mpmath.fsum(u[j] * u[k - j] for j in range(k + 1))
        rhs = -(xi0 * u[k] + prev) / 2 + conv / 2 - (mpc(0, 0.25) if k == 0 else 0)
        u.append(rhs / (mu * (k + 1)))
    return u


def linear_taylor(mu, xi0, w0, dw0, order: int) -> list[mpc]:
    """Taylor coefficients of w about ``xi0``."""
    c = [mpc(w0), mpc(dw0)]
    for k in range(order - 1):
        rhs = -mu * (xi0 * (k + 1) * c[k + 1] + k * c[k]) + mpc(0, 0.25) * c[k]
        c.append(rhs / (2 * mu**2 * (k + 2) * (k + 1)))
    return c


def _poly(c, h):
    acc = mpc(0)
    for x in reversed(c):
        acc = acc * h + x
    return acc


def _dpoly(c, h):
    acc = mpc(0)
    for k in range(len(c) - 1, 0, -1):
        acc = acc * h + k * c[k]
    return acc


def _segments(start, end, step):
    n = max(1, int(mpmath.ceil(abs(end - start) / step)))
    return [start + (end - start) * mpf(j) / n for j in range(n + 1)]


def integrate_riccati(mu, xi_start, u_start, xi_end, step: float = 0.25, order: int = 40,
                      cfg: PrecisionConfig | None = None) -> mpc:
    """Carry U along the straight segment ``xi_start -> xi_end``."""
    cfg = ensure_config(cfg)
    with cfg.workprec():
        mu = mpf(mu)
        pts = _segments(mpc(xi_start), mpc(xi_end), mpf(step))
        u = mpc(u_start)
        for x0, x1 in zip(pts, pts[1:]):
            c = riccati_taylor(mu, x0, u, order)
            u = _poly(c, x1 - x0)
        return u


@dataclass(frozen=True)
class LinearState:
    xi: mpc
    w: mpc
    dw: mpc


def far_field_state(mu, R: float = 16, cfg: PrecisionConfig | None = None) -> LinearState:
    """``w = 1``, ``w' = -U w / (2 mu)`` at ``xi = -i R`` from the far-field series."""
    cfg = ensure_config(cfg)
    with cfg.workprec():
        xi = mpc(0, -R)
        u = far_field_value(mu, xi, cfg)
        return LinearState(xi, mpc(1), -u / (2 * mpf(mu)))


def _taylor_to_tol(mu, st: LinearState, h, tol, max_order: int = 600):
    order = 40
    while True:
        c = linear_taylor(mu, st.xi, st.w, st.dw, order)
        tail = max(abs(c[-1]), abs(c[-2])) * abs(h) ** (order - 1)
        scale = max(abs(st.w), abs(st.dw) * abs(h))
        if tail <= tol * scale or order >= max_order:
            return c
        order *= 2


def integrate_linear(mu, state: LinearState, xi_end, step: float = 0.5,
                     cfg: PrecisionConfig | None = None) -> LinearState:
    cfg = ensure_config(cfg)
    with cfg.workprec():
        mu = mpf(mu)
        pts = _segments(state.xi, mpc(xi_end), mpf(step))
        st = state
        for x0, x1 in zip(pts, pts[1:]):
            h = x1 - x0
            c = _taylor_to_tol(mu, st, h, cfg.series_tol)
            st = LinearState(x1, _poly(c, h), _dpoly(c, h))
        return st


def path_to(state: LinearState, target) -> list[mpc]:
    """Waypoints: up the imaginary axis to ``i Im(target)`` (or 0) then across."""
    target = mpc(target)
    corner = mpc(0, max(float(target.imag), 0.0))
    return [mpc(0, 0), corner, target] if corner != 0 else [mpc(0, 0), target]


def locate_root(mu, seed, kind: str, state: LinearState | None = None, cfg: PrecisionConfig | None = None,
                step: float = 0.5, max_iter: int = 40) -> mpc:
    """Root of ``w`` (pole of U) or ``w'`` (zero of U) near ``seed``."""
    if kind not in ("pole", "zero"):
        raise ValueError("kind must be 'pole' or 'zero'")
    cfg = ensure_config(cfg)
    with cfg.workprec():
        mu = mpf(mu)
        st = state or far_field_state(mu, cfg=cfg)
        for waypoint in path_to(st, seed):
            st = integrate_linear(mu, st, waypoint, step, cfg)
        x = mpc(seed)
        stop = mpf(10) ** -(cfg.digits - 12)
        for _ in range(max_iter):
            c = linear_taylor(mu, st.xi, st.w, st.dw, 120)
            if kind == "zero":
                c = [k * c[k] for k in range(1, len(c))]
            h = x - st.xi
            dx = _poly(c, h) / _dpoly(c, h)
            if abs(dx) > step:
                dx = dx / abs(dx) * step
            x -= dx
            if abs(dx) < stop:
                return x
            if abs(x - st.xi) > step:
                st = integrate_linear(mu, st, x, step, cfg)
        raise ArithmeticError(f"Taylor root polish did not converge near {seed}")
