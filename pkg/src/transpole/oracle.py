"""Exact solution of the inner Riccati equation, used as ground truth.

The substitution ``U = -2 mu w'/w`` turns
``mu U' = -xi U/2 + U^2/2 - i/4`` into the linear equation

    2 mu^2 w'' + mu xi w' - (i/4) w = 0,

and with ``s = -xi^2/(4 mu)`` this is Kummer's equation with
``a = -i/(8 mu)``, ``b = 1/2``.  Its even and odd solutions are
``M(a, 1/2, s)`` and ``xi M(a + 1/2, 3/2, s)``; both series converge
everywhere, so ``w`` is entire and the poles of U are the zeros of ``w``
and the zeros of U are the zeros of ``w'``.

Only the ratio of the two coefficients matters.  It is fixed by matching
U to the optimally truncated far-field series on the negative imaginary
axis, where the wanted solution is recessive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import mpmath
import numpy as np
from mpmath import mpc, mpf

from .outer import far_field_value
from .precision import PrecisionConfig, PrecisionError, ensure_config

LOG2E = 1.4426950408889634
GUARD_BITS = 32


class FarFieldError(ArithmeticError):
    """The two anchor fits disagree: far-field condition not enforced."""


def _kummer_sums(a, b, z, tol, max_terms: int = 200000):
    """Return ``(sum t_k, sum k t_k, sum k(k-1) t_k, max|t_k|)``."""
    a = mpc(a)
    b = mpc(b)
    z = mpc(z)
    t = mpc(1)
    s0, s1, s2 = mpc(1), mpc(0), mpc(0)
    big = mpf(1)
    zabs = abs(z)
    k = 0
    while True:
        t = t * (a + k) * z / ((b + k) * (k + 1))
        k += 1
        s0 += t
        s1 += k * t
        s2 += k * (k - 1) * t
        at = abs(t)
        if at > big:
            big = at
        if k > zabs + abs(a) + 2:
            ref = max(abs(s0), abs(s2), abs(s1))
            if at * k * k <= tol * ref or at == 0:
                break
        if k > max_terms:
            raise PrecisionError("Kummer series did not terminate")
    return s0, s1, s2, big


def _lost_bits(big, value) -> float:
    if value == 0:
        return math.inf
    return max(0.0, float(mpmath.log(big / abs(value), 2)))


def kummer_m(a, b, z, cfg: PrecisionConfig | None = None) -> mpc:
    """Confluent hypergeometric ``M(a, b, z)`` by its power series.

    Raises :class:`PrecisionError` when cancellation among the terms
    exceeds ``prec_bits - 32`` bits.
    """
    return kummer_m_derivatives(a, b, z, cfg)[0]


def kummer_m_derivatives(a, b, z, cfg: PrecisionConfig | None = None) -> tuple[mpc, mpc, mpc]:
    """``(M, dM/dz, d2M/dz2)`` from one pass over the series."""
    cfg = ensure_config(cfg)
    with cfg.workprec():
        b = mpc(b)
        if b.imag == 0 and b.real <= 0 and b.real == int(b.real):
            raise ValueError("b must not be a nonpositive integer")
        a, z = mpc(a), mpc(z)
        if z == 0:
            return mpc(1), a / b, a * (a + 1) / (b * (b + 1))
        s0, s1, s2, big = _kummer_sums(a, b, z, cfg.series_tol)
        lost = _lost_bits(big, s0)
        if lost + GUARD_BITS > cfg.prec_bits:
            raise PrecisionError(
                f"Kummer series at |z|={float(abs(z)):.3g} loses {lost:.0f} bits; "
                f"increase prec_bits beyond {cfg.prec_bits}",
                required_bits=int(lost) + GUARD_BITS + 16,
            )
        return s0, s1 / z, s2 / z**2


def required_bits(xi, mu) -> int:
    """A-priori precision estimate for evaluating ``w`` at ``xi``."""
    # series cancellation plus combination cancellation add up to about |s| log2(e)
    s = -mpc(xi) ** 2 / (4 * mpf(mu))
    return int(float(abs(s)) * LOG2E) + GUARD_BITS + 16


def _basis(xi, mu, tol):
    """Even/odd solutions and their first two xi-derivatives, plus bits lost."""
    xi = mpc(xi)
    a = mpc(0, -1) / (8 * mu)
    s = -xi**2 / (4 * mu)
    ds = -xi / (2 * mu)
    dds = -1 / (2 * mu)
    if s == 0:
        m0, m1, m2 = mpc(1), a / mpf(0.5), a * (a + 1) / mpf(0.75)
        n0, n1, n2 = mpc(1), (a + mpf(0.5)) / mpf(1.5), (a + mpf(0.5)) * (a + mpf(1.5)) / mpf(3.75)
        lost = 0.0
    else:
        e0, e1, e2, be = _kummer_sums(a, mpf(0.5), s, tol)
        o0, o1, o2, bo = _kummer_sums(a + mpf(0.5), mpf(1.5), s, tol)
        lost = max(_lost_bits(be, e0), _lost_bits(bo, o0))
        m0, m1, m2 = e0, e1 / s, e2 / s**2
        n0, n1, n2 = o0, o1 / s, o2 / s**2
    E = m0
    dE = m1 * ds
    ddE = m2 * ds**2 + m1 * dds
    O = xi * n0
    dO = n0 + xi * n1 * ds
    ddO = 2 * n1 * ds + xi * (n2 * ds**2 + n1 * dds)
    return (E, dE, ddE), (O, dO, ddO), lost, s


@dataclass(frozen=True)
class LinearSolution:
    """``w = c_even M_even + c_odd M_odd`` with the far-field ratio fixed."""

    mu: mpf
    c_even: mpc
    c_odd: mpc
    cfg: PrecisionConfig
    anchors: tuple = (20, 30)
    fit_residual: mpf | None = None

    @property
    def ratio(self) -> mpc:
        return self.c_odd / self.c_even

    def w_derivs(self, xi) -> tuple[mpc, mpc, mpc]:
        """``(w, w', w'')`` at ``xi``; raises PrecisionError if the guard trips."""
        with self.cfg.workprec():
            E, O, lost, s = _basis(xi, self.mu, self.cfg.series_tol)
            combo = max(0.0, float(s.real)) * LOG2E
            if lost + combo + GUARD_BITS > self.cfg.prec_bits:
                raise PrecisionError(
                    f"evaluating w at xi={mpmath.nstr(mpc(xi), 8)} needs about "
                    f"{int(lost + combo) + GUARD_BITS} bits, have {self.cfg.prec_bits}",
                    required_bits=int(lost + combo) + GUARD_BITS + 16,
                )
            ce, co = self.c_even, self.c_odd
            return tuple(ce * e + co * o for e, o in zip(E, O))

    def U(self, xi) -> mpc:
        w, dw, _ = self.w_derivs(xi)
        with self.cfg.workprec():
            if w == 0:
                raise ZeroDivisionError("U has a pole here")
            return -2 * self.mu * dw / w

    def U_and_derivative(self, xi) -> tuple[mpc, mpc]:
        """U and U' with U' taken from the series (not from the ODE)."""
        w, dw, ddw = self.w_derivs(xi)
        with self.cfg.workprec():
            q = dw / w
            return -2 * self.mu * q, -2 * self.mu * (ddw / w - q * q)

    def riccati_residual(self, xi) -> mpf:
        """``|mu U' + xi U/2 - U^2/2 + i/4|`` relative to the size of its terms."""
        u, du = self.U_and_derivative(xi)
        with self.cfg.workprec():
            xi = mpc(xi)
            terms = (self.mu * du, xi * u / 2, -u * u / 2, mpc(0, 0.25))
            return abs(mpmath.fsum(terms)) / max(abs(t) for t in terms)

    def linear_residual(self, xi) -> mpf:
        w, dw, ddw = self.w_derivs(xi)
        with self.cfg.workprec():
            terms = (2 * self.mu**2 * ddw, self.mu * mpc(xi) * dw, mpc(0, -0.25) * w)
            return abs(mpmath.fsum(terms)) / max(abs(t) for t in terms)


def _fit_ratio(mu, R, cfg_fit: PrecisionConfig) -> mpc:
    xi = mpc(0, -R)
    with cfg_fit.workprec():
        target = far_field_value(mu, xi, cfg_fit)
        (E, dE, _), (O, dO, _), _, _ = _basis(xi, mu, cfg_fit.series_tol)
        return -(2 * mu * dE + target * E) / (2 * mu * dO + target * O)


def build_linear_solution(mu, cfg: PrecisionConfig | None = None, anchors=(20, 30),
                          fit_tol=None) -> LinearSolution:
    """Fix the coefficient ratio from the far-field condition.

    The ratio is solved at the outer anchor ``-i R2``; the inner anchor
    ``-i R1`` is then used as an independent check of ``U ~ far-field series``.
    """
    cfg = ensure_config(cfg)
    R1, R2 = anchors
    if not 0 < R1 < R2:
        raise ValueError("anchors must satisfy 0 < R1 < R2")
    with cfg.workprec():
        mu = mpf(mu)
        if not mu > 0:
            raise ValueError("mu must be positive")
    extra = int(math.ceil(float(R2) ** 2 / (4 * float(mu)) * LOG2E)) + 64
    fit_cfg = cfg.boosted(extra)
    ratio = _fit_ratio(mu, R2, fit_cfg)
    with fit_cfg.workprec():
        probe = LinearSolution(mu, mpc(1), ratio, fit_cfg, (R1, R2))
        xi1 = mpc(0, -R1)
        u1 = probe.U(xi1)
        t1 = far_field_value(mu, xi1, fit_cfg)
        resid = abs(u1 - t1) / abs(t1)
    tol = mpf(fit_tol) if fit_tol is not None else mpf(10) ** -20
    if resid > tol:
        raise FarFieldError(f"far-field fit residual {mpmath.nstr(resid, 3)} exceeds {mpmath.nstr(tol, 3)}")
    return LinearSolution(mu, mpc(1), ratio, cfg, (R1, R2), resid)


def exact_ratio(mu, cfg: PrecisionConfig | None = None) -> mpc:
    """Connection-formula value of ``c_odd/c_even`` (Tricomi U); test reference only."""
    cfg = ensure_config(cfg)
    with cfg.workprec():
        mu = mpf(mu)
        a = mpc(0, -1) / (8 * mu)
        odd = mpmath.gamma(-0.5) / mpmath.gamma(a) * mpc(0, 1) / (2 * mpmath.sqrt(mu))
        even = mpmath.gamma(0.5) / mpmath.gamma(a + 0.5)
        return odd / even


# ------------------------------------------------------------------ roots


@dataclass(frozen=True)
class RootRecord:
    kind: str
    xi: mpc
    newton_iters: int
    residual: mpf
    matched_M: int | None = None
    converged: bool = True


def _newton(sol: LinearSolution, kind: str, x0, max_iter: int, step_cap):
    """Damped Newton; once the step drops below 10**(-digits/3) it polishes twice."""
    x = mpc(x0)
    loose = mpf(10) ** -(sol.cfg.digits // 3)
    polish = None
    for it in range(1, max_iter + 1):
        w, dw, ddw = sol.w_derivs(x)
        f, fp = (w, dw) if kind == "pole" else (dw, ddw)
        if fp == 0:
            return x, it, mpf("inf"), False
        dx = f / fp
        if abs(dx) > step_cap:
            dx = dx / abs(dx) * step_cap
        x = x - dx
        if polish is None and abs(dx) < loose * max(1, abs(x)):
            polish = 2
        elif polish is not None:
            polish -= 1
            if polish == 0:
                break
    else:
        return x, max_iter, mpf("inf"), False
    w, dw, ddw = sol.w_derivs(x)
    f, fp = (w, dw) if kind == "pole" else (dw, ddw)
    return x, it, abs(f) / abs(fp), True


def find_roots(sol: LinearSolution, kind: str, seeds: Sequence, cfg: PrecisionConfig | None = None,
               max_iter: int = 64, step_cap: float = 0.5) -> list[RootRecord]:
    """Newton from each seed on ``w`` (poles) or ``w'`` (zeros).

    Seeds may be complex numbers or locator predictions; predictions also
    provide ``matched_M`` (index of the nearest prediction).  Converged
    roots are deduplicated; unconverged runs are kept with ``converged=False``.
    """
    if kind not in ("pole", "zero"):
        raise ValueError("kind must be 'pole' or 'zero'")
    seeds = list(seeds)
    if not seeds:
        raise ValueError("at least one seed is required")
    if cfg is not None and cfg.prec_bits != sol.cfg.prec_bits:
        sol = LinearSolution(sol.mu, sol.c_even, sol.c_odd, cfg, sol.anchors, sol.fit_residual)
    preds = [(s.M, mpc(s.xi)) for s in seeds if hasattr(s, "M")]
    gate = mpf(10) ** -(sol.cfg.digits // 3)
    found: list[RootRecord] = []
    failed: list[RootRecord] = []
    with sol.cfg.workprec():
        for s in seeds:
            x0 = s.xi if hasattr(s, "M") else s
            try:
                x, it, res, ok = _newton(sol, kind, x0, max_iter, mpf(step_cap))
            except (PrecisionError, ZeroDivisionError):
                failed.append(RootRecord(kind, mpc(x0), 0, mpf("inf"), None, False))
                continue
            ok = ok and res < gate
            M = min(preds, key=lambda p: abs(p[1] - x))[0] if preds else None
            rec = RootRecord(kind, x, it, res, M, ok)
            if not ok:
                failed.append(rec)
            elif all(abs(r.xi - x) > mpf(10) ** -6 for r in found):
                found.append(rec)
    return found + failed


# ------------------------------------------------------------------ phase


@dataclass
class PhaseGrid:
    xs: np.ndarray
    ys: np.ndarray
    phase: np.ndarray  # shape (len(ys), len(xs)); NaN marks points where U is not finite

    def windings(self) -> np.ndarray:
        return cell_windings(self.phase)

    def winding_points(self) -> list[tuple[float, float, int]]:
        wind = self.windings()
        out = []
        for j, i in zip(*np.nonzero(wind)):
            out.append((0.5 * (self.xs[i] + self.xs[i + 1]), 0.5 * (self.ys[j] + self.ys[j + 1]), int(wind[j, i])))
        return out


def _wrap(d: np.ndarray) -> np.ndarray:
    return (d + np.pi) % (2 * np.pi) - np.pi


def cell_windings(phase: np.ndarray) -> np.ndarray:
    """Winding number of the phase around each grid cell (anticlockwise)."""
    p00 = phase[:-1, :-1]
    p10 = phase[:-1, 1:]
    p11 = phase[1:, 1:]
    p01 = phase[1:, :-1]
    tot = _wrap(p10 - p00) + _wrap(p11 - p10) + _wrap(p01 - p11) + _wrap(p00 - p01)
    wind = np.rint(tot / (2 * np.pi))
    wind[np.isnan(wind)] = 0
    return wind.astype(int)


def phase_grid(sol: LinearSolution, region: tuple[float, float, float, float],
               resolution: tuple[int, int]) -> PhaseGrid:
    """``arg U`` on a ``nx`` by ``ny`` grid over ``(xmin, xmax, ymin, ymax)``."""
    xmin, xmax, ymin, ymax = region
    nx, ny = resolution
    if nx < 2 or ny < 2 or not (xmax > xmin and ymax > ymin):
        raise ValueError("bad region or resolution")
    xs = np.linspace(xmin, xmax, nx)
    ys = np.linspace(ymin, ymax, ny)
    ph = np.full((ny, nx), np.nan)
    with sol.cfg.workprec():
        for j, y in enumerate(ys):
            for i, x in enumerate(xs):
                xi = mpc(float(x), float(y))
                if xi == 0:
                    xi = mpc(0, 1e-12)
                w, dw, _ = sol.w_derivs(xi)
                if w == 0:
                    continue
                ph[j, i] = float(mpmath.arg(-2 * sol.mu * dw / w))
    return PhaseGrid(xs, ys, ph)


def winding_number(sol: LinearSolution, center, radius, n: int = 64) -> int:
    """Winding of ``arg U`` around a small circle; -1 at a simple pole, +1 at a simple zero."""
    with sol.cfg.workprec():
        c = mpc(center)
        phases = [float(mpmath.arg(sol.U(c + radius * mpmath.expjpi(mpf(2 * k) / n)))) for k in range(n + 1)]
    d = _wrap(np.diff(np.array(phases)))
    return int(round(d.sum() / (2 * np.pi)))


def far_field_fit(sol: LinearSolution, radii: Sequence[float] = tuple(20 + 2.5 * k for k in range(9)),
                  n_coeffs: int = 3) -> list[mpc]:
    """Recover far-field coefficients from oracle values on the negative imaginary axis.

    Interpolates ``xi U(xi)`` as a polynomial in ``1/xi^2`` through the given
    radii and returns its first ``n_coeffs`` coefficients, which estimate
    ``a_1, a_2, ...``.  Needs a solution built with enough precision for
    the largest radius (see :func:`required_bits`).
    """
    with sol.cfg.workprec():
        xs, ys = [], []
        for R in radii:
            xi = mpc(0, -R)
            xs.append(1 / xi**2)
            ys.append(xi * sol.U(xi))
        n = len(xs)
        A = mpmath.matrix([[x**k for k in range(n)] for x in xs])
        c = mpmath.lu_solve(A, mpmath.matrix(ys))
        return [c[k] for k in range(n_coeffs)]
