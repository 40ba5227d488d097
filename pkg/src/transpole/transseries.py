"""Transseries coefficients and transasymptotic sums.

With ``tau = sigma xi^(-alpha) exp(-xi^2/4mu)`` and ``alpha = 1 + i/(2mu)``
the solution is written as the double series

    U = sum_{n>=0} sum_{m>=0} a[m][n] tau^n xi^(1-2m).

Substituting into the Riccati equation and collecting ``tau^n xi^(2-2k)``
gives, for every (k, n),

    (1-n)/2 a[k][n] - mu (n alpha + 2k - 3) a[k-1][n]
        - 1/2 sum_{n1+n2=n, m1+m2=k} a[m1][n1] a[m2][n2] + i/4 [n=0, k=1] = 0.

Column n = 1 is degenerate (the a[k][1] coefficient drops out) and instead
determines a[k-1][1]; a[0][1] = 1 is the free normalisation.

Summing each row over n gives functions A_m(tau); the closed forms for
m = 0, 1, 2 are stored as rational functions so that derivatives and
Taylor coefficients are exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import mpmath
from mpmath import mpc, mpf

from .lateorder import LateOrderData
from .outer import a0_coefficients
from .precision import DomainError, PrecisionConfig, cexp, cpow, ensure_config


class PoleError(ZeroDivisionError):
    """Evaluation hit ``tau = -1``; ``M_estimate`` is the nearby pole index."""

    def __init__(self, message: str, M_estimate: int | None = None):
        super().__init__(message)
        self.M_estimate = M_estimate


def alpha_of(mu) -> mpc:
    return mpc(1, 1 / (2 * mpf(mu)))


@dataclass(frozen=True)
class TransseriesParams:
    mu: mpf
    sigma: mpc
    alpha: mpc

    @classmethod
    def active(cls, data: LateOrderData) -> "TransseriesParams":
        """Upper half-plane: ``sigma = 2 pi i Lambda``."""
        with mpmath.workprec(data.prec_bits):
            return cls(data.mu, data.sigma, alpha_of(data.mu))

    @classmethod
    def inactive(cls, mu, cfg: PrecisionConfig | None = None) -> "TransseriesParams":
        """Sector 1: no exponential, ``sigma = 0``."""
        with ensure_config(cfg).workprec():
            return cls(mpf(mu), mpc(0), alpha_of(mu))


def tau(xi, params: TransseriesParams, cfg: PrecisionConfig | None = None) -> mpc:
    with ensure_config(cfg).workprec():
        xi = mpc(xi)
        if xi == 0:
            raise DomainError("tau undefined at xi = 0")
        if params.sigma == 0:
            return mpc(0)
        return params.sigma * cpow(xi, -params.alpha) * cexp(-xi**2 / (4 * params.mu))


def dtau_dxi(xi, params: TransseriesParams, cfg: PrecisionConfig | None = None) -> mpc:
    with ensure_config(cfg).workprec():
        xi = mpc(xi)
        return -tau(xi, params, cfg) * (xi / (2 * params.mu) + params.alpha / xi)


# ---------------------------------------------------------------- table


@dataclass(frozen=True)
class CoeffTable:
    """``a[m][n]`` for ``0 <= m <= m_max`` and ``0 <= n <= n_max``."""

    mu: mpf
    a: tuple[tuple[mpc, ...], ...]
    cfg: PrecisionConfig

    @property
    def m_max(self) -> int:
        return len(self.a) - 1

    @property
    def n_max(self) -> int:
        return len(self.a[0]) - 1

    def __getitem__(self, mn: tuple[int, int]) -> mpc:
        m, n = mn
        return self.a[m][n]

    def column(self, n: int) -> list[mpc]:
        return [row[n] for row in self.a]

    def row(self, m: int) -> list[mpc]:
        return list(self.a[m])


def _conv(a, k: int, n: int) -> mpc:
    # sum over n1+n2=n, m1+m2=k of a[m1][n1] a[m2][n2]
    terms = []
    for n1 in range(n + 1):
        for m1 in range(k + 1):
            x = a[m1][n1]
            y = a[k - m1][n - n1]
            if x is not None and y is not None and x != 0 and y != 0:
                terms.append(x * y)
    return mpmath.fsum(terms)


def build_coeff_table(mu, m_max: int, n_max: int, cfg: PrecisionConfig | None = None) -> CoeffTable:
    if m_max < 2 or n_max < 2:
        raise ValueError("m_max and n_max must both be >= 2")
    cfg = ensure_config(cfg)
    with cfg.workprec():
        mu = mpf(mu)
        alpha = alpha_of(mu)
        a0 = a0_coefficients(mu, m_max + 1, cfg)
        a: list[list] = [[None] * (n_max + 1) for _ in range(m_max + 2)]
        for m in range(m_max + 2):
            a[m][0] = a0[m]
        # column 1: the k-th relation fixes a[k-1][1]
        a[0][1] = mpc(1)
        for k in range(2, m_max + 2):
            s = mpmath.fsum(a[m1][0] * a[k - m1][1] for m1 in range(2, k + 1))
            a[k - 1][1] = -s / (2 * mu * (k - 1))
        for n in range(2, n_max + 1):
            for k in range(m_max + 1):
                lin = mu * (n * alpha + 2 * k - 3) * a[k - 1][n] if k >= 1 else 0
                a[k][n] = 2 * (lin + _conv(a, k, n) / 2) / (1 - n)
        if a[0][1] != 1:
            raise ArithmeticError("normalisation a[0][1] = 1 was not preserved")
        rows = tuple(tuple(a[m][:n_max + 1]) for m in range(m_max + 1))
    return CoeffTable(mu, rows, cfg)


def table_residual(table: CoeffTable) -> mpf:
    """Largest relative residual of the matching relation over the table.

    Checks every (k, n) with k <= m_max whose relation only involves stored
    entries (column 1 relations reach into row k + 1 and are skipped at the
    last row).
    """
    mu = table.mu
    worst = mpf(0)
    with table.cfg.workprec():
        alpha = alpha_of(mu)
        a = [list(r) for r in table.a]
        for n in range(table.n_max + 1):
            for k in range(table.m_max + 1):
                lin = mu * (n * alpha + 2 * k - 3) * a[k - 1][n] if k >= 1 else mpc(0)
                conv = _conv(a, k, n)
                src = mpc(0.25j) if (n == 0 and k == 1) else mpc(0)
                r = (1 - n) * a[k][n] / 2 - lin - conv / 2 + src
                scale = max(abs((1 - n) * a[k][n] / 2), abs(lin), abs(conv / 2), abs(src), mpf(1))
                worst = max(worst, abs(r) / scale)
    return worst


# ----------------------------------------------------- rational functions


def _trim(p: Sequence) -> tuple:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return tuple(p)


def poly_mul(p: Sequence, q: Sequence) -> tuple:
    out = [mpc(0)] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        for j, y in enumerate(q):
            out[i + j] += x * y
    return _trim(out)


def poly_add(p: Sequence, q: Sequence) -> tuple:
    n = max(len(p), len(q))
    p = list(p) + [0] * (n - len(p))
    q = list(q) + [0] * (n - len(q))
    return _trim([mpc(x) + y for x, y in zip(p, q)])


def poly_der(p: Sequence) -> tuple:
    return _trim([k * p[k] for k in range(1, len(p))] or [mpc(0)])


def poly_eval(p: Sequence, x) -> mpc:
    acc = mpc(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class RationalFunction:
    """``num(tau) / den(tau)`` with coefficient lists in ascending powers."""

    num: tuple
    den: tuple

    def __call__(self, t) -> mpc:
        d = poly_eval(self.den, t)
        if d == 0:
            raise PoleError(f"rational function has a pole at tau = {t}")
        return poly_eval(self.num, t) / d

    def derivative(self) -> "RationalFunction":
        num = poly_add(poly_mul(poly_der(self.num), self.den),
                       [-c for c in poly_mul(self.num, poly_der(self.den))])
        return RationalFunction(num, poly_mul(self.den, self.den))

    def taylor(self, order: int) -> list[mpc]:
        """Coefficients of ``tau^0 .. tau^order`` about ``tau = 0``."""
        num = list(self.num) + [mpc(0)] * (order + 1)
        den = list(self.den)
        if den[0] == 0:
            raise PoleError("rational function singular at tau = 0")
        out = []
        for k in range(order + 1):
            s = num[k] - mpmath.fsum(den[j] * out[k - j] for j in range(1, min(k, len(den) - 1) + 1))
            out.append(s / den[0])
        return out


@dataclass(frozen=True)
class TransasymptoticFn:
    m: int
    rational: RationalFunction

    def __call__(self, t) -> mpc:
        return self.rational(t)


def _one_plus_tau_pow(k: int) -> tuple:
    p: tuple = (mpc(1),)
    for _ in range(k):
        p = poly_mul(p, (mpc(1), mpc(1)))
    return p


def transasymptotic(m: int, mu, cfg: PrecisionConfig | None = None) -> TransasymptoticFn:
    """Closed form of ``A_m`` for ``m`` in 0, 1, 2."""
    cfg = ensure_config(cfg)
    with cfg.workprec():
        mu = mpf(mu)
        i = mpc(0, 1)
        if m == 0:
            rf = RationalFunction((mpc(0), mpc(1)), _one_plus_tau_pow(1))
        elif m == 1:
            # [tau (1 - 4 mu i)(1 + 4 mu i tau) / (8 mu) - i/2] / (1 + tau)^2
            c = (1 - 4 * mu * i) / (8 * mu)
            rf = RationalFunction((-i / 2, c, c * 4 * mu * i), _one_plus_tau_pow(2))
        elif m == 2:
            k = -1 / (128 * mu**2)
            num = (
                k * 32 * mu**2 * (1 + 4 * i * mu),
                k * (192 * i * mu**3 + 32 * mu**2 - 1),
                k * (1536 * mu**4 + 704 * i * mu**3 - 128 * mu**2 - 16 * i * mu + 1),
                k * 32 * mu**2 * (32 * mu**2 + 12 * i * mu - 1),
            )
            rf = RationalFunction(num, _one_plus_tau_pow(3))
        else:
            raise ValueError("closed forms exist only for m = 0, 1, 2")
    return TransasymptoticFn(m, rf)


def A_closed(m: int, tau_val, mu, cfg: PrecisionConfig | None = None) -> mpc:
    cfg = ensure_config(cfg)
    with cfg.workprec():
        t = mpc(tau_val)
        if t == -1:
            raise PoleError("A_m has a pole at tau = -1")
        return transasymptotic(m, mu, cfg)(t)


@dataclass
class AOdeReport:
    mu: mpf
    threshold: mpf
    residuals: dict = field(default_factory=dict)  # equation label -> list of residuals
    printed_k1: list = field(default_factory=list)  # literal printed k = 1 relation, for reference

    @property
    def max_residual(self) -> mpf:
        return max((max(v) for v in self.residuals.values() if v), default=mpf(0))

    @property
    def ok(self) -> bool:
        return self.max_residual < self.threshold


def a_ode_residuals(t, mu, cfg: PrecisionConfig | None = None) -> dict[str, mpf]:
    """Residuals of the A_0, A_1 and (corrected) A_2 equations at ``tau = t``.

    The k-th equation reads
    ``A_k - tau A_k' - (2mu + i) tau A_{k-1}' - 2mu(2k-3) A_{k-1} - sum_m A_m A_{k-m} + (i/2)[k=1] = 0``.
    Each residual is divided by ``max(1, largest term)`` so that it measures
    rounding rather than the size of A near ``tau = -1``.
    """
    cfg = ensure_config(cfg)
    with cfg.workprec():
        mu = mpf(mu)
        t = mpc(t)
        i = mpc(0, 1)
        fs = [transasymptotic(m, mu, cfg).rational for m in range(3)]
        A = [f(t) for f in fs]
        dA = [f.derivative()(t) for f in fs]
        eqs = {
            "A0": [A[0], -A[0] ** 2, -t * dA[0]],
            "A1": [A[1], 2 * mu * A[0], -2 * A[0] * A[1], -t * dA[1], -(i + 2 * mu) * t * dA[0], i / 2],
            "A2": [A[2], -t * dA[2], -(i + 2 * mu) * t * dA[1], -2 * mu * A[1], -2 * A[0] * A[2], -A[1] ** 2],
            # the k = 1 relation as printed, with tau A_1' where tau A_2' belongs
            "A2_printed": [A[2], -2 * mu * A[1], -2 * A[0] * A[2], -A[1] ** 2, -t * dA[1],
                           -(i + 2 * mu) * t * dA[1]],
        }
        return {k: abs(mpmath.fsum(v)) / max(1, max(abs(x) for x in v)) for k, v in eqs.items()}


def verify_A_odes(mu, sample_taus: Sequence, cfg: PrecisionConfig | None = None) -> AOdeReport:
    cfg = ensure_config(cfg)
    with cfg.workprec():
        rep = AOdeReport(mpf(mu), mpf(2) ** (16 - cfg.prec_bits))
        for lab in ("A0", "A1", "A2"):
            rep.residuals[lab] = []
        for t in sample_taus:
            if mpc(t) == -1:
                raise PoleError("sample at tau = -1")
            r = a_ode_residuals(t, mu, cfg)
            for lab in ("A0", "A1", "A2"):
                rep.residuals[lab].append(r[lab])
            rep.printed_k1.append(r["A2_printed"])
    return rep


def estimate_pole_index(xi, params: TransseriesParams) -> int:
    xi = mpc(xi)
    chi = xi**2 / (4 * params.mu)
    phase = (chi + params.alpha * mpmath.log(xi) - mpmath.log(params.sigma)).imag
    return int(mpmath.nint((phase / mpmath.pi - 1) / 2))


def evaluate_resummed(xi, params: TransseriesParams, m_terms: int = 2,
                      cfg: PrecisionConfig | None = None) -> mpc:
    """``sum_{m < m_terms} A_m(tau(xi)) / xi^(2m-1)``."""
    if not 1 <= m_terms <= 3:
        raise ValueError("m_terms must be 1, 2 or 3")
    cfg = ensure_config(cfg)
    with cfg.workprec():
        xi = mpc(xi)
        t = tau(xi, params)
        if abs(1 + t) <= mpf(2) ** (8 - cfg.prec_bits):
            raise PoleError(f"tau(xi) = -1 at xi = {xi}", estimate_pole_index(xi, params))
        return mpmath.fsum(transasymptotic(m, params.mu, cfg)(t) * xi ** (1 - 2 * m)
                           for m in range(m_terms))


def evaluate_transseries(xi, params: TransseriesParams, table: CoeffTable,
                         m_terms: int | None = None) -> mpc:
    """Truncated double sum over the coefficient table."""
    with table.cfg.workprec():
        xi = mpc(xi)
        t = tau(xi, params)
        m_top = table.m_max if m_terms is None else m_terms - 1
        out = []
        for m in range(m_top + 1):
            row = poly_eval(table.a[m], t)
            out.append(row * xi ** (1 - 2 * m))
        return mpmath.fsum(out)
