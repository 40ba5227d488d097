"""Late-order terms, the Stokes constant Lambda and the switched exponential.

The outer coefficients behave like ``Lambda G Gamma(n + gamma) / chi^(n + gamma)``
with singulant ``chi = xi^2 / (4 mu)``, prefactor ``G = xi^(-i/2mu)`` and
``gamma = 1/2 - i/(4 mu)``.  Lambda is fixed by matching to the inner
problem near ``xi = 0``: the inner coefficients ``Vhat_n`` obey a quadratic
recurrence and ``Vhat_n (4mu)^(i/4mu) / Gamma(n + gamma) -> Lambda``.

That ratio converges only like ``O(1/n)``, so :func:`compute_lambda`
extrapolates the sequence in ``1/n`` (Neville/Richardson) before reporting.
The raw ratio is still returned for comparison.
"""
from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import mpmath
from mpmath import mpc, mpf

from .outer import OuterSeriesTable
from .precision import DomainError, PrecisionConfig, cpow, ensure_config, erf_real, log_gamma

SMALL_MU_WARN = 0.2
LOWER_HALF_PLANE_MU = 0.147


class ConvergenceError(ArithmeticError):
    """The extrapolated Lambda sequence failed to settle."""

    def __init__(self, message: str, history: list):
        super().__init__(message)
        self.history = history


def gamma_index(mu) -> mpc:
    return mpc(0.5, -1 / (4 * mpf(mu)))


@dataclass(frozen=True)
class InnerCoeffs:
    mu: mpf
    vhat: tuple[mpc, ...]


@dataclass(frozen=True)
class LateOrderData:
    """Lambda for one mu together with its convergence bookkeeping.

    ``lambda_`` is the extrapolated estimate; ``raw_lambda`` is the plain
    ratio at ``n_used``.  ``drift_history`` lists ``(n, |Lambda_n - Lambda_{n/2}|)``
    for the extrapolated sequence.
    """

    mu: mpf
    lambda_: mpc
    gamma: mpc
    n_used: int
    converged_digits: int
    raw_lambda: mpc | None = None
    raw_drift: mpf | None = None
    drift_history: tuple = ()
    prec_bits: int = 256

    @property
    def sigma(self) -> mpc:
        """Transseries constant ``2 pi i Lambda`` (active in the upper half-plane)."""
        with mpmath.workprec(self.prec_bits):
            return 2j * mpmath.pi * self.lambda_


@dataclass(frozen=True)
class SectorClass:
    label: str
    sector_id: int


def inner_coefficients(mu, n_max: int, cfg: PrecisionConfig | None = None) -> InnerCoeffs:
    """``Vhat_0 .. Vhat_{n_max}`` from the inner recurrence."""
    cfg = ensure_config(cfg)
    with cfg.workprec():
        mu = mpf(mu)
        rs = 1 / mpmath.sqrt(mu)
        v = [mpc(0, -0.25) * rs]
        for n in range(1, n_max + 1):
            s = mpmath.fsum((j + mpf(0.5)) * v[j] * v[n - 1 - j] for j in range(n))
            v.append((n - mpf(0.5)) * v[n - 1] + rs * s / n)
    return InnerCoeffs(mu, tuple(v))


def raw_lambda_sequence(inner: InnerCoeffs) -> list[mpc]:
    """``Lambda_n`` for n = 0..len-1 (index 0 included for convenience)."""
    mu = inner.mu
    g = gamma_index(mu)
    c = cpow(4 * mu, mpc(0, 1) / (4 * mu))
    gam = mpmath.exp(log_gamma(g))  # Gamma(0 + gamma), then step up
    out = []
    for n, v in enumerate(inner.vhat):
        out.append(v * c / gam)
        gam *= n + g
    return out


def richardson(seq: list[mpc], n: int, order: int = 8) -> mpc:
    """Extrapolate ``seq[n]`` to ``n -> infinity`` as a polynomial in 1/n.

    Uses ``order`` points ``n, n - h, ...`` with ``h = n // (2 order)``.
    """
    h = max(1, n // (2 * order))
    ns = [n - i * h for i in range(order)]
    if ns[-1] < 1:
        raise ValueError("not enough terms for the requested extrapolation order")
    xs = [mpf(1) / m for m in ns]
    p = [seq[m] for m in ns]
    for j in range(1, order):
        for i in range(order - j):
            p[i] = (xs[i + j] * p[i] - xs[i] * p[i + 1]) / (xs[i + j] - xs[i])
    return p[0]


def _warn_small_mu(mu) -> None:
    if mu < SMALL_MU_WARN:
        msg = f"mu = {float(mu):g} < {SMALL_MU_WARN}: the asymptotic analysis degrades as mu -> 0"
        if mu < LOWER_HALF_PLANE_MU:
            msg += "; near-field poles may enter the lower half-plane"
        warnings.warn(msg, RuntimeWarning, stacklevel=3)


def compute_lambda(mu, n_max: int = 1000, cfg: PrecisionConfig | None = None,
                   order: int = 8, cache: "LambdaCache | None" = None) -> LateOrderData:
    """Estimate Lambda(mu) from ``n_max`` inner coefficients."""
    if n_max < 100:
        raise ValueError("n_max must be >= 100")
    cfg = ensure_config(cfg)
    with cfg.workprec():
        mu = mpf(mu)
        if not mu > 0:
            raise ValueError("mu must be positive")
        _warn_small_mu(mu)
        if cache is not None:
            hit = cache.get(mu, cfg.prec_bits, n_max)
            if hit is not None:
                return hit
        seq = raw_lambda_sequence(inner_coefficients(mu, n_max, cfg))
        est = {n: richardson(seq, n, order) for n in (n_max // 8, n_max // 4, n_max // 2, n_max)}
        history = [(n, abs(est[n] - est[n // 2])) for n in (n_max // 4, n_max // 2, n_max)]
        floor = mpf(10) ** (-cfg.digits // 2)
        if history[-1][1] > history[-2][1] and history[-1][1] > floor:
            raise ConvergenceError(f"Lambda drift not shrinking at mu={mu}", history)
        drift = history[-1][1]
        digits = cfg.digits if drift == 0 else min(cfg.digits, int(mpmath.floor(-mpmath.log10(drift))))
        data = LateOrderData(
            mu=mu, lambda_=est[n_max], gamma=gamma_index(mu), n_used=n_max,
            converged_digits=digits, raw_lambda=seq[n_max],
            raw_drift=abs(seq[n_max] - seq[n_max // 2]), drift_history=tuple(history),
            prec_bits=cfg.prec_bits,
        )
        if cache is not None:
            cache.put(data, cfg.prec_bits)
    return data


def singulant(xi, mu, cfg: PrecisionConfig | None = None) -> mpc:
    with ensure_config(cfg).workprec():
        mu = mpf(mu)
        if not mu > 0:
            raise ValueError("mu must be positive")
        return mpc(xi) ** 2 / (4 * mu)


def prefactor(xi, data: LateOrderData, cfg: PrecisionConfig | None = None) -> mpc:
    with ensure_config(cfg).workprec():
        xi = mpc(xi)
        if xi == 0:
            raise DomainError("prefactor undefined at xi = 0")
        return data.lambda_ * cpow(xi, mpc(0, -1) / (2 * data.mu))


def u_exp(xi, data: LateOrderData, cfg: PrecisionConfig | None = None) -> mpc:
    """Switched-on exponential ``2 pi i Lambda xi^(-i/2mu) exp(-xi^2/4mu)``."""
    with ensure_config(cfg).workprec():
        return 2j * mpmath.pi * prefactor(xi, data, cfg) * mpmath.exp(-singulant(xi, data.mu, cfg))


def stokes_multiplier(theta, r, cfg: PrecisionConfig | None = None) -> mpf:
    """Error-function switching factor in polar singulant variables ``chi = r e^(i theta)``.

    Zero before the Stokes line (theta < 0), 1/2 on it, one after.
    """
    with ensure_config(cfg).workprec():
        r = mpf(r)
        if not r > 0:
            raise ValueError("r must be positive")
        return (1 + erf_real(mpf(theta) * mpmath.sqrt(r / 2))) / 2


def smoothed_exponential(xi, data: LateOrderData, cfg: PrecisionConfig | None = None) -> mpc:
    """``S(theta, r) * u_exp(xi)`` with ``chi = r e^(i theta)``."""
    with ensure_config(cfg).workprec():
        chi = singulant(xi, data.mu, cfg)
        return stokes_multiplier(mpmath.arg(chi), abs(chi), cfg) * u_exp(xi, data, cfg)


_PI = math.pi


def classify_sector(xi, mu, tol: float = 1e-12) -> SectorClass:
    """Sector of ``xi`` in the Stokes geometry of ``exp(-xi^2/4mu)``.

    Boundary rays take the id of the sector on their anticlockwise side,
    except the negative real axis, which bounds sector 4.
    """
    xi = mpc(xi)
    if xi == 0:
        raise DomainError("classify_sector at xi = 0")
    singulant(xi, mu)  # validates mu
    phi = float(mpmath.arg(xi))

    def near(a: float) -> bool:
        return abs(phi - a) <= tol

    if near(0.0):
        return SectorClass("stokes_curve", 2)
    if near(_PI) or near(-_PI):
        return SectorClass("stokes_curve", 4)
    for a, sid in ((_PI / 4, 3), (3 * _PI / 4, 4), (-_PI / 4, 1), (-3 * _PI / 4, 1)):
        if near(a):
            return SectorClass("anti_stokes_curve", sid)
    if 0 < phi < _PI / 4:
        return SectorClass("small_exponential", 2)
    if _PI / 4 < phi < 3 * _PI / 4:
        return SectorClass("large_exponential", 3)
    if phi > 3 * _PI / 4:
        return SectorClass("small_exponential", 4)
    return SectorClass("no_exponential", 1)


def late_order_ratio(table: OuterSeriesTable, z, n: int) -> mpc:
    """``V_n(z) chi / ((n + gamma - 1) V_{n-1}(z))``, which tends to one."""
    with table.cfg.workprec():
        z = mpc(z)
        chi = singulant(z, table.mu)
        g = gamma_index(table.mu)
        return table.terms[n](z) * chi / ((n + g - 1) * table.terms[n - 1](z))


class LambdaCache:
    """JSON-lines store of Lambda keyed by (mu, prec_bits, n_max).

    Readers never lock (records are appended whole, a torn last line is
    skipped); writers take an exclusive file lock.
    """

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)

    @staticmethod
    def _key(mu, prec_bits: int, n_max: int) -> tuple:
        return (mpmath.nstr(mpf(mu), 40), int(prec_bits), int(n_max))

    def records(self) -> list[dict]:
        if not self.path.exists():
            return []
        out = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                try:
                    out.append(json.loads(line))
                except json.JSONDecodeError:
                    continue
        return out

    def get(self, mu, prec_bits: int, n_max: int) -> LateOrderData | None:
        key = self._key(mu, prec_bits, n_max)
        for rec in reversed(self.records()):
            if (rec.get("mu"), rec.get("prec_bits"), rec.get("n_max")) == key:
                with mpmath.workprec(prec_bits):
                    return LateOrderData(
                        mu=mpf(mu), lambda_=mpc(rec["lambda_re"], rec["lambda_im"]),
                        gamma=gamma_index(mu), n_used=n_max,
                        converged_digits=int(rec["converged_digits"]),
                        raw_lambda=mpc(rec["raw_re"], rec["raw_im"]) if "raw_re" in rec else None,
                        raw_drift=mpf(rec["raw_drift"]) if "raw_drift" in rec else None,
                        prec_bits=prec_bits,
                    )
        return None

    def put(self, data: LateOrderData, prec_bits: int) -> None:
        from filelock import FileLock

        mu_key, pb, n = self._key(data.mu, prec_bits, data.n_used)
        digits = int(prec_bits * 0.30103) + 5
        rec = {
            "mu": mu_key, "prec_bits": pb, "n_max": n,
            "lambda_re": mpmath.nstr(data.lambda_.real, digits),
            "lambda_im": mpmath.nstr(data.lambda_.imag, digits),
            "converged_digits": data.converged_digits,
        }
        if data.raw_lambda is not None:
            rec["raw_re"] = mpmath.nstr(data.raw_lambda.real, digits)
            rec["raw_im"] = mpmath.nstr(data.raw_lambda.imag, digits)
        if data.raw_drift is not None:
            rec["raw_drift"] = mpmath.nstr(data.raw_drift, 20)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with FileLock(str(self.path) + ".lock"):
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(rec) + "\n")
