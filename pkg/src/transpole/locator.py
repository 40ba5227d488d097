"""Asymptotic pole and zero locations.

Poles of U sit where ``tau(xi)`` is close to -1, corrected by
``tau = -1 + tau1/xi^2 + tau2/xi^4 + ...``; taking logarithms and inverting
gives, with ``r_p = log(sigma) + (2M+1) pi i``,

    xi^2 = 4 mu r_p - 2 mu alpha log(4 mu r_p) + (alpha^2 mu log(4 mu r_p) + tau1) / r_p.

Zeros sit where ``tau ~ tau1/xi^2`` with ``tau1 = i/2``; with
``r_z = log(2 sigma) + (2M - 1/2) pi i`` the inversion is

    xi^2 = 4 mu r_z - 2 (alpha - 2) mu log(4 mu r_z).

Branch choice in quadrant 2
---------------------------
The exponential switched on across the negative real axis is
``exp(-pi/(2 mu))`` times the principal-branch quadrant-1 term.  Since the
inversion works with ``log(xi^2) = 2 log(xi) - 2 pi i`` there, the net
effect is ``log sigma -> log sigma - pi i``.  ``branch="consistent"`` (default) applies that
shift for ``M < 0``; ``branch="printed"`` uses the quadrant-1 offsets for
every M.  The zero formula likewise has a ``variant="printed"`` that adds
the constant ``-6 mu pi i + 4 mu log 2``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable

import mpmath
from mpmath import mpc, mpf

from .lateorder import LateOrderData
from .precision import PrecisionConfig, ensure_config
from .transseries import TransseriesParams, alpha_of, tau

ORDERS = ("leading", "log-corrected", "full")


@dataclass(frozen=True)
class LocatorSeries:
    kind: str
    tau0: mpc
    tau1: mpc
    tau2: mpc | None
    c: tuple
    alpha: mpc


def pole_series(mu, cfg: PrecisionConfig | None = None) -> LocatorSeries:
    with ensure_config(cfg).workprec():
        mu = mpf(mu)
        i = mpc(0, 1)
        alpha = alpha_of(mu)
        tau1 = -i / 2 + 1 / (8 * mu) - 2 * mu
        tau2 = 8 * mu**2 - 1 / (128 * mu**2) + 9 * mu * i / 2
        c = (4 * mu, -2 * mu * alpha, mpc(0), alpha**2 * mu, tau1)
        return LocatorSeries("pole", mpc(-1), tau1, tau2, c, alpha)


def zero_series(mu, cfg: PrecisionConfig | None = None) -> LocatorSeries:
    with ensure_config(cfg).workprec():
        mu = mpf(mu)
        alpha = alpha_of(mu)
        return LocatorSeries("zero", mpc(0), mpc(0, 0.5), None, (4 * mu, -2 * (alpha - 2) * mu), alpha)


@dataclass(frozen=True)
class Prediction:
    kind: str
    M: int
    quadrant: int
    xi: mpc
    xi_squared: mpc
    order: str
    r: mpc | None = None
    meta: dict = field(default_factory=dict, compare=False)


def upper_root(z2) -> mpc:
    z = mpmath.sqrt(mpc(z2))
    return -z if z.imag < 0 else z


def _check(M_range: Iterable[int], order: str, branch: str) -> list[int]:
    Ms = [int(M) for M in M_range]
    if not Ms:
        raise ValueError("empty M range")
    if 0 in Ms:
        raise ValueError("M = 0 is the near field and has no asymptotic prediction")
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}")
    if branch not in ("consistent", "printed"):
        raise ValueError("branch must be 'consistent' or 'printed'")
    return Ms


def _log(z) -> mpc:
    z = mpc(z)
    if z.imag == 0 and z.real < 0:
        warnings.warn("logarithm evaluated on its branch cut", RuntimeWarning, stacklevel=3)
    return mpmath.log(z)


def pole_r(M: int, sigma, branch: str = "consistent") -> mpc:
    k = 2 * M if (M < 0 and branch == "consistent") else 2 * M + 1
    return mpmath.log(sigma) + k * mpmath.pi * mpc(0, 1)


def zero_r(M: int, sigma, branch: str = "consistent") -> mpc:
    k = 2 * M + mpf(0.5) if (M < 0 and branch == "consistent") else 2 * M - mpf(0.5)
    return mpmath.log(2 * sigma) + k * mpmath.pi * mpc(0, 1)


def predict_poles(mu, data: LateOrderData, M_range: Iterable[int], order: str = "full",
                  branch: str = "consistent", cfg: PrecisionConfig | None = None) -> list[Prediction]:
    Ms = _check(M_range, order, branch)
    cfg = ensure_config(cfg)
    out = []
    with cfg.workprec():
        mu = mpf(mu)
        ser = pole_series(mu, cfg)
        sigma = data.sigma
        for M in Ms:
            r = pole_r(M, sigma, branch)
            if order == "leading":
                x2 = 8 * mu * mpc(0, 1) * M * mpmath.pi
            else:
                L = _log(4 * mu * r)
                x2 = ser.c[0] * r + ser.c[1] * L
                if order == "full":
                    x2 += (ser.c[3] * L + ser.c[4]) / r
            out.append(Prediction("pole", M, 1 if M > 0 else 2, upper_root(x2), x2, order, r,
                                  {"branch": branch}))
    return out


def predict_zeros(mu, data: LateOrderData, M_range: Iterable[int], order: str = "full",
                  variant: str = "consistent", branch: str = "consistent",
                  cfg: PrecisionConfig | None = None) -> list[Prediction]:
    """Zero locations; ``log-corrected`` and ``full`` coincide for zeros."""
    Ms = _check(M_range, order, branch)
    if variant not in ("consistent", "printed"):
        raise ValueError("variant must be 'consistent' or 'printed'")
    cfg = ensure_config(cfg)
    out = []
    with cfg.workprec():
        mu = mpf(mu)
        ser = zero_series(mu, cfg)
        sigma = data.sigma
        meta = {"variant": variant, "branch": branch,
                "log_tau1": mpmath.log(ser.tau1),  # = pi i/2 - log 2
                "log_tau1_identity": mpc(0, 1) * mpmath.pi / 2 - mpmath.log(2)}
        for M in Ms:
            r = zero_r(M, sigma, branch)
            if order == "leading":
                x2 = 8 * mu * mpc(0, 1) * M * mpmath.pi
            else:
                L = _log(4 * mu * r)
                x2 = ser.c[0] * r + ser.c[1] * L
                if variant == "printed":
                    x2 += -6 * mu * mpmath.pi * mpc(0, 1) + 4 * mu * mpmath.log(2)
            out.append(Prediction("zero", M, 1 if M > 0 else 2, upper_root(x2), x2, order, r, dict(meta)))
    return out


def quadrant2_params(params: TransseriesParams, cfg: PrecisionConfig | None = None) -> TransseriesParams:
    """Transseries constant for the exponential switched on across the negative real axis.

    There the exponential is ``exp(-pi/(2 mu))`` times the principal-branch
    continuation of the quadrant-1 term.
    """
    with ensure_config(cfg).workprec():
        return TransseriesParams(params.mu, params.sigma * mpmath.exp(-mpmath.pi / (2 * params.mu)), params.alpha)


def residual_at_prediction(pred: Prediction, params: TransseriesParams,
                           cfg: PrecisionConfig | None = None) -> mpf:
    """Distance of ``tau(xi_pred)`` from the local expansion it was built from."""
    cfg = ensure_config(cfg)
    with cfg.workprec():
        xi = mpc(pred.xi)
        if xi == 0:
            raise ValueError("prediction at xi = 0")
        if pred.quadrant == 2 and pred.meta.get("branch", "consistent") == "consistent":
            params = quadrant2_params(params, cfg)
        t = tau(xi, params, cfg)
        if pred.kind == "pole":
            ser = pole_series(params.mu, cfg)
            target = ser.tau0 + ser.tau1 / xi**2 + ser.tau2 / xi**4
        else:
            target = zero_series(params.mu, cfg).tau1 / xi**2
        return abs(t - target)
