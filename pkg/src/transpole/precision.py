"""Configurable-precision scalar layer.

Everything numeric in the package runs on :mod:`mpmath` ``mpf``/``mpc``
values.  This module fixes the conventions (principal branches, explicit
working precision, error types) so the rest of the code can stay terse.

Working precision is always entered explicitly through
:meth:`PrecisionConfig.workprec`; nothing here mutates ``mp.prec``
permanently.  Because mpmath keeps its precision in a process-global
context, evaluation is safe to parallelise across processes but not
across threads.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import mpmath
from mpmath import mp, mpc, mpf

BigReal = mpf
BigComplex = mpc
Number = Union[int, float, complex, mpf, mpc, str]

DEFAULT_PREC_BITS = 256
MIN_PREC_BITS = 64


class DomainError(ValueError):
    """Argument outside the domain of a function (log 0, Gamma pole, ...)."""


class PrecisionError(ArithmeticError):
    """Cancellation ate more bits than the working precision provides.

    ``required_bits`` is a lower bound for a precision that would succeed.
    """

    def __init__(self, message: str, required_bits: int | None = None):
        super().__init__(message)
        self.required_bits = required_bits


@dataclass(frozen=True)
class PrecisionConfig:
    """Working precision and the relative tolerance for convergent series.

    ``series_tol`` defaults to ``2**(8 - prec_bits)``.
    """

    prec_bits: int = DEFAULT_PREC_BITS
    series_tol: mpf | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.prec_bits, int) or self.prec_bits < MIN_PREC_BITS:
            raise ValueError(f"prec_bits must be an integer >= {MIN_PREC_BITS}, got {self.prec_bits!r}")
        if self.series_tol is None:
            object.__setattr__(self, "series_tol", mpf(2) ** (8 - self.prec_bits))
        else:
            tol = mpf(self.series_tol)
            if not tol > 0:
                raise ValueError("series_tol must be positive")
            if tol < mpf(2) ** (1 - self.prec_bits):
                raise ValueError("series_tol below 2**(1 - prec_bits) cannot be honoured")
            object.__setattr__(self, "series_tol", tol)

    @property
    def digits(self) -> int:
        """Decimal digits carried at this precision (floor)."""
        return int(self.prec_bits * 0.30102999566398120)

    def workprec(self, extra: int = 0):
        """Context manager setting mpmath to ``prec_bits + extra`` bits."""
        return mp.workprec(self.prec_bits + extra)

    def boosted(self, bits: int) -> "PrecisionConfig":
        """Copy with ``bits`` more precision (tolerance rescaled)."""
        return PrecisionConfig(self.prec_bits + bits)


def ensure_config(cfg: PrecisionConfig | None) -> PrecisionConfig:
    return cfg if cfg is not None else PrecisionConfig()


def to_complex(z: Number) -> mpc:
    """Convert to ``mpc`` at the current working precision."""
    return mpc(z)


def to_real(x: Number) -> mpf:
    return mpf(x)


def cexp(z: Number) -> mpc:
    return mpmath.exp(mpc(z))


def clog(z: Number) -> mpc:
    """Principal logarithm, imaginary part in (-pi, pi]."""
    z = mpc(z)
    if z == 0:
        raise DomainError("clog(0) is undefined")
    return mpmath.log(z)


def cpow(z: Number, a: Number) -> mpc:
    """``exp(a*clog(z))`` on the principal branch."""
    z = mpc(z)
    a = mpc(a)
    if z == 0:
        if a.real <= 0:
            raise DomainError("0 raised to a power with Re(a) <= 0")
        return mpc(0)
    if a == 0:
        return mpc(1)
    return mpmath.exp(a * mpmath.log(z))


def log_gamma(z: Number) -> mpc:
    """Principal-branch log Gamma (continuous away from the negative axis)."""
    z = mpc(z)
    if z.imag == 0 and z.real <= 0 and z.real == int(z.real):
        raise DomainError(f"log_gamma has a pole at {z.real}")
    return mpmath.loggamma(z)


def erf_real(x: Number) -> mpf:
    return mpmath.erf(mpf(x))


def nstr(x, digits: int = 30) -> str:
    """Fixed-width text form used by every text output (30 significant digits)."""
    return mpmath.nstr(x, digits)
