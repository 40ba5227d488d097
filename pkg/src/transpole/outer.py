"""Algebraic far-field series of the inner Riccati equation.

The inner problem ``mu U' = -xi U / 2 + U^2 / 2 - i/4`` has the divergent
expansion ``U ~ sum_n V_n(z)`` with ``z = xi`` once the bookkeeping
parameter epsilon is set to one.  Two independent routes are provided:

* :func:`build_outer_series` solves the Laurent-polynomial recurrence
  ``z V_n' + V_n = -2 mu V_{n-1}'' + 2 sum_j V_j' V_{n-1-j}`` term by term,
  discarding the homogeneous ``1/z`` mode (decay condition).
* :func:`a0_coefficients` runs the scalar recurrence for the coefficients
  ``a_m`` of ``xi^(1-2m)`` directly.

Every ``V_n`` turns out to be a single monomial ``a_{n+1} z^{-(2n+1)}``,
so the two routes must agree exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import mpmath
from mpmath import mpc, mpf

from .precision import DomainError, PrecisionConfig, ensure_config


@dataclass(frozen=True)
class LaurentSeries:
    """Finite Laurent polynomial ``sum_k coeffs[k] z**k``."""

    coeffs: Mapping[int, mpc] = field(default_factory=dict)

    @classmethod
    def monomial(cls, power: int, c) -> "LaurentSeries":
        return cls({power: mpc(c)})

    def powers(self) -> list[int]:
        return sorted(self.coeffs)

    def __getitem__(self, k: int) -> mpc:
        return self.coeffs.get(k, mpc(0))

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, mpc(0)) + c
        return LaurentSeries(out)

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        return self + other.scale(-1)

    def __mul__(self, other: "LaurentSeries") -> "LaurentSeries":
        out: dict[int, mpc] = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                out[k1 + k2] = out.get(k1 + k2, mpc(0)) + c1 * c2
        return LaurentSeries(out)

    def scale(self, s) -> "LaurentSeries":
        return LaurentSeries({k: c * s for k, c in self.coeffs.items()})

    def derivative(self) -> "LaurentSeries":
        return LaurentSeries({k - 1: k * c for k, c in self.coeffs.items() if k != 0})

    def times_z(self) -> "LaurentSeries":
        return LaurentSeries({k + 1: c for k, c in self.coeffs.items()})

    def max_abs(self) -> mpf:
        return max((abs(c) for c in self.coeffs.values()), default=mpf(0))

    def __call__(self, z) -> mpc:
        z = mpc(z)
        if z == 0 and any(k < 0 for k in self.coeffs):
            raise DomainError("Laurent series evaluated at z = 0")
        return mpmath.fsum(c * z**k for k, c in self.coeffs.items())


@dataclass(frozen=True)
class OuterSeriesTable:
    mu: mpf
    terms: tuple[LaurentSeries, ...]
    cfg: PrecisionConfig

    @property
    def n_max(self) -> int:
        return len(self.terms) - 1

    def coefficient(self, n: int) -> mpc:
        """The single coefficient of ``V_n``, i.e. ``a_{n+1}^{(0)}``."""
        return self.terms[n][-(2 * n + 1)]


@dataclass(frozen=True)
class TruncationSpec:
    """Truncation after ``N`` terms; ``omega = N - |chi|`` records the offset."""

    N: int
    omega: mpf | None = None

    def __post_init__(self) -> None:
        if self.N < 0:
            raise ValueError("N must be nonnegative")
        if self.omega is not None and not (0 <= self.omega <= 1):
            raise ValueError("omega must lie in [0, 1]")


def _rhs(prev: Iterable[LaurentSeries], mu) -> LaurentSeries:
    prev = list(prev)
    n = len(prev)
    rhs = prev[-1].derivative().derivative().scale(-2 * mu)
    for j in range(n):
        rhs = rhs + (prev[j].derivative() * prev[n - 1 - j]).scale(2)
    return rhs


def _solve_euler(rhs: LaurentSeries) -> LaurentSeries:
    # z V' + V = sum r_p z^p  =>  (p + 1) c_p = r_p; the p = -1 mode is homogeneous.
    out = {}
    for p, r in rhs.coeffs.items():
        if p == -1:
            if abs(r) > 0 and abs(r) > rhs.max_abs() * mpf(2) ** (16 - mpmath.mp.prec):
                raise ArithmeticError("resonant 1/z forcing in the outer recurrence")
            continue
        if r != 0:
            out[p] = r / (p + 1)
    return LaurentSeries(out)


def build_outer_series(mu, n_max: int, cfg: PrecisionConfig | None = None) -> OuterSeriesTable:
    """Compute ``V_0 .. V_{n_max}`` from the Laurent recurrence."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    cfg = ensure_config(cfg)
    with cfg.workprec():
        mu = mpf(mu)
        if not mu > 0:
            raise ValueError("mu must be positive")
        terms = [LaurentSeries.monomial(-1, mpc(0, -0.5))]
        for _ in range(n_max):
            terms.append(_solve_euler(_rhs(terms, mu)))
    return OuterSeriesTable(mu, tuple(terms), cfg)


def recurrence_residual(table: OuterSeriesTable, n: int) -> mpf:
    """Largest residual coefficient of the ``V_n`` equation, relative to its terms."""
    if not 1 <= n <= table.n_max:
        raise ValueError("n out of range")
    with table.cfg.workprec():
        v = table.terms[n]
        lhs = v.derivative().times_z() + v
        rhs = _rhs(table.terms[:n], table.mu)
        scale = max(lhs.max_abs(), rhs.max_abs(), mpf(1))
        return (lhs - rhs).max_abs() / scale


def a0_coefficients(mu, m_max: int, cfg: PrecisionConfig | None = None) -> list[mpc]:
    """Far-field coefficients ``a_m^(0)`` of ``xi^(1-2m)``.

    Returns a list of length ``m_max + 1`` indexed by ``m``; entry 0 is
    ``a_0^(0) = 0`` so the list can serve directly as the ``n = 0`` column
    of the transseries table.
    """
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    cfg = ensure_config(cfg)
    with cfg.workprec():
        mu = mpf(mu)
        a = [mpc(0), mpc(0, -0.5)]
        for k in range(2, m_max + 1):
            conv = mpmath.fsum(a[j] * a[k - j] for j in range(1, k))
            a.append(2 * mu * (2 * k - 3) * a[k - 1] + conv)
    return a


def optimal_truncation(xi, mu) -> TruncationSpec:
    """``N = floor(|xi^2 / 4 mu|) + 1``."""
    chi = abs(mpc(xi) ** 2 / (4 * mpf(mu)))
    N = int(mpmath.floor(chi)) + 1
    return TruncationSpec(N, N - chi)


def term_magnitudes(table: OuterSeriesTable, xi) -> list[mpf]:
    with table.cfg.workprec():
        xi = mpc(xi)
        return [abs(v(xi)) for v in table.terms]


def smallest_term_index(table: OuterSeriesTable, xi) -> int:
    mags = term_magnitudes(table, xi)
    return min(range(len(mags)), key=mags.__getitem__)


def evaluate_truncated(table: OuterSeriesTable, xi, spec: TruncationSpec | int | str = "optimal") -> mpc:
    """Partial sum ``V_0(xi) + ... + V_{N-1}(xi)``."""
    with table.cfg.workprec():
        xi = mpc(xi)
        if xi == 0:
            raise DomainError("evaluate_truncated at xi = 0")
        if spec == "optimal":
            spec = optimal_truncation(xi, table.mu)
        elif isinstance(spec, int):
            spec = TruncationSpec(spec)
        elif not isinstance(spec, TruncationSpec):
            raise ValueError(f"unknown truncation spec {spec!r}")
        if spec.N - 1 > table.n_max:
            raise ValueError(f"table holds {table.n_max + 1} terms, truncation needs {spec.N}")
        return mpmath.fsum(table.terms[n](xi) for n in range(spec.N))


def far_field_value(mu, xi, cfg: PrecisionConfig | None = None) -> mpc:
    """Optimally truncated far-field sum straight from the scalar coefficients."""
    cfg = ensure_config(cfg)
    with cfg.workprec():
        xi = mpc(xi)
        N = optimal_truncation(xi, mu).N
        a = a0_coefficients(mu, N, cfg)
        return mpmath.fsum(a[m] * xi ** (1 - 2 * m) for m in range(1, N + 1))
