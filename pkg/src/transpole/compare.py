"""Comparison pipeline, figure data and self-test.

The pipeline mirrors the usual workflow: asymptotic predictions seed the
Newton search on the exact solution, roots are matched back to their
index M, and the prediction error is tabulated.
"""
from __future__ import annotations

import colorsys
import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import mpmath
import numpy as np
from mpmath import mpc, mpf

from . import lateorder, locator, oracle, outer, transseries
from .lateorder import LambdaCache, LateOrderData, compute_lambda
from .precision import PrecisionConfig, PrecisionError, nstr

DIGITS = 30


@dataclass(frozen=True)
class RunConfig:
    mu: float | str = 1
    prec_bits: int = 256
    n_lambda: int = 1000
    m_range: tuple[int, int] = (1, 12)
    output_format: str = "csv"
    cache_path: str | None = None

    def __post_init__(self) -> None:
        if not float(self.mu) > 0:
            raise ValueError("mu must be positive")
        PrecisionConfig(self.prec_bits)  # validates
        if self.n_lambda < 100:
            raise ValueError("n_lambda must be >= 100")
        lo, hi = self.m_range
        if lo > hi:
            raise ValueError("empty M range")
        if self.output_format not in ("csv", "json", "ppm"):
            raise ValueError("output_format must be csv, json or ppm")

    @property
    def precision(self) -> PrecisionConfig:
        return PrecisionConfig(self.prec_bits)

    def mu_mp(self) -> mpf:
        with mpmath.workprec(self.prec_bits):
            return mpf(self.mu)

    def indices(self) -> list[int]:
        lo, hi = self.m_range
        return [M for M in range(lo, hi + 1) if M != 0]


def get_lambda(cfg: RunConfig, mu=None) -> LateOrderData:
    cache = LambdaCache(cfg.cache_path) if cfg.cache_path else None
    return compute_lambda(cfg.mu_mp() if mu is None else mu, cfg.n_lambda, cfg.precision, cache=cache)


@dataclass(frozen=True)
class ComparisonRow:
    M: int
    xi_pred: mpc
    xi_oracle: mpc
    abs_error: mpf
    kind: str
    order: str
    converged: bool = True


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow]
    decay_ok: bool
    flagged: list[int] = field(default_factory=list)

    def summary(self) -> str:
        state = "PASS" if self.decay_ok else "FAIL"
        return f"error decay in |M| (|M| >= 2, per quadrant): {state}; unconverged: {self.flagged or 'none'}"


def strictly_decreasing(vals: list) -> bool:
    return all(b < a for a, b in zip(vals, vals[1:]))


def decay_holds(rows: Iterable[ComparisonRow]) -> bool:
    rows = [r for r in rows if r.converged and abs(r.M) >= 2]
    for sign in (1, -1):
        q = sorted((r for r in rows if r.M * sign > 0), key=lambda r: abs(r.M))
        if not strictly_decreasing([r.abs_error for r in q]):
            return False
    return True


def predictions(cfg: RunConfig, data: LateOrderData, kind: str, order: str = "full",
                Ms: list[int] | None = None, **kw) -> list[locator.Prediction]:
    Ms = cfg.indices() if Ms is None else Ms
    fn = locator.predict_poles if kind == "pole" else locator.predict_zeros
    return fn(data.mu, data, Ms, order=order, cfg=cfg.precision, **kw)


def oracle_roots(sol: oracle.LinearSolution, seeds: list[locator.Prediction], kind: str) -> dict[int, oracle.RootRecord]:
    """Roots keyed by the index of the seed they were started from."""
    out = {}
    for p in seeds:
        rec = oracle.find_roots(sol, kind, [p])[0]
        out[p.M] = oracle.RootRecord(rec.kind, rec.xi, rec.newton_iters, rec.residual, p.M, rec.converged)
    return out


def cmd_compare(cfg: RunConfig, kind: str = "pole", order: str = "full", data: LateOrderData | None = None,
                sol: oracle.LinearSolution | None = None, **kw) -> ComparisonReport:
    data = data or get_lambda(cfg)
    sol = sol or oracle.build_linear_solution(data.mu, cfg.precision)
    with cfg.precision.workprec():
        seeds = predictions(cfg, data, kind, "full")
        roots = oracle_roots(sol, seeds, kind)
        preds = seeds if order == "full" and not kw else predictions(cfg, data, kind, order, **kw)
        rows = []
        for p in preds:
            r = roots[p.M]
            rows.append(ComparisonRow(p.M, p.xi, r.xi, abs(p.xi - r.xi), kind, order, r.converged))
        rows.sort(key=lambda r: abs(r.xi_oracle))
    flagged = [r.M for r in rows if not r.converged]
    return ComparisonReport(rows, decay_holds(rows), flagged)


# ----------------------------------------------------------- text output


def cnum(z) -> tuple[str, str]:
    z = mpc(z)
    return nstr(z.real, DIGITS), nstr(z.imag, DIGITS)


def write_csv(header: list[str], rows: Iterable[list]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for r in rows:
        wr.writerow(r)
    return buf.getvalue()


def write_json(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def rows_to_records(header: list[str], rows: Iterable[list]) -> list[dict]:
    return [dict(zip(header, r)) for r in rows]


def comparison_table(rows: list[ComparisonRow]) -> tuple[list[str], list[list]]:
    header = ["kind", "order", "M", "pred_re", "pred_im", "oracle_re", "oracle_im", "abs_error", "converged"]
    out = []
    for r in rows:
        out.append([r.kind, r.order, r.M, *cnum(r.xi_pred), *cnum(r.xi_oracle), nstr(r.abs_error, DIGITS),
                    int(r.converged)])
    return header, out


# ------------------------------------------------------------ figure data


def phase_image(grid: oracle.PhaseGrid, markers: Iterable[tuple[complex, str]] = ()) -> bytes:
    """Binary P6 pixmap: hue = (phase + pi) / 2 pi; poles white, zeros black."""
    ny, nx = grid.phase.shape
    img = np.zeros((ny, nx, 3), dtype=np.uint8)
    for j in range(ny):
        for i in range(nx):
            p = grid.phase[j, i]
            if not math.isnan(p):
                rgb = colorsys.hsv_to_rgb((p + math.pi) / (2 * math.pi) % 1.0, 1.0, 1.0)
                img[j, i] = [int(round(255 * c)) for c in rgb]
    x0, x1, y0, y1 = grid.xs[0], grid.xs[-1], grid.ys[0], grid.ys[-1]
    for z, kind in markers:
        i = int(round((z.real - x0) / (x1 - x0) * (nx - 1)))
        j = int(round((z.imag - y0) / (y1 - y0) * (ny - 1)))
        colour = 255 if kind == "pole" else 0
        for dj in (-1, 0, 1):
            for di in (-1, 0, 1):
                if 0 <= j + dj < ny and 0 <= i + di < nx:
                    img[j + dj, i + di] = colour
    img = img[::-1]  # first row of the image is the top of the window
    return f"P6\n{nx} {ny}\n255\n".encode() + img.tobytes()


def read_ppm(blob: bytes) -> np.ndarray:
    head, _, rest = blob.partition(b"\n255\n")
    magic, dims = head.split(b"\n")
    if magic != b"P6":
        raise ValueError("not a P6 pixmap")
    nx, ny = map(int, dims.split())
    return np.frombuffer(rest, dtype=np.uint8).reshape(ny, nx, 3)


def marker_predictions(cfg: RunConfig, data: LateOrderData, region) -> list[locator.Prediction]:
    xmin, xmax, ymin, ymax = region
    Ms = [M for M in range(-40, 41) if M != 0]
    out = []
    for kind in ("pole", "zero"):
        for p in predictions(cfg, data, kind, "full", Ms):
            if xmin <= p.xi.real <= xmax and ymin <= p.xi.imag <= ymax:
                out.append(p)
    return out


def phase_csv(grid: oracle.PhaseGrid, markers: list[locator.Prediction]) -> tuple[list[str], list[list]]:
    header = ["kind", "x", "y", "phase"]
    rows = []
    for j, y in enumerate(grid.ys):
        for i, x in enumerate(grid.xs):
            p = grid.phase[j, i]
            rows.append(["grid", repr(float(x)), repr(float(y)), "nan" if math.isnan(p) else repr(float(p))])
    for m in markers:
        rows.append([f"pred_{m.kind}", nstr(m.xi.real, DIGITS), nstr(m.xi.imag, DIGITS), m.M])
    return header, rows


STOKES_RAYS = [
    (0.0, "stokes_curve"),
    (math.pi / 4, "anti_stokes_curve"),
    (3 * math.pi / 4, "anti_stokes_curve"),
    (math.pi, "stokes_curve"),
    (-3 * math.pi / 4, "anti_stokes_curve"),
    (-math.pi / 4, "anti_stokes_curve"),
]


def stokes_diagram(mu, radius: float = 10.0) -> tuple[list[str], list[list]]:
    """Boundary rays and sector labels (sampled at mid-angles) from classify_sector."""
    header = ["element", "angle", "label", "sector_id", "x0", "y0", "x1", "y1"]
    rows = []
    for ang, _ in STOKES_RAYS:
        sc = lateorder.classify_sector(mpmath.expj(ang), mu)
        rows.append(["ray", repr(ang), sc.label, sc.sector_id, "0", "0",
                     repr(radius * math.cos(ang)), repr(radius * math.sin(ang))])
    for ang in (math.pi / 8, math.pi / 2, 7 * math.pi / 8, -math.pi / 2, -7 * math.pi / 8, -math.pi / 8):
        sc = lateorder.classify_sector(mpmath.expj(ang), mu)
        rows.append(["sector", repr(ang), sc.label, sc.sector_id, "", "",
                     repr(0.6 * radius * math.cos(ang)), repr(0.6 * radius * math.sin(ang))])
    return header, rows


def lambda_sweep(cfg: RunConfig, mus: Iterable) -> tuple[list[str], list[list]]:
    header = ["mu", "lambda_re", "lambda_im", "lambda_abs", "converged_digits"]
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for mu in mus:
            d = get_lambda(cfg, mu)
            rows.append([nstr(d.mu, DIGITS), *cnum(d.lambda_), nstr(abs(d.lambda_), DIGITS), d.converged_digits])
    return header, rows


def default_sweep_grid(prec_bits: int = 256) -> list[mpf]:
    with mpmath.workprec(prec_bits):
        return [mpf(k) / 10 for k in range(3, 31)]


# -------------------------------------------------------------- selftest


@dataclass
class Check:
    mu: str
    name: str
    ok: bool
    detail: str = ""


def _run(checks: list[Check], mu, name: str, fn) -> None:
    try:
        ok, detail = fn()
    except PrecisionError as exc:
        ok, detail = False, f"precision guard: {exc}"
    except (ArithmeticError, ValueError) as exc:
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    checks.append(Check(str(mu), name, bool(ok), detail))


def selftest(cfg: RunConfig, mus=("0.5", "1", "2")) -> tuple[list[Check], list[str]]:
    """Invariant checks at each mu; returns (checks, warnings)."""
    pc = cfg.precision
    checks: list[Check] = []
    notes: list[str] = []
    tol = mpf(2) ** (20 - cfg.prec_bits)
    for mu_s in mus:
        with pc.workprec():
            mu = mpf(mu_s)
            i = mpc(0, 1)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")

            def outer_check():
                a = outer.a0_coefficients(mu, 3, pc)
                t = outer.build_outer_series(mu, 20, pc)
                with pc.workprec():
                    err = max(abs(a[1] + i / 2), abs(a[2] - (-mpf(1) / 4 - i * mu)),
                              abs(a[3] - (i / 4 - 5 * mu / 2 - 6 * i * mu**2)) / abs(a[3]))
                    res = max(outer.recurrence_residual(t, n) for n in range(1, 21))
                return err < tol and res < tol, f"anchor err {nstr(err, 3)}, residual {nstr(res, 3)}"

            def coeff_check():
                tb = transseries.build_coeff_table(mu, 3, 3, pc)
                with pc.workprec():
                    ref = {
                        (1, 1): i / 2 + 1 / (8 * mu),
                        (2, 1): 3 * i * mu / 2 + mpf(1) / 2 + 1 / (128 * mu**2),
                        (3, 1): 10 * i * mu**2 + 55 * mu / 12 - 7 * i / 16 + 1 / (24 * mu)
                        - i / (256 * mu**2) + 1 / (3072 * mu**3),
                        (0, 2): mpc(-1), (1, 2): 2 * mu - 1 / (4 * mu),
                        (2, 2): -12 * mu**2 - 7 * i * mu + mpf(1) / 4 + i / (8 * mu) - 1 / (32 * mu**2),
                    }
                    err = max(abs(tb[k] - v) / abs(v) for k, v in ref.items())
                return err < tol, f"max rel err {nstr(err, 3)}"

            def a_check():
                rep = transseries.verify_A_odes(mu, [mpc(0.3, 0.1), mpc(-0.5), mpc(1.7, -2.2)], pc)
                tb = transseries.build_coeff_table(mu, 2, 12, pc)
                with pc.workprec():
                    worst = mpf(0)
                    for m in range(3):
                        tay = transseries.transasymptotic(m, mu, pc).rational.taylor(12)
                        for n in range(13):
                            worst = max(worst, abs(tay[n] - tb[m, n]) / max(abs(tb[m, n]), 1))
                return rep.ok and worst < tol, f"ode {nstr(rep.max_residual, 3)}, taylor {nstr(worst, 3)}"

            data_box = {}

            def lambda_check():
                d = get_lambda(cfg, mu)
                data_box["d"] = d
                return d.converged_digits >= 6, f"Lambda={nstr(d.lambda_, 20)}, digits {d.converged_digits}"

            def late_check():
                t = outer.build_outer_series(mu, 40, pc)
                r = lateorder.late_order_ratio(t, mpc(0, -2), 40)
                return abs(r - 1) < 0.05, f"|ratio-1| at n=40: {nstr(abs(r - 1), 3)}"

            sol_box = {}

            def oracle_check():
                sol = oracle.build_linear_solution(mu, pc)
                sol_box["s"] = sol
                pts = [mpc(0, -10), mpc(3, -4), mpc(-5, -5), mpc(7, 2), mpc(-6, 6), mpc(9, 9)]
                res = max(sol.riccati_residual(p) for p in pts)
                lim = mpf(10) ** -(pc.digits // 2)
                return res < lim, f"max Riccati residual {nstr(res, 3)}"

            def pole_check():
                d, sol = data_box["d"], sol_box["s"]
                rep = cmd_compare(RunConfig(cfg.mu, cfg.prec_bits, cfg.n_lambda, (2, 8)), "pole", data=d, sol=sol)
                worst = max((r.abs_error for r in rep.rows), default=mpf(1))
                return rep.decay_ok and not rep.flagged, f"decay {rep.decay_ok}, max err {nstr(worst, 3)}, unconverged {rep.flagged}"

            def interlace_check():
                d, sol = data_box["d"], sol_box["s"]
                with pc.workprec():
                    ps = oracle_roots(sol, predictions(cfg, d, "pole", "full", list(range(1, 7))), "pole")
                    zs = oracle_roots(sol, predictions(cfg, d, "zero", "full", list(range(1, 8))), "zero")
                    seq = sorted([(abs(r.xi), "p") for r in ps.values()] + [(abs(r.xi), "z") for r in zs.values()])
                    kinds = "".join(k for _, k in seq)
                return kinds == "zp" * 6 + "z", kinds

            for name, fn in (("outer_series", outer_check), ("coeff_anchors", coeff_check),
                             ("A_closed_forms", a_check), ("lambda_convergence", lambda_check),
                             ("late_order_ratio", late_check), ("oracle_residual", oracle_check)):
                _run(checks, mu_s, name, fn)
            if "d" in data_box and "s" in sol_box:
                _run(checks, mu_s, "pole_error_decay", pole_check)
                _run(checks, mu_s, "interlacing", interlace_check)
            else:
                checks.append(Check(mu_s, "pole_error_decay", False, "skipped: prerequisites failed"))
                checks.append(Check(mu_s, "interlacing", False, "skipped: prerequisites failed"))
        notes.extend(f"mu={mu_s}: {w.message}" for w in caught)
    return checks, notes


def guard_probe(cfg: RunConfig, radius: float = 8.0) -> list[Check]:
    """Evaluate the oracle just outside ``|xi| = radius`` and report guard trips."""
    pc = cfg.precision
    out = []
    mu = cfg.mu_mp()
    sol = oracle.build_linear_solution(mu, pc)
    for k in range(8):
        xi = mpc(mpmath.expjpi(mpf(2 * k + 1) / 8)) * (radius + 1)
        try:
            sol.U(xi)
            out.append(Check(str(cfg.mu), f"guard@{k}", True, f"U evaluated at |xi|={radius + 1}"))
        except PrecisionError as exc:
            out.append(Check(str(cfg.mu), f"guard@{k}", False, f"precision guard: needs {exc.required_bits} bits"))
    return out
