"""Command-line interface.

Exit status: 0 on success, 1 when a computation fails (precision guard,
non-convergence, failed self-test or decay assertion), 2 on bad arguments.
"""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import mpmath
from mpmath import mpc, mpf

from . import compare, lateorder, locator, oracle, outer, transseries
from .compare import DIGITS, RunConfig, cnum, write_csv, write_json
from .precision import PrecisionError, nstr


class ArgError(Exception):
    pass


def _common(p: argparse.ArgumentParser, formats=("csv", "json"), default="csv") -> None:
    p.add_argument("--mu", default="1", help="viscosity-like parameter mu > 0 (default 1)")
    p.add_argument("--prec-bits", type=int, default=256, help="working precision in bits (default 256)")
    p.add_argument("--cache", default=None, help="JSON-lines cache for Lambda")
    p.add_argument("--format", choices=formats, default=default)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--n", dest="n_lambda", type=int, default=1000, help="Lambda recurrence depth")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="transpole", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="far-field coefficients a_m^(0) / V_n")
    _common(p, default="json")
    p.add_argument("--nmax", type=int, default=10)

    p = sub.add_parser("lambda", help="Stokes constant Lambda(mu)")
    _common(p, default="json")

    p = sub.add_parser("transseries", help="transseries coefficient table")
    _common(p)
    p.add_argument("--mmax", type=int, default=4)
    p.add_argument("--nmax", type=int, default=4)

    for name in ("predict", "roots", "compare"):
        p = sub.add_parser(name)
        _common(p)
        p.add_argument("--kind", choices=("pole", "zero"), default="pole")
        p.add_argument("--mmin", type=int, default=1)
        p.add_argument("--mmax", type=int, default=12)
        if name != "roots":
            p.add_argument("--order", choices=locator.ORDERS, default="full")
        p.add_argument("--branch", choices=("consistent", "printed"), default="consistent")
        p.add_argument("--variant", choices=("consistent", "printed"), default="consistent",
                       help="zero formula variant")

    p = sub.add_parser("phase", help="phase of U on a grid")
    _common(p, formats=("csv", "ppm"))
    for k, v in (("xmin", -8.0), ("xmax", 8.0), ("ymin", 0.0), ("ymax", 8.0)):
        p.add_argument(f"--{k}", type=float, default=v)
    p.add_argument("--res", default="161x81", help="NXxNY grid points")

    p = sub.add_parser("figure-data", help="data files for the standard figures")
    _common(p)
    p.add_argument("--figure", required=True, choices=("phase", "stokes_diagram", "error_plot", "lambda_sweep"))
    p.add_argument("--res", default="161x81")
    p.add_argument("--mmin", type=int, default=1)
    p.add_argument("--mmax", type=int, default=12)

    p = sub.add_parser("selftest", help="invariant checks at mu = 1/2, 1, 2")
    _common(p, default="json")
    p.add_argument("--mus", default="0.5,1,2")
    return ap


def _emit(args, text: str | bytes) -> None:
    if args.out:
        mode = "wb" if isinstance(text, bytes) else "w"
        with open(args.out, mode) as fh:
            fh.write(text)
    elif isinstance(text, bytes):
        sys.stdout.buffer.write(text)
    else:
        sys.stdout.write(text)


def _table(args, header, rows) -> None:
    if args.format == "json":
        _emit(args, write_json(compare.rows_to_records(header, rows)))
    else:
        _emit(args, write_csv(header, rows))


def _config(args, m_range=(1, 12)) -> RunConfig:
    try:
        return RunConfig(mu=args.mu, prec_bits=args.prec_bits, n_lambda=args.n_lambda, m_range=m_range,
                         output_format=args.format, cache_path=args.cache)
    except ValueError as exc:
        raise ArgError(str(exc)) from exc


def _res(s: str) -> tuple[int, int]:
    try:
        nx, ny = (int(v) for v in s.lower().split("x"))
    except ValueError as exc:
        raise ArgError(f"--res must look like 161x81, got {s!r}") from exc
    return nx, ny


def run(args) -> int:
    cmd = args.command
    if cmd in ("predict", "roots", "compare", "figure-data"):
        if args.mmin > args.mmax:
            raise ArgError("--mmin exceeds --mmax")
        cfg = _config(args, (args.mmin, args.mmax))
    else:
        cfg = _config(args)
    mu = cfg.mu_mp()
    pc = cfg.precision

    if cmd == "coeffs":
        if args.nmax < 1:
            raise ArgError("--nmax must be >= 1")
        tab = outer.build_outer_series(mu, args.nmax, pc)
        recs = []
        for n, v in enumerate(tab.terms):
            for power in v.powers():
                re, im = cnum(v[power])
                recs.append({"mu": nstr(mu, DIGITS), "n": n, "m": n + 1, "power": power, "re": re, "im": im})
        if args.format == "json":
            _emit(args, write_json(recs))
        else:
            _emit(args, write_csv(list(recs[0]), [list(r.values()) for r in recs]))
        return 0

    if cmd == "lambda":
        d = compare.get_lambda(cfg)
        re, im = cnum(d.lambda_)
        rec = {"mu": nstr(mu, DIGITS), "lambda_re": re, "lambda_im": im, "converged_digits": d.converged_digits,
               "n": d.n_used, "prec_bits": cfg.prec_bits}
        if d.raw_lambda is not None:
            rec["raw_lambda_re"], rec["raw_lambda_im"] = cnum(d.raw_lambda)
        if args.format == "json":
            _emit(args, write_json(rec))
        else:
            _emit(args, write_csv(list(rec), [list(rec.values())]))
        return 0

    if cmd == "transseries":
        if args.mmax < 2 or args.nmax < 2:
            raise ArgError("--mmax and --nmax must be >= 2")
        tb = transseries.build_coeff_table(mu, args.mmax, args.nmax, pc)
        rows = [[m, n, *cnum(tb[m, n])] for m in range(tb.m_max + 1) for n in range(tb.n_max + 1)]
        _table(args, ["m", "n", "re", "im"], rows)
        return 0

    if cmd == "predict":
        Ms = cfg.indices()
        if not Ms:
            raise ArgError("M range contains only 0")
        d = compare.get_lambda(cfg)
        kw = {"branch": args.branch}
        if args.kind == "zero":
            kw["variant"] = args.variant
        preds = compare.predictions(cfg, d, args.kind, args.order, Ms, **kw)
        params = transseries.TransseriesParams.active(d)
        rows = [[p.kind, p.M, *cnum(p.xi), nstr(locator.residual_at_prediction(p, params, pc), DIGITS)]
                for p in preds]
        _table(args, ["kind", "M", "re", "im", "residual"], rows)
        return 0

    if cmd == "roots":
        d = compare.get_lambda(cfg)
        sol = oracle.build_linear_solution(mu, pc)
        kw = {"branch": args.branch}
        if args.kind == "zero":
            kw["variant"] = args.variant
        seeds = compare.predictions(cfg, d, args.kind, "full", cfg.indices(), **kw)
        roots = compare.oracle_roots(sol, seeds, args.kind)
        rows = [[r.kind, M, *cnum(r.xi), nstr(r.residual, 6), r.newton_iters, int(r.converged)]
                for M, r in roots.items()]
        _table(args, ["kind", "M", "re", "im", "residual", "newton_iters", "converged"], rows)
        bad = [M for M, r in roots.items() if not r.converged]
        if bad:
            print(f"transpole: computation failed: Newton did not converge for M = {bad}", file=sys.stderr)
        return 1 if bad else 0

    if cmd == "compare":
        kw = {"branch": args.branch}
        if args.kind == "zero":
            kw["variant"] = args.variant
        rep = compare.cmd_compare(cfg, args.kind, args.order, **kw)
        header, rows = compare.comparison_table(rep.rows)
        if args.format == "json":
            _emit(args, write_json({"rows": compare.rows_to_records(header, rows),
                                    "summary": {"decay_ok": rep.decay_ok, "unconverged": rep.flagged}}))
        else:
            _emit(args, write_csv(header, rows))
        print(rep.summary(), file=sys.stderr)
        return 0 if rep.decay_ok else 1

    if cmd == "phase":
        nx, ny = _res(args.res)
        region = (args.xmin, args.xmax, args.ymin, args.ymax)
        sol = oracle.build_linear_solution(mu, pc)
        grid = oracle.phase_grid(sol, region, (nx, ny))
        if args.format == "ppm":
            _emit(args, compare.phase_image(grid))
        else:
            _emit(args, write_csv(*compare.phase_csv(grid, [])))
        return 0

    if cmd == "figure-data":
        fig = args.figure
        if fig == "stokes_diagram":
            _table(args, *compare.stokes_diagram(mu))
        elif fig == "lambda_sweep":
            _table(args, *compare.lambda_sweep(cfg, compare.default_sweep_grid(cfg.prec_bits)))
        elif fig == "error_plot":
            rows = []
            for kind in ("pole", "zero"):
                for order in ("leading", "full"):
                    rows.extend(compare.cmd_compare(cfg, kind, order).rows)
            _table(args, *compare.comparison_table(rows))
        else:
            nx, ny = _res(args.res)
            region = (-8.0, 8.0, 0.0, 8.0)
            d = compare.get_lambda(cfg)
            sol = oracle.build_linear_solution(mu, pc)
            grid = oracle.phase_grid(sol, region, (nx, ny))
            marks = compare.marker_predictions(cfg, d, region)
            if args.out and args.out.endswith(".ppm"):
                _emit(args, compare.phase_image(grid, [(complex(p.xi), p.kind) for p in marks]))
            else:
                _emit(args, write_csv(*compare.phase_csv(grid, marks)))
        return 0

    if cmd == "selftest":
        mus = [m.strip() for m in args.mus.split(",") if m.strip()]
        checks, notes = compare.selftest(cfg, mus)
        if cfg.prec_bits < 128:
            checks.extend(compare.guard_probe(cfg))
        ok = all(c.ok for c in checks)
        recs = [vars(c) for c in checks]
        if args.format == "json":
            _emit(args, write_json({"prec_bits": cfg.prec_bits, "cache": cfg.cache_path, "passed": ok,
                                    "checks": recs, "warnings": notes}))
        else:
            _emit(args, write_csv(["mu", "name", "ok", "detail"], [list(r.values()) for r in recs]))
        for n in notes:
            print(f"warning: {n}", file=sys.stderr)
        return 0 if ok else 1

    raise ArgError(f"unknown command {cmd}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                return run(args)
            finally:
                for w in caught:
                    print(f"warning: {w.message}", file=sys.stderr)
    except ArgError as exc:
        parser.error(str(exc))
    except ValueError as exc:
        print(f"transpole: argument error: {exc}", file=sys.stderr)
        return 2
    except (PrecisionError, ArithmeticError) as exc:
        print(f"transpole: computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
