"""
Command-line interface.

Exit codes: 0 success, 2 input/output or parse error, 3 invalid mathematical
input, 4 degenerate derivative (point estimate printed, interval null).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .coefficients import CoefficientKind, all_coefficients, cov_to_corr
from .coupling import BlockPartition, sigma_m
from .errors import DegenerateEigenvalues, WassdepError
from .estimation import Estimator, Shrinkage, estimate_with_ci, two_sample_difference_ci
from .linalg import sym_eigen
from .simulation import (
    COVERAGE_FIELDS,
    SimSetting,
    get_setting,
    resolve_threads,
    run_coverage,
    run_shrinkage_table,
    run_two_sample,
)

EXIT_OK = 0
EXIT_IO = 2
EXIT_MATH = 3
EXIT_DEGENERATE = 4


class InputError(Exception):
    """Unreadable or malformed input file."""


# ----------------------------------------------------------------------------
# input


def _read_text(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def read_matrix(path: str) -> np.ndarray:
    """Read a headerless grid of numbers separated by whitespace and/or commas."""
    rows = []
    for lineno, line in enumerate(_read_text(path).splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([float(tok) for tok in re.split(r"[,\s]+", line) if tok])
        except ValueError as exc:
            raise InputError(f"{path}, line {lineno}: {exc}") from exc
    if not rows:
        raise InputError(f"{path}: no numbers found")
    if len({len(r) for r in rows}) != 1:
        raise InputError(f"{path}: rows have different lengths")
    return np.array(rows)


def read_data(path: str) -> tuple[list[str], np.ndarray]:
    """Read a comma-separated data file whose first row is a header."""
    reader = csv.reader(io.StringIO(_read_text(path)))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise InputError(f"{path}: empty file") from None
    rows = []
    for lineno, rec in enumerate(reader, 2):
        if not rec or all(not f.strip() for f in rec):
            continue
        if len(rec) != len(header):
            raise InputError(f"{path}, line {lineno}: expected {len(header)} fields, got {len(rec)}")
        try:
            rows.append([float(f) for f in rec])
        except ValueError as exc:
            raise InputError(f"{path}, line {lineno}: {exc}") from exc
    if not rows:
        raise InputError(f"{path}: no data rows")
    return header, np.array(rows)


def _column_order(columns: str | None, header: Sequence[str] | None, d: int) -> list[int] | None:
    if not columns:
        return None
    order = []
    for tok in columns.split(","):
        tok = tok.strip()
        if header is not None and tok in header:
            order.append(list(header).index(tok))
        elif tok.lstrip("-").isdigit() and 0 <= int(tok) < d:
            order.append(int(tok))
        else:
            raise InputError(f"unknown column {tok!r} in --columns")
    return order


def _split(args, d: int) -> tuple[int, int]:
    q = d - args.p if args.q is None else args.q
    return args.p, q


# ----------------------------------------------------------------------------
# output


def _emit(text: str, out: str | None) -> None:
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot write {out}: {exc.strerror or exc}") from exc
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _csv(fields: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_fmt(r[f]) for f in fields])
    return buf.getvalue()


def format_matrix(M: np.ndarray) -> str:
    return "".join(" ".join("%.17g" % v for v in row) + "\n" for row in M)


# ----------------------------------------------------------------------------
# commands


def cmd_coefficients(args) -> int:
    S = read_matrix(args.matrix)
    order = _column_order(args.columns, None, S.shape[0])
    if order is not None:
        S = S[np.ix_(order, order)]
    p, q = _split(args, S.shape[0])
    part = BlockPartition(S, p, q)
    res = all_coefficients(part)
    Sm = sigma_m(part.sigma1, part.sigma2)
    if args.format == "table":
        lines = [f"{k:<7}{getattr(res, k):.4f}" for k in ("d1", "d2", "rv", "rv_adj")]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        out = res.as_dict()
        out.update(p=p, q=q, eigenvalues=out.pop("eigen_sigma"), sigma_m=Sm.tolist())
        _emit(_json(out), args.out)
    return EXIT_OK


def _kinds(coef: str) -> list[CoefficientKind]:
    return list(CoefficientKind) if coef == "all" else [CoefficientKind.parse(coef)]


def _load_data(path: str, columns: str | None) -> np.ndarray:
    header, X = read_data(path)
    order = _column_order(columns, header, X.shape[1])
    return X if order is None else X[:, order]


def cmd_estimate(args) -> int:
    X = _load_data(args.data, args.columns)
    p, q = _split(args, X.shape[1])
    reports = [estimate_with_ci(X, p, q, k, args.estimator, args.shrinkage, args.alpha) for k in _kinds(args.coef)]
    _emit(_json([r.to_dict() for r in reports]), args.out)
    degenerate = any(r.zeta is None and r.kind in (CoefficientKind.D1, CoefficientKind.D2) for r in reports)
    if degenerate:
        print("warning: repeated block eigenvalues; confidence interval omitted", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def cmd_compare(args) -> int:
    A = _load_data(args.data_a, args.columns)
    B = _load_data(args.data_b, args.columns)
    p, q = _split(args, A.shape[1])
    results = []
    status = EXIT_OK
    for k in _kinds(args.coef):
        if k in (CoefficientKind.RV, CoefficientKind.RVADJ):
            continue
        ra = estimate_with_ci(A, p, q, k, args.estimator, args.shrinkage, args.alpha)
        rb = estimate_with_ci(B, p, q, k, args.estimator, args.shrinkage, args.alpha)
        entry = {"kind": k.value, "a": ra.to_dict(), "b": rb.to_dict(), "difference": ra.estimate - rb.estimate}
        try:
            entry["lower"], entry["upper"] = two_sample_difference_ci(ra, rb, args.alpha)
        except DegenerateEigenvalues:
            entry["lower"] = entry["upper"] = None
            status = EXIT_DEGENERATE
        results.append(entry)
    if not results:
        raise InputError("compare needs d1 or d2 (rv coefficients have no variance)")
    _emit(_json(results), args.out)
    return status


def cmd_sigma_m(args) -> int:
    S = sigma_m(read_matrix(args.block1), read_matrix(args.block2))
    _emit(format_matrix(S), args.out)
    print("eigenvalues: " + " ".join("%.17g" % v for v in sym_eigen(S).values), file=sys.stderr)
    return EXIT_OK


def _setting(args, which: str = "") -> SimSetting:
    name = getattr(args, f"setting{which}")
    path = getattr(args, f"matrix{which}")
    if path:
        S = read_matrix(path)
        if args.p is None:
            raise InputError("--p is required with a custom matrix")
        p, q = _split(args, S.shape[0])
        return SimSetting("Custom", cov_to_corr(S), p, q)
    if name is None:
        raise InputError(f"give --setting{which.replace('_', '-')} or --matrix{which.replace('_', '-')}")
    try:
        return get_setting(name)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from exc


def cmd_simulate(args) -> int:
    threads = resolve_threads(args.threads)
    setting = _setting(args)
    kinds = _kinds(args.coef) if args.coef != "all" else [CoefficientKind.D1, CoefficientKind.D2]
    meta = {
        "command": "simulate",
        "experiment": args.experiment,
        "setting": setting.describe(),
        "n": args.n,
        "reps": args.reps,
        "seed": args.seed,
        "coef": [k.value for k in kinds],
        "estimator": args.estimator,
        "shrinkage": args.shrinkage,
        "alpha": args.alpha,
        "version": __version__,
    }
    if args.experiment == "pp":
        rows = []
        for n in args.n:
            for rep in run_shrinkage_table(setting, n, args.reps, args.seed, args.estimator, kinds, (args.shrinkage,), threads):
                base = {"setting": rep.setting, "kind": rep.kind.value, "estimator": rep.estimator.value, "shrinkage": rep.shrinkage.value, "n": n}
                rows += [dict(base, rank=i + 1, value=v) for i, v in enumerate(rep.values)]
        text = _csv(("setting", "kind", "estimator", "shrinkage", "n", "rank", "value"), rows)
    elif args.experiment == "shrinkage-table":
        fields = ("setting", "kind", "estimator", "shrinkage", "n", "reps", "dropped", "mean", "median", "sd", "ks")
        rows = [
            rep.summary()
            for n in args.n
            for rep in run_shrinkage_table(setting, n, args.reps, args.seed, args.estimator, kinds, tuple(Shrinkage), threads)
        ]
        meta["shrinkage"] = [s.value for s in Shrinkage]
        text = _csv(fields, rows)
    elif args.experiment == "coverage":
        rows = [
            run_coverage(setting, k, args.estimator, args.shrinkage, n, args.reps, args.alpha, args.seed, threads).row()
            for k in kinds
            for n in args.n
        ]
        text = _csv(COVERAGE_FIELDS, rows)
    else:
        other = _setting(args, "_b")
        n_b = args.n_b or args.n
        meta.update(setting_b=other.describe(), n_b=n_b)
        rows = [
            run_two_sample(setting, other, k, na, nb, args.reps, args.alpha, args.seed, args.estimator, args.shrinkage, threads).row()
            for k in kinds
            for na, nb in zip(args.n, n_b)
        ]
        text = _csv(COVERAGE_FIELDS, rows)
    _emit(text, args.out)
    meta_path = args.meta or (f"{args.out}.meta.json" if args.out else None)
    if meta_path:
        _emit(_json(meta), meta_path)
    return EXIT_OK


# ----------------------------------------------------------------------------
# parser


def _alpha(text: str) -> float:
    a = float(text)
    if not 0.0 < a < 1.0:
        raise argparse.ArgumentTypeError("alpha must lie strictly between 0 and 1")
    return a


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _split_args(sp, required: bool = True) -> None:
    sp.add_argument("--p", type=_positive, required=required, help="size of the first block")
    sp.add_argument("--q", type=_positive, help="size of the second block (default: remaining columns)")


def _estimation_args(sp) -> None:
    sp.add_argument("--coef", choices=["d1", "d2", "rv", "rvadj", "all"], default="all")
    sp.add_argument("--estimator", choices=[e.value for e in Estimator], default="rank")
    sp.add_argument("--shrinkage", choices=[s.value for s in Shrinkage], default="none")
    sp.add_argument("--alpha", type=_alpha, default=0.05)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wassdep", description="Wasserstein dependence coefficients between two groups of variables.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("coefficients", help="coefficients of a covariance or correlation matrix")
    sp.add_argument("matrix", help="headerless matrix file ('-' for stdin)")
    _split_args(sp)
    sp.add_argument("--columns", help="comma-separated 0-based indices giving the variable order")
    sp.add_argument("--format", choices=["json", "table"], default="json")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_coefficients)

    sp = sub.add_parser("estimate", help="estimates and confidence intervals from a data file")
    sp.add_argument("data", help="CSV file with a header row")
    _split_args(sp)
    _estimation_args(sp)
    sp.add_argument("--columns", help="comma-separated column names or indices; the first p form block one")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("compare", help="interval for the difference between two independent samples")
    sp.add_argument("data_a")
    sp.add_argument("data_b")
    _split_args(sp)
    _estimation_args(sp)
    sp.add_argument("--columns")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("sigma-m", help="maximally dependent coupling of two blocks")
    sp.add_argument("block1")
    sp.add_argument("block2")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sigma_m)

    sp = sub.add_parser("simulate", help="Monte Carlo experiments")
    sp.add_argument("experiment", choices=["pp", "coverage", "shrinkage-table", "two-sample"])
    sp.add_argument("--setting", help="built-in setting 1, 2 or 3")
    sp.add_argument("--matrix", help="custom correlation matrix file (needs --p)")
    sp.add_argument("--setting-b", dest="setting_b", help="second population for two-sample")
    sp.add_argument("--matrix-b", dest="matrix_b")
    _split_args(sp, required=False)
    sp.add_argument("--n", type=_positive, nargs="+", default=[200])
    sp.add_argument("--n-b", dest="n_b", type=_positive, nargs="+")
    sp.add_argument("--reps", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    _estimation_args(sp)
    sp.set_defaults(coef="d1")
    sp.add_argument("--threads", type=_positive, help="worker threads (default: $WASSDEP_THREADS or 1)")
    sp.add_argument("--out", help="CSV output path (default: stdout)")
    sp.add_argument("--meta", help="metadata JSON path (default: OUT.meta.json)")
    sp.set_defaults(func=cmd_simulate)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DegenerateEigenvalues as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except WassdepError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
