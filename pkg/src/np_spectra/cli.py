"""``np-spectra`` command line: run, verify, geometry."""
from __future__ import annotations

import argparse
import contextlib
import csv
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from .exceptions import InsufficientDataError, InvalidArgumentError, NumericFailureError
from .experiment import (EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_STRICT, THREADS_ENV, ConfigError,
                         load_config, run_experiment, worker_count)
from .io import format_float, load_geometry, write_rows


def _thread_limit():
    """Cap BLAS threads when ``NP_SPECTRA_THREADS`` is set to a positive value."""
    from threadpoolctl import threadpool_limits

    n = worker_count()
    if int(os.environ.get(THREADS_ENV, "0") or 0) > 0:
        return threadpool_limits(limits=n)
    return contextlib.nullcontext()


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_experiment(config, args.output_dir, args.strict)
    except InvalidArgumentError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericFailureError, InsufficientDataError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"wrote {len(result.files)} files to {result.output_dir}")
    if result.failures:
        print("failed criteria: " + ", ".join(result.failures))
    return result.exit_code


def _cmd_verify(args) -> int:
    from .verify import format_table, run_checks, write_results

    try:
        results = run_checks(quick=args.quick)
    except NumericFailureError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    write_results(results, args.output_dir)
    print(format_table(results))
    ok = all(r.passed for r in results)
    print("all checks passed" if ok else "verification FAILED")
    return EXIT_OK if ok else EXIT_STRICT


def _cmd_geometry(args) -> int:
    try:
        geom = load_geometry(args.spec)
    except (OSError, ValueError, KeyError) as exc:
        print(f"{args.spec}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    n = args.sample
    if geom.dim_d == 1:
        t = np.arange(n) / n
        s = geom.evaluate(t)
        rows = [(float(ti), *p, *nv) for ti, p, nv in zip(t, s.point, s.unit_normal)]
        header = ("t", "x", "y", "nx", "ny")
    else:
        # n_theta x 2 n_theta chart sample away from the poles
        n_t = max(int(np.sqrt(n / 2)), 1)
        v = (np.arange(n_t) + 0.5) / n_t
        u = np.arange(2 * n_t) / (2 * n_t)
        vv, uu = np.meshgrid(v, u, indexing="ij")
        uv = np.column_stack([uu.ravel(), vv.ravel()])
        s = geom.evaluate(uv)
        rows = [(*q, *p, *nv) for q, p, nv in zip(uv, s.point, s.unit_normal)]
        header = ("u", "v", "x", "y", "z", "nx", "ny", "nz")
    if args.output:
        write_rows(args.output, header, rows)
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([format_float(v) for v in row] for row in rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="np-spectra",
                                     description="Neumann-Poincare spectra on Holder boundaries")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--strict", action="store_true",
                       help="exit 4 when any probe or decay criterion fails")
    p_run.add_argument("--output-dir", type=Path, default=None)
    p_run.set_defaults(func=_cmd_run)

    p_ver = sub.add_parser("verify", help="run the built-in oracle suite")
    p_ver.add_argument("--quick", action="store_true", help="circle checks only")
    p_ver.add_argument("--output-dir", type=Path, default=Path("np-spectra-verify"))
    p_ver.set_defaults(func=_cmd_verify)

    p_geo = sub.add_parser("geometry", help="sample points and normals of a geometry spec")
    p_geo.add_argument("spec", type=Path)
    p_geo.add_argument("--sample", type=int, required=True, metavar="N")
    p_geo.add_argument("--output", type=Path, default=None, help="CSV path (default stdout)")
    p_geo.set_defaults(func=_cmd_geometry)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "sample", 1) < 1:
        parser.error("--sample must be positive")
    try:
        limit = _thread_limit()
    except InvalidArgumentError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    with limit, warnings.catch_warnings():
        warnings.simplefilter("default")
        return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
