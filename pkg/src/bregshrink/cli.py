"""Command-line front end: ``bregshrink run|check|sweep``.

Exit codes: 0 success, 1 parse or validation error, 2 iteration cap,
3 numerical failure, 4 suite failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from .operators import default_families
from .problemfile import ProblemFileError, dump_problem, load_problem, parse_problem
from .problems import BUNDLED
from .solver import TRACE_COLUMNS, IterationTrace, ProblemSpec, Schedules, StopRule, run

log = logging.getLogger("bregshrink")

EXIT_OK, EXIT_PARSE, EXIT_CAP, EXIT_NUMERIC, EXIT_SUITE = 0, 1, 2, 3, 4
SUITES = ("identity", "operator", "projection", "convergence")
SWEEP_PARAMS = {"lambda": "lambda_n", "eta": "eta_n", "r": "r_n"}


class UsageError(ValueError):
    pass


def read_problem(path: str) -> ProblemSpec:
    """Load a problem file, or a bundled problem written ``bundled:NAME``."""
    if path.startswith("bundled:"):
        name = path.split(":", 1)[1]
        if name not in BUNDLED:
            raise ProblemFileError(f"no bundled problem {name!r}; known: {', '.join(BUNDLED)}")
        return BUNDLED[name]()
    try:
        return load_problem(path)
    except OSError as exc:
        raise ProblemFileError(f"cannot read file: {exc.strerror}", source=path) from None


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return repr(v) if math.isfinite(v) else str(v)


def write_trace(trace: IterationTrace, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in trace.rows():
            w.writerow([_fmt(v) for v in row])


def write_final(trace: IterationTrace, path: Path) -> None:
    lines = [f"# status: {trace.status} ({trace.message})"]
    lines += [f"{x:.17g}" for x in trace.final_point]
    path.write_text("\n".join(lines) + "\n")


def _exit_for(status: str) -> int:
    return {"converged": EXIT_OK, "max_iter": EXIT_CAP}.get(status, EXIT_NUMERIC)


def _stop(args) -> StopRule:
    return StopRule(max_iter=args.max_iter, tol_step=args.tol_step, tol_sol=args.tol_sol)


def cmd_run(args) -> int:
    spec = read_problem(args.problem)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace = run(spec, _stop(args))
    write_trace(trace, out / "trace.csv")
    write_final(trace, out / "final.txt")
    print(f"{trace.status}: {trace.message}")
    return _exit_for(trace.status)


def cmd_check(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    suites = [s.strip() for s in args.suites.split(",") if s.strip()]
    unknown = sorted(set(suites) - set(SUITES))
    if unknown or not suites:
        raise UsageError(f"unknown suites {unknown}; choose from {', '.join(SUITES)}")
    spec = read_problem(args.problem) if args.problem else None
    if spec is not None:
        geoms = [(spec.geometry, spec.families)]
    else:
        geoms = [(g, default_families(g)) for g in dg.suite_geometries()]

    reports = []
    for suite in suites:
        if suite == "identity":
            reports += [dg.run_identity_suite(g, args.samples, args.seed) for g, _ in geoms]
        elif suite == "operator":
            reports += [dg.run_operator_suite(g, f, args.samples, args.seed) for g, f in geoms]
        elif suite == "projection":
            reports.append(dg.run_projection_suite(max(1, args.samples // 10), args.seed))
        elif suite == "convergence":
            if spec is not None:
                cases = [dg.ConvergenceCase(spec.name or "problem", lambda: spec,
                                            max_iter=args.max_iter,
                                            tol_sol=args.tol_sol or 1e-5,
                                            tol_step=args.tol_step)]
            else:
                cases = dg.bundled_cases()
            reports.append(dg.run_convergence_suite(cases, args.seed))
    if args.negative_control:
        g = geoms[0][0]
        reports.append(dg.run_identity_suite(g, args.samples, args.seed, corrupt_gradient=True))
        reports.append(dg.run_operator_suite(dg.squared_norm(3), dg.misdeclared_families(3),
                                             args.samples, args.seed,
                                             name="operator:misdeclared_k"))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.csv", "w", newline="") as fh:
        dg.write_report(reports, fh)
    with open(out / "coverage.csv", "w", newline="") as fh:
        dg.write_coverage(reports, fh)
    for rep in reports:
        print(rep.summary())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_SUITE


def _sweep_one(text: str, field: str, value: float, out_dir: str, stop: StopRule):
    spec = parse_problem(text)
    s = spec.schedules
    kw = {"lambda_n": s.lambda_n, "eta_n": s.eta_n, "r_n": s.r_n, "b": s.b, field: value}
    spec = spec.with_schedules(Schedules(**kw))
    trace = run(spec, stop)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_trace(trace, out / "trace.csv")
    write_final(trace, out / "final.txt")
    gap = (float(np.linalg.norm(trace.final_point - trace.omega0))
           if trace.omega0 is not None else math.nan)
    return value, len(trace), gap, trace.status


def _parse_values(raw: str) -> list:
    try:
        vals = [float(v) for v in raw.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"--values must be numbers, got {raw!r}") from None
    if not vals:
        raise UsageError("--values is empty")
    return vals


def cmd_sweep(args) -> int:
    if args.param not in SWEEP_PARAMS:
        raise UsageError(f"--param must be one of {', '.join(SWEEP_PARAMS)}")
    field = SWEEP_PARAMS[args.param]
    values = _parse_values(args.values)
    spec = read_problem(args.problem)
    s = spec.schedules
    for v in values:
        # the bounds are recomputed per value, so a and c follow the swept schedule
        try:
            Schedules(**{"lambda_n": s.lambda_n, "eta_n": s.eta_n, "r_n": s.r_n, field: v})
        except ValueError as exc:
            raise UsageError(f"{args.param} = {v!r} is not admissible: {exc}") from None
    text = dump_problem(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stop = _stop(args)
    jobs = [(text, field, v, str(out / f"{args.param}={v:g}"), stop) for v in values]
    with ProcessPoolExecutor(max_workers=min(len(jobs), args.workers)) as ex:
        results = list(ex.map(_sweep_one, *zip(*jobs)))
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("value", "iterations", "oracle_gap"))
        for v, n, gap, status in results:
            w.writerow((_fmt(v), n, _fmt(gap)))
            print(f"{args.param}={v:g}: {status} after {n} iterations, oracle gap {gap:.3e}")
    codes = [_exit_for(r[3]) for r in results]
    return max(codes)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bregshrink",
                                description="Bregman shrinking projection solver and checks.")
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress")
    sub = p.add_subparsers(dest="verb", required=True)

    def stop_flags(sp):
        sp.add_argument("--max-iter", type=int, default=2000)
        sp.add_argument("--tol-step", type=float, default=1e-8)
        sp.add_argument("--tol-sol", type=float, default=None)

    r = sub.add_parser("run", help="solve one problem and write trace.csv and final.txt")
    r.add_argument("problem", help="problem file, or bundled:NAME")
    r.add_argument("--out", default=".")
    stop_flags(r)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check", help="run the property suites and write report.csv")
    c.add_argument("problem", nargs="?", default=None,
                   help="problem file; bundled catalogs are used when omitted")
    c.add_argument("--suites", default=",".join(SUITES))
    c.add_argument("--samples", type=int, default=1000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--negative-control", action="store_true",
                   help="add the corrupted-gradient and misdeclared-k controls (must fail)")
    c.add_argument("--out", default=".")
    stop_flags(c)
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("sweep", help="solve once per parameter value, concurrently")
    s.add_argument("problem")
    s.add_argument("--param", required=True, help="lambda, eta or r")
    s.add_argument("--values", required=True, help="comma-separated values")
    s.add_argument("--out", default=".")
    s.add_argument("--workers", type=int, default=4)
    stop_flags(s)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, which would read as "iteration cap"
        return EXIT_PARSE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ProblemFileError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
