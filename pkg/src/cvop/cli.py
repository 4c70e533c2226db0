"""Command line interface: ``cvop solve``, ``cvop bench`` and ``cvop export``.

Exit codes: 0 certified, 2 finished without certificate, 1 error,
64 usage error, 66 input file problem.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .approximation import RunConfig, run
from .cones import builtin, load_cone
from .errors import CVOPError, IterationLimit, UnknownName
from .export import export
from .geometry import dumps, vrep_dumps
from .norms import p_label
from .problem import resolve_problem
from .reports import read_report, status_of, write_report
from .verification import certify, sample_upper_image

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNCERTIFIED = 2
EXIT_USAGE = 64
EXIT_NOINPUT = 66

CSV_COLUMNS = ["problem", "epsilon", "p", "algorithm", "cardinality", "opt", "en",
               "t_opt", "t_en", "t_total", "certified_bound", "status"]

SUITES = {
    "table1": [("ex8.1-q3", None, eps, p, alg) for eps in (0.05, 0.01)
               for p in ("1", "2", "inf") for alg in (1, 2)]
    + [("ex8.1-q4", None, eps, p, alg) for eps in (0.5, 0.1)
       for p in ("1", "2", "inf") for alg in (1, 2)],
    "table2": [("ex8.2", None, eps, p, alg) for eps in (0.05, 0.01)
               for p in ("1", "2", "inf") for alg in (1, 2)],
    "table3": [(name, None, eps, p, alg) for name in ("ex8.3a", "ex8.3b") for eps in (10.0, 5.0)
               for p in ("2", "inf") for alg in (1, 2)],
    "table4": [("ex8.1-q2", cone, eps, "2", alg) for cone in ("C1", "C2")
               for eps in (0.005, 0.001) for alg in (1, 2)]
    + [("ex8.1-q3", cone, eps, "2", alg) for cone in ("C3", "C4")
       for eps in (0.05, 0.01) for alg in (1, 2)],
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cvop", description="Polyhedral approximation of convex vector "
                     "optimization problems.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("solve", help="approximate one problem")
    s.add_argument("--problem", required=True, help="catalog name or problem JSON file")
    s.add_argument("--cone", help="C1..C4, orthant, or a cone JSON file")
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--norm", choices=["1", "2", "inf"], default="2")
    s.add_argument("--algorithm", choices=["1", "2"], default="1")
    s.add_argument("--vertex-rule", choices=["first", "farthest"], default="first")
    s.add_argument("--max-iterations", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0, help="seed of the certification samples")
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--out", help="output directory")
    s.add_argument("--certify", action="store_true")

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--suite", required=True, choices=sorted(SUITES) + ["all"])
    b.add_argument("--out", required=True, help="CSV file")
    b.add_argument("--jobs", type=int, default=1)

    e = sub.add_parser("export", help="write SVG (q = 2) or OFF (q = 3) geometry")
    e.add_argument("--report", required=True)
    e.add_argument("--format", choices=["svg", "off"], required=True)
    e.add_argument("--out", help="output file; default next to the report")
    return parser


def _resolve_cone(ref, q):
    if ref is None:
        return None
    if os.path.exists(ref):
        return load_cone(ref, q)
    return builtin(ref, q)


def _load_problem(ref, cone_ref):
    problem = resolve_problem(ref)
    cone = _resolve_cone(cone_ref, problem.q)
    return resolve_problem(ref, cone) if cone is not None else problem


def cmd_solve(args) -> int:
    try:
        config = RunConfig(args.epsilon, args.norm, args.algorithm, args.vertex_rule,
                           max_iterations=args.max_iterations)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.samples < 0:
        raise UsageError("--samples must be nonnegative")
    try:
        problem = _load_problem(args.problem, args.cone)
    except UnknownName as exc:
        if os.path.sep in args.problem or args.problem.endswith(".json"):
            return _fail(f"cannot read problem {args.problem}", EXIT_NOINPUT)
        raise UsageError(f"unknown problem {exc}")
    except OSError as exc:
        return _fail(f"cannot read input: {exc}", EXIT_NOINPUT)
    except (ValueError, KeyError, CVOPError) as exc:
        return _fail(f"invalid input: {exc}", EXIT_ERROR)

    try:
        report = run(problem, config)
    except IterationLimit as exc:
        report = exc.report
        if report is None:
            return _fail(str(exc), EXIT_ERROR)
    except CVOPError as exc:
        return _fail(f"{type(exc).__name__}: {exc}", EXIT_ERROR)

    certificate = None
    if args.certify:
        cloud = sample_upper_image(problem, args.samples, seed=args.seed)
        certificate = certify(report, problem, cloud)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_report(os.path.join(args.out, "report.json"), report, problem)
        with open(os.path.join(args.out, "outer.txt"), "w", encoding="utf-8") as fh:
            fh.write(dumps(report.outer))
        with open(os.path.join(args.out, "inner.txt"), "w", encoding="utf-8") as fh:
            fh.write(vrep_dumps(report.inner_vrep))
        if certificate is not None:
            with open(os.path.join(args.out, "certificate.json"), "w", encoding="utf-8") as fh:
                json.dump(certificate.to_dict(), fh, indent=2, sort_keys=True)
                fh.write("\n")
    st = report.stats
    ok = report.certified and (certificate is None or certificate.passed)
    print(f"{problem.name} {config.variant} eps={config.epsilon:g} p={p_label(config.p)} "
          f"|X|={report.cardinality} opt={st['opt_count']} en={st['en_count']} "
          f"bound={report.certified_bound:.6g} "
          f"{'certified' if ok else 'not certified'}")
    if certificate is not None and not certificate.passed:
        print(f"certificate: {len(certificate.violations)} violations", file=sys.stderr)
    return EXIT_OK if ok else EXIT_UNCERTIFIED


def bench_row(task) -> dict:
    name, cone_ref, eps, p, alg = task
    row = {"problem": name if cone_ref is None else f"{name}/{cone_ref}", "epsilon": eps,
           "p": p, "algorithm": alg}
    try:
        problem = _load_problem(name, cone_ref)
        report = run(problem, RunConfig(eps, p, alg))
        status = status_of(report)
    except IterationLimit as exc:
        report, status = exc.report, "iteration_limit"
    except Exception as exc:  # one failing row must not stop the suite
        row.update({k: "" for k in CSV_COLUMNS if k not in row})
        row["status"] = f"error:{type(exc).__name__}"
        return row
    if report is None:
        row.update({k: "" for k in CSV_COLUMNS if k not in row})
        row["status"] = status
        return row
    st = report.stats
    row.update({"cardinality": report.cardinality, "opt": st["opt_count"], "en": st["en_count"],
                "t_opt": round(st["t_opt"], 3), "t_en": round(st["t_en"], 3),
                "t_total": round(st["t_total"], 3),
                "certified_bound": report.certified_bound, "status": status})
    return row


def cmd_bench(args) -> int:
    tasks = []
    for name in (sorted(SUITES) if args.suite == "all" else [args.suite]):
        tasks += SUITES[name]
    if args.jobs < 1:
        raise UsageError("--jobs must be positive")
    if args.jobs == 1:
        rows = [bench_row(t) for t in tasks]
    else:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(bench_row, tasks))
    try:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            writer.writerows(rows)
    except OSError as exc:
        return _fail(f"cannot write {args.out}: {exc}", EXIT_NOINPUT)
    good = sum(r["status"] in ("certified", "uncertified") for r in rows)
    print(f"{good}/{len(rows)} rows completed, written to {args.out}")
    return EXIT_OK if good else EXIT_ERROR


def cmd_export(args) -> int:
    try:
        data = read_report(args.report)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        return _fail(f"cannot read report: {exc}", EXIT_NOINPUT)
    try:
        text = export(data, args.format)
    except CVOPError as exc:
        return _fail(f"{type(exc).__name__}: {exc}", EXIT_ERROR)
    out = args.out or os.path.splitext(args.report)[0] + "." + args.format
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(out)
    return EXIT_OK


def _fail(message, code) -> int:
    print(f"cvop: {message}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing command")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        handler = {"solve": cmd_solve, "bench": cmd_bench, "export": cmd_export}[args.command]
        return handler(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"cvop: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
