"""
CJSR command line - validate, bracket, lift, estimate and compare
constrained switching systems described by JSON system files.

Exit codes: 0 success, 1 invalid system, 2 parse or usage error,
3 estimation failure, 4 enumeration or dimension cap exceeded.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from src import config, reporting, system_io
from src.errors import CapExceededError, CjsrError, EstimationError, InputError, InvalidSystemError, SystemFileError
from src.estimator import Method, estimate, resolve_method
from src.lifts import LiftKind, lift
from src.multinorm_sdp import dump_problem
from src.switched_system import bracket, stability_verdict

load_dotenv()

logger = logging.getLogger("cjsr_cli")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_ESTIMATION = 3
EXIT_CAP = 4


def _fmt(x: Optional[float]) -> str:
    return "-" if x is None else f"{x:.6f}"


def _load(path: str):
    """System or an exit code; prints the reason on failure."""
    try:
        return system_io.load_system(path), EXIT_OK
    except SystemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, EXIT_USAGE
    except InvalidSystemError as exc:
        print(f"invalid system: {exc}", file=sys.stderr)
        return None, EXIT_INVALID


def cmd_validate(args) -> int:
    try:
        model = system_io.read_system_file(args.path)
    except SystemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = system_io.system_problems(model)
    print(f"{args.path}: {report.summary()}")
    for problem in report.problems:
        print(f"  - {problem}")
    return EXIT_OK if report.valid else EXIT_INVALID


def cmd_estimate(args) -> int:
    s, code = _load(args.path)
    if s is None:
        return code
    method = resolve_method(args.method)
    params = reporting.parse_param_range(args.param)
    if method in (Method.PLAIN, Method.KRONECKER):
        params = [None]

    records = []
    for parameter in params:
        result = estimate(s, method, parameter, abs_tol=args.tol)
        records.append(reporting.run_record(result, args.tol))
        exact = None if result.exact is None else result.exact.cjsr_exact
        label = method.value if parameter is None else f"{method.value}({parameter})"
        print(
            f"{label}: CJSR ∈ [{_fmt(result.cjsr_lower_certified)}, {_fmt(result.cjsr_upper)}]"
            f" (cycle lower: {_fmt(result.cycle_lower)}, exact: {_fmt(exact)})"
        )
        if args.dump_problem:
            solved = s if method == Method.PLAIN else lift(s, LiftKind(method.value), parameter).system
            dump_path = Path(args.dump_problem)
            if len(params) > 1:
                dump_path = dump_path.with_name(f"{dump_path.stem}.{parameter}{dump_path.suffix}")
            dump_path.write_text(dump_problem(solved, result.gamma_star_interval[1]), encoding="utf-8")

    if len(records) > 1:
        print(f"{'param':>6} {'factor':>10} {'lower':>10} {'upper':>10}")
        for r in records:
            print(f"{r.parameter:>6} {r.accuracy_factor:>10.6f} {r.cjsr_lower_certified:>10.6f} {r.cjsr_upper:>10.6f}")
    if args.out:
        system_io.write_report(reporting.build_report(s, records), args.out)
    return EXIT_OK


def cmd_bracket(args) -> int:
    s, code = _load(args.path)
    if s is None:
        return code
    result = bracket(s, args.max_k, args.max_cycle_len)
    print(f"CJSR ∈ [{_fmt(result.lower)}, {_fmt(result.upper)}] ({stability_verdict(result.lower, result.upper)})")
    print(f"  lower witness cycle labels: {result.lower_labels}")
    print(f"  upper from rho_hat_k with k = {result.upper_k}")
    if result.partial:
        print(f"  partial: {result.partial_reason}", file=sys.stderr)
        return EXIT_CAP
    return EXIT_OK


def cmd_lift(args) -> int:
    s, code = _load(args.path)
    if s is None:
        return code
    method = resolve_method(args.kind)
    if method == Method.PLAIN:
        raise InputError("plain is not a lift kind")
    kind = LiftKind(method.value)
    if kind != LiftKind.KRONECKER and args.param is None:
        raise InputError(f"lift {kind.value} needs --param")

    lifted = lift(s, kind, None if args.param is None else int(args.param))
    if kind in (LiftKind.T_PRODUCT, LiftKind.PATH_DEPENDENT):
        system_io.write_system(lifted.system, args.out)
    else:
        system_io.write_matrix_set(lifted.system.matrices, args.out)
    system_io.write_backmap(lifted.descriptor, system_io.backmap_path(args.out))
    sizes = lifted.sizes()
    print(f"{kind.value}: {sizes['nodes']} nodes, {sizes['edges']} edges, dimension {sizes['dimension']} -> {args.out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    jobs = reporting.parse_methods_spec(args.methods_spec)
    s, code = _load(args.path)
    if s is None:
        return code
    rows = reporting.run_batch(s, jobs, abs_tol=args.tol, workers=args.workers)
    frame = reporting.comparison_frame(rows)
    reporting.write_comparison_csv(frame, args.csv)
    print(frame.to_string(index=False))
    if any(row.ok for row in rows):
        return EXIT_OK
    return EXIT_CAP if all(isinstance(row.error, CapExceededError) for row in rows) else EXIT_ESTIMATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cjsr", description="Constrained joint spectral radius toolkit")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    parser.add_argument("--max-paths", type=int, help="override CJSR_MAX_PATHS")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a system file")
    p.add_argument("path")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("estimate", help="certified CJSR interval from the multinorm program")
    p.add_argument("path")
    p.add_argument("--method", default="plain", help="plain | tproduct | pathdep | dlift | kronecker")
    p.add_argument("--param", help="T, M or d; a range such as 1..7 runs a batch")
    p.add_argument("--tol", type=float, default=config.BISECTION_TOL, help="bisection tolerance on gamma")
    p.add_argument("--out", help="report JSON path")
    p.add_argument("--dump-problem", help="write the conic problem at the final level to this file")
    p.set_defaults(handler=cmd_estimate)

    p = sub.add_parser("bracket", help="brute-force bracket from cycles and path norms")
    p.add_argument("path")
    p.add_argument("--max-k", type=int, default=config.BRACKET_MAX_K)
    p.add_argument("--max-cycle-len", type=int, default=config.BRACKET_CYCLE_LEN)
    p.set_defaults(handler=cmd_bracket)

    p = sub.add_parser("lift", help="write a lifted system and its back-map")
    p.add_argument("path")
    p.add_argument("--kind", required=True, help="tproduct | pathdep | dlift | kronecker")
    p.add_argument("--param", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_lift)

    p = sub.add_parser("compare", help="batch of estimates written as a CSV table")
    p.add_argument("path")
    p.add_argument("--methods-spec", required=True, help="e.g. tproduct:1..7,pathdep:0..6,plain")
    p.add_argument("--csv", required=True)
    p.add_argument("--tol", type=float, default=config.BISECTION_TOL)
    p.add_argument("--workers", type=int, default=config.WORKERS)
    p.set_defaults(handler=cmd_compare)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    previous_cap = os.environ.get("CJSR_MAX_PATHS")
    if args.max_paths is not None:
        os.environ["CJSR_MAX_PATHS"] = str(args.max_paths)

    try:
        return _run(args)
    finally:
        # The override only lasts for this invocation
        if args.max_paths is not None:
            if previous_cap is None:
                os.environ.pop("CJSR_MAX_PATHS", None)
            else:
                os.environ["CJSR_MAX_PATHS"] = previous_cap


def _run(args) -> int:
    try:
        return args.handler(args)
    except InputError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceededError as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except EstimationError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except InvalidSystemError as exc:
        print(f"invalid system: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CjsrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION


if __name__ == "__main__":
    sys.exit(main())
