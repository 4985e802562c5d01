"""Command-line interface: ``truncmax {constant,apply,converge,verify}``.

Exit codes: 0 success, 2 invalid arguments, 3 resolution/budget guard,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import operators
from .constants import crude_upper_bound, growth_rate_check, sharp_l1_norm
from .errors import GuardError, ParameterError
from .experiments import convergence_study, fmt, records_csv, records_report
from .grid import l1_norm, read_csv_1d, read_grid, write_grid
from .params import TruncationParams

log = logging.getLogger("truncmax")

EXIT_OK, EXIT_ARGS, EXIT_GUARD, EXIT_VERIFY = 0, 2, 3, 4


def _floats(text: str) -> list[float]:
    try:
        return [float(Fraction(t.strip())) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _default_threads() -> int:
    env = os.environ.get("TRUNCMAX_THREADS")
    return int(env) if env and env.isdigit() and int(env) > 0 else (os.cpu_count() or 1)


def truncation_from_args(args) -> TruncationParams:
    kind = args.kind
    a, b = args.a, args.b
    if kind == "scalar":
        n = args.dim or 1
        a = a or [1.0]
        b = b or [math.e]
        if len(a) != 1 or len(b) != 1:
            raise ParameterError("scalar kind takes a single value for -a and -b")
        return TruncationParams.scalar(a[0], b[0], n)
    if kind == "strong":
        n = args.dim or len(a or b or []) or 2
        a = a or [1.0] * n
        b = b or [math.e] * n
        if len(a) != len(b) or (args.dim and len(a) != args.dim):
            raise ParameterError(f"strong kind needs -a and -b with one entry per axis (n={n})")
        return TruncationParams.strong(a, b)
    if not args.partition:
        raise ParameterError("general kind requires --partition")
    k = len(args.partition)
    a = a or [1.0] * k
    b = b or [math.e] * k
    params = TruncationParams.general(args.partition, a, b)
    if args.dim and args.dim != params.n:
        raise ParameterError(f"partition sums to {params.n}, not -n {args.dim}")
    return params


def _add_truncation(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", choices=("scalar", "strong", "general"), default="scalar")
    p.add_argument("-n", "--dim", type=int, help="dimension (scalar kind; checked for the others)")
    p.add_argument("-a", type=_floats, help="lower truncation radius, comma-separated for vector kinds")
    p.add_argument("-b", type=_floats, help="upper truncation radius, comma-separated for vector kinds")
    p.add_argument("--partition", type=_ints, help="block sizes n_1,...,n_k (general kind)")


def cmd_constant(args) -> int:
    p = truncation_from_args(args)
    rows = [("kind", p.kind), ("n", str(p.n)), ("sharp", fmt(sharp_l1_norm(p))), ("crude", fmt(crude_upper_bound(p)))]
    if p.kind == "scalar":
        rows.append(("theta", fmt(p.theta)))
        rows.append(("growth", fmt(growth_rate_check(p)) if p.b[0] > p.a[0] else "n/a"))
    for key, value in rows:
        print(f"{key:<8}{value}")
    return EXIT_OK


def cmd_apply(args) -> int:
    p = truncation_from_args(args)
    path = Path(args.input)
    if path.suffix.lower() == ".csv":
        if args.h is None:
            raise ParameterError("CSV input needs --h (and optionally --lo)")
        f = read_csv_1d(path, args.h, args.lo)
    else:
        f = read_grid(path)
    out = operators.apply_operator(f, p, args.radii)
    write_grid(args.output, out)
    norm_in, norm_out = l1_norm(f), l1_norm(out)
    ratio = norm_out / norm_in if norm_in > 0 else 0.0
    print(f"l1_in   {fmt(norm_in)}")
    print(f"l1_out  {fmt(norm_out)}")
    print(f"ratio   {fmt(ratio)}")
    return EXIT_OK


_CONVERGE_DEFAULTS = {
    "scalar": {"m": [8.0, 16.0, 32.0, 64.0], "h": [1 / 512], "radii": 128},
    "strong": {"m": [32.0], "h": [1 / 128], "radii": 32},
    "general": {"m": [32.0], "h": [1 / 128], "radii": 64},
}


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_converge(args) -> int:
    p = truncation_from_args(args)
    defaults = _CONVERGE_DEFAULTS[p.kind]
    records = convergence_study(p, args.m_list or defaults["m"], args.h_list or defaults["h"],
                                args.radii or defaults["radii"], args.half_width)
    for rec in records:
        log.info("m=%s h=%s ratio=%s w=%s sharp=%s", fmt(rec.m), fmt(rec.h), fmt(rec.ratio), fmt(rec.w_norm),
                 fmt(rec.sharp))
    if args.format == "csv":
        _emit(records_csv(records), args.output)
    else:
        _emit(json.dumps(records_report(p, records), indent=2, sort_keys=True) + "\n", args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import run_verification

    if args.corrupt_kernel:
        with operators.inject_fault(1e-6):
            verdict = run_verification(args.seed, args.instances, args.trials)
    else:
        verdict = run_verification(args.seed, args.instances, args.trials)
    _emit(json.dumps(verdict, indent=2, sort_keys=True) + "\n", args.output)
    if not verdict["passed"]:
        print(f"verification failed: {', '.join(verdict['failed'])}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=_default_threads(),
                        help="worker thread cap (default: $TRUNCMAX_THREADS or CPU count)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="truncmax", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constant", parents=[common], help="print sharp constant, crude bound and growth rate")
    _add_truncation(p)
    p.set_defaults(func=cmd_constant)

    p = sub.add_parser("apply", parents=[common], help="apply a maximal operator to a grid file")
    _add_truncation(p)
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--radii", type=int, default=64, help="radius samples per interval")
    p.add_argument("--h", type=float, help="grid spacing for 1-column CSV input")
    p.add_argument("--lo", type=float, default=0.0, help="lower edge for CSV input")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("converge", parents=[common], help="convergence study on the extremal family f_m")
    _add_truncation(p)
    p.add_argument("--m-list", type=_floats)
    p.add_argument("--h-list", type=_floats, help="grid spacings, fractions allowed (1/512)")
    p.add_argument("--radii", type=int)
    p.add_argument("--half-width", type=float, help="grid half width (default b + 1/m + 2h)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("verify", parents=[common], help="run the verification suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=5, help="random instances per operator kind")
    p.add_argument("--trials", type=int, default=20, help="rearrangement trials per dimension")
    p.add_argument("-o", "--output")
    p.add_argument("--corrupt-kernel", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        operators.set_num_threads(args.threads)
        return args.func(args)
    except GuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ParameterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
