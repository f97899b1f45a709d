"""Command-line front end.

Exit codes: 0 success, 1 a check failed (identity suite, smallness
condition, ...), 2 usage error. Reports are JSON with ``"schema": 1`` unless
another format is requested, and are byte-identical for identical arguments.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import algebra as alg
from . import checks, construction, ledger, norms
from .errors import ConditionViolatedError, CuntzError, ParseError
from .rational import format_rational, parse_rational
from .scalars import Backend
from .solver import SolverParams, solve_b

SCHEMA_VERSION = 1

log = logging.getLogger("cuntzcomm")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for random test data (default 0)")
    common.add_argument("--level-cap", type=_positive_int, default=alg.DEFAULT_LEVEL_CAP,
                        help="largest block level (default %(default)s)")
    common.add_argument("--output", "-o", type=Path, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--log-level", default="WARNING",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))

    solve_opts = _Parser(add_help=False)
    solve_opts.add_argument("--n", type=int, default=2, help="matrix size (default 2)")
    solve_opts.add_argument("--delta", type=_rational,
                            help="coupling, e.g. 1/64000 or 2^-16 (default 1/(2000 n^5))")
    solve_opts.add_argument("--K", type=_positive_int, default=8, help="Neumann truncation depth")
    solve_opts.add_argument("--iters", type=int, default=20, help="Picard iterations")
    solve_opts.add_argument("--tol", type=float, default=1e-12, help="residual tolerance")
    solve_opts.add_argument("--backend", choices=[b.value for b in Backend],
                            help="scalar backend (default exact for n <= 3, double otherwise)")

    parser = _Parser(prog="cuntzcomm", description="Commutators near the identity over O_2.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("identities", parents=[common], help="run the exact identity suites")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--samples", type=int, default=10)

    sub.add_parser("solve", parents=[common, solve_opts], help="Picard solve for b")

    p = sub.add_parser("construct", parents=[common, solve_opts],
                       help="solve, build the scaled pair and certify its defect")
    p.add_argument("--mu", type=_rational, default=construction.DEFAULT_MU)

    p = sub.add_parser("ledger", parents=[common], help="bound ledger for one eps or one n")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--eps", type=_rational)
    group.add_argument("--n", type=int)

    p = sub.add_parser("sweep", parents=[common], help="ledger rows for eps = 2^-k")
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=60)
    p.add_argument("--eps", type=_rational, nargs="+", help="explicit eps values instead of 2^-k")

    p = sub.add_parser("norm", parents=[common], help="certified norm of an element")
    p.add_argument("--expr", required=True, help="element such as '2*uV - 1/3*UV'")
    p.add_argument("--backend", choices=[b.value for b in Backend], default="exact")
    p.add_argument("--index-cap", type=_positive_int, default=0,
                   help="refine the lower bound on e_0..e_cap of the sequence space (0 = off)")
    return parser


def _backend_for(args) -> Backend:
    if args.backend:
        return Backend(args.backend)
    return Backend.EXACT if args.n <= 3 else Backend.DOUBLE


def _delta_for(args) -> Fraction:
    return args.delta if args.delta is not None else ledger.default_delta(args.n)


def _cmd_identities(args) -> dict:
    results = checks.identity_suites(args.n, args.seed, args.samples)
    failed = [k for k, ok in results.items() if not ok]
    return {"params": {"n": args.n, "seed": args.seed, "samples": args.samples},
            "identities": results, "failed_checks": failed}


def _solver_params(args) -> SolverParams:
    return SolverParams(n=args.n, delta=_delta_for(args), K=args.K, max_iters=args.iters,
                        tol=args.tol, backend=_backend_for(args))


def _params_echo(p: SolverParams) -> dict:
    return {"n": p.n, "delta": format_rational(p.delta), "K": p.K, "iters": p.max_iters,
            "tol": p.tol, "backend": p.backend.value}


def _cmd_solve(args) -> dict:
    p = _solver_params(args)
    report = {"params": _params_echo(p)}
    try:
        b, res = solve_b(p)
    except ConditionViolatedError as exc:
        report["failed_checks"] = ["smallness condition"]
        report["error"] = str(exc)
        return report
    report["solver"] = res.as_dict()
    if b.max_level() <= 4:
        report["solver"]["b"] = b.to_strings()
    report["failed_checks"] = []
    return report


def _cmd_construct(args) -> dict:
    p = _solver_params(args)
    params = dict(_params_echo(p), mu=format_rational(args.mu))
    try:
        cert = construction.certify_instance(p.n, p.delta, args.mu, p.K, p.backend,
                                             max_iters=p.max_iters, tol=p.tol)
    except ConditionViolatedError as exc:
        return {"params": params, "failed_checks": ["smallness condition"], "error": str(exc)}
    out = cert.as_dict()
    out["params"] = params
    failed = []
    if cert.descent is not None and not cert.descent.exact:
        failed.append("descended commutator")
    out["failed_checks"] = failed
    return out


def _cmd_ledger(args) -> dict:
    row = ledger.ledger_row(args.eps) if args.eps is not None else ledger.bounds_for_n(args.n)
    cond = ledger.condition_check(row.n)
    failed = []
    if not cond.holds:
        failed.append("smallness condition")
    if not row.floor_consistent:
        failed.append("log floor")
    return {"params": {"eps": None if args.eps is None else format_rational(args.eps), "n": row.n},
            "ledger": {"rows": [row.as_dict()], "condition": cond.as_dict()},
            "failed_checks": failed, "_rows": [row]}


def _cmd_sweep(args) -> dict:
    if args.eps:
        result = ledger.sweep(args.eps)
        params = {"eps": [format_rational(e) for e in args.eps]}
    else:
        if not 1 <= args.k_min <= args.k_max:
            raise UsageError("need 1 <= k-min <= k-max")
        result = ledger.dyadic_sweep(args.k_max, args.k_min)
        params = {"k_min": args.k_min, "k_max": args.k_max}
    failed = [] if result.floor_consistent else ["log floor"]
    if not all(ledger.condition_check(n).holds for n in sorted({r.n for r in result.rows})):
        failed.append("smallness condition")
    return {"params": params, "ledger": result.as_dict(), "failed_checks": failed,
            "_rows": result.rows}


def _cmd_norm(args) -> dict:
    x = alg.parse_element(args.expr, Backend(args.backend))
    kw = {}
    if args.index_cap:
        kw = {"rep_refine": True, "index_cap": args.index_cap}
    iv = norms.norm_interval(x, **kw)
    return {"params": {"expr": args.expr, "backend": args.backend, "index_cap": args.index_cap},
            "norm": dict(iv.as_dict(), normal_form=alg.format_element(x)),
            "failed_checks": []}


COMMANDS = {
    "identities": _cmd_identities,
    "solve": _cmd_solve,
    "construct": _cmd_construct,
    "ledger": _cmd_ledger,
    "sweep": _cmd_sweep,
    "norm": _cmd_norm,
}


def _flatten(prefix: str, value, out: list) -> None:
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], out)
    elif isinstance(value, list) and value and isinstance(value[0], dict):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append(f"{prefix}: {json.dumps(value)}")


def render(report: dict, fmt: str) -> str:
    rows = report.pop("_rows", None)
    if fmt == "csv":
        if rows is None:
            raise UsageError("csv output is only available for ledger and sweep")
        return ledger.rows_to_csv(rows)
    if fmt == "text":
        lines: list[str] = []
        _flatten("", report, lines)
        return "\n".join(lines) + "\n"
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        with alg.level_cap(args.level_cap):
            report = COMMANDS[args.command](args)
        report = {"schema": SCHEMA_VERSION, "command": args.command, **report}
        text = render(report, args.format)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (CuntzError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, ParseError) else 1
    if args.output:
        args.output.write_text(text)
    else:
        sys.stdout.write(text)
    failed = report.get("failed_checks") or []
    for name in failed:
        print(f"FAILED: {name}", file=sys.stderr)
    return 1 if failed else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
