"""Command line front end.

Exit codes: 0 success or consistent, 1 inconsistent or failed check,
2 unknown, 3 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, TextIO

from .blocks import (
    CfcSpec,
    InvalidBlockError,
    SpecParseError,
    census,
    format_spec,
    h2_power,
    materialize,
    parse_spec,
    rank_a_plus_at_formula,
    rho,
    validate,
)
from .exact import DimensionError, Matrix, mat_rank, mat_transpose, matrix_from_json, matrix_to_json
from .planner import NotConsistentError, VerdictKind, decide, max_skew_rank, solve, solve_general, verify
from .skew import NotSkewError

EXIT_OK = 0
EXIT_NO = 1
EXIT_UNKNOWN = 2
EXIT_INPUT = 3

_VERDICT_EXIT = {
    VerdictKind.CONSISTENT: EXIT_OK,
    VerdictKind.INCONSISTENT: EXIT_NO,
    VerdictKind.UNKNOWN: EXIT_UNKNOWN,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would read as "unknown"
    def error(self, message: str):
        raise UsageError(message)


def _spec(text: str) -> CfcSpec:
    spec = parse_spec(text)
    validate(spec)
    return spec


def _read_matrix(path: str) -> Matrix:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return matrix_from_json(json.loads(text))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc}") from None


def _write_json(path: str, obj: Any) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def _format_matrix(m: Matrix) -> str:
    if m.rows == 0 or m.cols == 0:
        return f"({m.rows}x{m.cols} matrix)"
    cells = [[str(x) for x in m.row(i)] for i in range(m.rows)]
    width = max(len(c) for row in cells for c in row)
    return "\n".join("[ " + "  ".join(c.rjust(width) for c in row) + " ]" for row in cells)


# -- verbs: each returns (exit code, json result, human text) ------------------

def _cmd_rho(args):
    spec = _spec(args.spec)
    r = rho(spec)
    return EXIT_OK, {"spec": format_spec(spec), "rho": str(r), "quarters": r.quarters, "floor": r.floor}, str(r)


def _cmd_census(args):
    spec = _spec(args.spec)
    c = census(spec)
    a = materialize(spec)
    formula = rank_a_plus_at_formula(spec)
    computed = mat_rank(a + mat_transpose(a))
    r = rho(spec)
    result = {
        "spec": format_spec(spec),
        "census": c.as_dict(),
        "rho": str(r),
        "rank_a_plus_at": {"formula": formula, "computed": computed},
    }
    lines = [f"{k:9s}{v}" for k, v in c.as_dict().items()]
    lines.append(f"{'rho':9s}{r}")
    lines.append(f"rank(A+A^T): formula {formula}, computed {computed}")
    return EXIT_OK, result, "\n".join(lines)


def _target_m(args) -> int:
    if args.rank_b is not None:
        if args.rank_b < 0:
            raise UsageError("--rank-b must be nonnegative")
        if args.rank_b % 2:
            raise UsageError(f"--rank-b {args.rank_b} is odd; a skew-symmetric matrix has even rank")
        return args.rank_b // 2
    if args.m is None:
        raise UsageError("one of --m or --rank-b is required")
    if args.m < 0:
        raise UsageError("--m must be nonnegative")
    return args.m


def _verdict_text(v) -> list[str]:
    lines = [f"{v.kind.value}: {v.reason}", f"rho = {v.rho}, m = {v.m}"]
    if v.certificate is not None:
        lines.append("certificate:")
        lines.extend(v.certificate.lines())
    return lines


def _cmd_decide(args):
    spec = _spec(args.spec)
    v = decide(spec, _target_m(args))
    result = {
        "spec": format_spec(spec),
        "m": v.m,
        "rho": str(v.rho),
        "verdict": v.kind.value,
        "reason": v.reason,
        "steps": len(v.certificate.steps) if v.certificate else None,
    }
    if args.cert and v.certificate is not None:
        _write_json(args.cert, v.certificate.to_json())
    return _VERDICT_EXIT[v.kind], result, "\n".join(_verdict_text(v))


def _cmd_solve(args):
    spec = _spec(args.spec)
    m = _target_m(args)
    try:
        x, cert = solve(spec, m)
    except NotConsistentError as exc:
        v = exc.verdict
        result = {"spec": format_spec(spec), "m": m, "verdict": v.kind.value, "reason": v.reason}
        return _VERDICT_EXIT[v.kind], result, "\n".join(_verdict_text(v))
    if args.cert:
        _write_json(args.cert, cert.to_json(x))
    if args.out:
        _write_json(args.out, matrix_to_json(x))
    result = {"spec": format_spec(spec), "m": m, "verdict": "consistent", "x": matrix_to_json(x)}
    text = [f"consistent, {len(cert.steps)} steps"]
    text.extend(cert.lines())
    text.append("X =")
    text.append(_format_matrix(x))
    return EXIT_OK, result, "\n".join(text)


def _cmd_solve_b(args):
    spec = _spec(args.spec)
    b = _read_matrix(args.b)
    try:
        x = solve_general(spec, b)
    except NotConsistentError as exc:
        v = exc.verdict
        result = {"spec": format_spec(spec), "verdict": v.kind.value, "reason": v.reason, "m": v.m}
        return _VERDICT_EXIT[v.kind], result, "\n".join(_verdict_text(v))
    if args.out:
        _write_json(args.out, matrix_to_json(x))
    result = {"spec": format_spec(spec), "verdict": "consistent", "x": matrix_to_json(x)}
    return EXIT_OK, result, "consistent\nX =\n" + _format_matrix(x)


def _cmd_verify(args):
    if (args.spec is None) == (args.a is None):
        raise UsageError("give exactly one of SPEC or --a FILE")
    a = _spec(args.spec) if args.spec is not None else _read_matrix(args.a)
    x, b = _read_matrix(args.x), _read_matrix(args.b)
    ok = verify(a, x, b)
    return (EXIT_OK if ok else EXIT_NO), {"verified": ok}, "verified" if ok else "FAILED: X^T A X != B"


def _cmd_max_rank(args):
    spec = _spec(args.spec)
    res = max_skew_rank(spec)
    result = {"spec": format_spec(spec), "value": res.value, "lower": res.lower, "upper": res.upper}
    if res.known:
        return EXIT_OK, result, str(res.value)
    return EXIT_UNKNOWN, result, f"unknown: between {res.lower} and {res.upper}"


# -- plumbing -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON envelope")

    p = _Parser(prog="skewcfc", description="Solve X^T A X = B with A in canonical form for congruence.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def verb(name, help_text, func, with_spec=True):
        sp = sub.add_parser(name, help=help_text, parents=[common])
        if with_spec:
            sp.add_argument("spec", help='block sum, e.g. "J3 + G4*2 + H6(1/2)"')
        sp.set_defaults(func=func)
        return sp

    verb("rho", "print rho(A)", _cmd_rho)
    verb("census", "block census and rank(A+A^T)", _cmd_census)
    for name, func, help_text in (
        ("decide", _cmd_decide, "decide A ~> H2(-1)^m"),
        ("solve", _cmd_solve, "solve X^T A X = H2(-1)^m"),
    ):
        sp = verb(name, help_text, func)
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--m", type=int)
        g.add_argument("--rank-b", type=int, dest="rank_b")
        sp.add_argument("--cert", metavar="FILE", help="write the certificate JSON")
        if name == "solve":
            sp.add_argument("--out", metavar="FILE", help="write X as matrix JSON")

    sp = verb("solve-b", "solve X^T A X = B for a skew B", _cmd_solve_b)
    sp.add_argument("--b", required=True, metavar="FILE")
    sp.add_argument("--out", metavar="FILE")

    sp = verb("verify", "check X^T A X = B exactly", _cmd_verify, with_spec=False)
    sp.add_argument("spec", nargs="?")
    sp.add_argument("--a", metavar="FILE", help="dense A as matrix JSON instead of SPEC")
    sp.add_argument("--x", required=True, metavar="FILE")
    sp.add_argument("--b", required=True, metavar="FILE")

    verb("max-rank", "largest reachable rank of B", _cmd_max_rank)
    return p


def _status(code: int) -> str:
    return {EXIT_OK: "ok", EXIT_NO: "no", EXIT_UNKNOWN: "unknown", EXIT_INPUT: "error"}[code]


def run(argv: list[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    want_json = "--json" in argv
    verb = None
    try:
        args = build_parser().parse_args(argv)
        verb = args.verb
        code, result, text = args.func(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, SpecParseError, InvalidBlockError, DimensionError, NotSkewError, ValueError) as exc:
        error = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, SpecParseError):
            error["position"] = exc.position
        if want_json:
            envelope = {"verb": verb, "status": "error", "exit_code": EXIT_INPUT, "error": error}
            out.write(json.dumps(envelope, sort_keys=True) + "\n")
        else:
            err.write(f"error: {exc}\n")
        return EXIT_INPUT
    if want_json:
        envelope = {"verb": verb, "status": _status(code), "exit_code": code, "result": result}
        out.write(json.dumps(envelope, sort_keys=True) + "\n")
    else:
        out.write(text + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
