"""Command-line front end: ``construct | scan | verify | oracle | lambda``.

Exit codes: 0 success, 1 a checked property failed, 2 bad input (spec,
grammar or file), 3 construction failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import construct, intervals, oracle, scan, targets, toeplitz, verify

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CONSTRUCT = 0, 1, 2, 3

DEFAULT_N_SPEC = "1..1024:x2"


class InputError(ValueError):
    """Bad user input; mapped to exit code 2."""


def parse_n_spec(text: str) -> list[int]:
    """``"1,2,8"``, ``"1..1024:x2"`` (geometric) or ``"1..5"`` (unit step); terms may be mixed.

    Returns the sorted distinct values.
    """
    values: set[int] = set()
    for term in filter(None, (t.strip() for t in text.split(","))):
        try:
            if ".." in term:
                span, _, step = term.partition(":")
                lo_s, _, hi_s = span.partition("..")
                lo, hi = int(lo_s), int(hi_s)
                if lo < 1 or hi < lo:
                    raise InputError(f"bad range {term!r}")
                if not step:
                    values.update(range(lo, hi + 1))
                elif step.startswith("x"):
                    factor = int(step[1:])
                    if factor < 2:
                        raise InputError(f"bad factor in {term!r}")
                    n = lo
                    while n <= hi:
                        values.add(n)
                        n *= factor
                else:
                    values.update(range(lo, hi + 1, int(step)))
            else:
                values.add(int(term))
        except ValueError as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"cannot parse N term {term!r}") from exc
    if not values or min(values) < 1:
        raise InputError(f"N spec {text!r} must list positive integers")
    return sorted(values)


def parse_phi_spec(text: str) -> np.ndarray:
    """``"lo..hi:logN"`` (N log-spaced points), ``"lo..hi:N"`` (linear) or a comma list."""
    try:
        if ".." in text:
            span, _, count = text.partition(":")
            lo_s, _, hi_s = span.partition("..")
            lo, hi = float(lo_s), float(hi_s)
            if count.startswith("log"):
                size = int(count[3:])
                if lo <= 0 or hi < lo:
                    raise InputError(f"log grid needs 0 < lo <= hi in {text!r}")
                return np.geomspace(lo, hi, size)
            return np.linspace(lo, hi, int(count) if count else 101)
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"cannot parse phi spec {text!r}") from exc


def _load_set(path: str) -> intervals.IntervalSet:
    try:
        return intervals.read_set(path)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read set {path}: {exc}") from exc


def _load_ledger(path: str | None) -> construct.ConstructionLedger | None:
    if path is None:
        return None
    try:
        return construct.read_ledger(path)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read ledger {path}: {exc}") from exc


def _load_target(spec: str | None) -> targets.GrowthTarget | None:
    if spec is None:
        return None
    try:
        return targets.parse_target(spec)
    except (OSError, targets.TargetError) as exc:
        raise InputError(f"invalid target {spec!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# commands


def cmd_construct(args) -> int:
    target = _load_target(args.target)
    try:
        K, ledger = construct.build_set(
            target,
            s0=args.s0,
            trunc_tol=args.trunc_tol,
            max_pieces=args.max_pieces,
            min_ell=math.ldexp(1.0, -args.min_ell_exp),
        )
    except construct.ConstructionError as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCT
    ledger_path = args.ledger or f"{args.out}.ledger.json"
    intervals.write_set(K, args.out, header=[f"target={target.spec}", f"s0={args.s0!r}", f"pieces={len(K)}"])
    construct.write_ledger(ledger, ledger_path)
    print(f"N_min={ledger.N_min}")
    print(f"depth={ledger.depth}")
    print(f"measure={K.total_measure:.17g}")
    print(f"s_residual={ledger.s_residual:.17g}")
    print(f"stop_reason={ledger.stop_reason}")
    return EXIT_OK


def cmd_scan(args) -> int:
    K = _load_set(args.set)
    ns = parse_n_spec(args.n)
    target = _load_target(args.target)
    ledger = _load_ledger(args.ledger)
    report = scan.entropy_scan(
        K, ns, target, ledger, workers=args.workers, k_max=args.kmax, quad_tol=args.tol_quad
    )
    if args.out:
        scan.write_report(report, args.out)
    else:
        for row in report.rows:
            print(f"{row.N},{row.S_N:.17g}")
    return EXIT_FAIL if report.errors else EXIT_OK


def cmd_verify(args) -> int:
    K = _load_set(args.set)
    ledger = _load_ledger(args.ledger)
    target = _load_target(args.target or ledger.target)
    ns = parse_n_spec(args.n)
    report = scan.entropy_scan(
        K, ns, target, ledger, workers=args.workers, k_max=args.kmax, quad_tol=args.tol_quad
    )
    ok = not report.errors
    lines = ["N,link,lhs,rhs,margin,status"]
    for chain in report.chains:
        for link in chain.links:
            status = "ok" if link.ok else "VIOLATED"
            lines.append(f"{chain.N},{link.name},{link.lhs:.17g},{link.rhs:.17g},{link.margin:.17g},{status}")
            if chain.in_window and not link.ok:
                ok = False
        for name in chain.skipped:
            lines.append(f"{chain.N},{name},nan,nan,nan,outside validity window")
    table = verify.lambda_vs_h(K, ledger, target, args.grid)
    lines.append(
        f"# lambda_vs_h min_margin={table.min_margin:.17g} at phi={table.argmin_phi:.17g}"
        f" slack={table.slack:.17g} bracketing={'ok' if table.bracketing_ok() else 'FAILED'}"
    )
    ok = ok and table.min_margin >= 0 and table.bracketing_ok()
    for N, err in sorted(report.errors.items()):
        lines.append(f"# error N={N}: {err}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print("verify: " + ("all in-window links hold" if ok else "violations found"), file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_oracle(args) -> int:
    if not 1 <= args.n <= oracle.MAX_RHO_SITES:
        print(f"oracle: N must be in 1..{oracle.MAX_RHO_SITES}", file=sys.stderr)
        return EXIT_INPUT
    K = _load_set(args.set)
    coeffs = toeplitz.fourier_coefficients(K, max(args.n, args.kmax or 1))
    rep = oracle.oracle_report(coeffs, args.n)
    for key, value in rep.items():
        print(f"{key}={value!r}" if isinstance(value, int) else f"{key}={value:.17g}")
    return EXIT_OK if abs(rep["diff"]) <= args.tol_oracle else EXIT_FAIL


def cmd_lambda(args) -> int:
    K = _load_set(args.set)
    phi = parse_phi_spec(args.phi)
    values = intervals.lambda_profile(K).evaluate(phi)
    lines = ["phi,Lambda"] + [f"{p:.17g},{v:.17g}" for p, v in zip(phi, values)]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quasifree-growth", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build K and its ledger for a growth target")
    p.add_argument("--target", required=True, help="power:c=..,alpha=.. | nearlinear:c=.. | custom:<table>")
    p.add_argument("--s0", type=float, default=construct.S0_MAX)
    p.add_argument("--trunc-tol", type=float, default=1e-6)
    p.add_argument("--max-pieces", type=int, default=construct.DEFAULT_MAX_PIECES)
    p.add_argument("--min-ell-exp", type=int, default=24, help="smallest block length is 2**-this")
    p.add_argument("--out", required=True, help="set file to write")
    p.add_argument("--ledger", help="ledger file (default: <out>.ledger.json)")
    p.set_defaults(func=cmd_construct)

    def scan_flags(p, n_default=DEFAULT_N_SPEC):
        p.add_argument("--set", required=True)
        p.add_argument("--n", default=n_default, help="e.g. 1,2,3 or 1..1024:x2")
        p.add_argument("--kmax", type=int, default=None)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--tol-quad", type=float, default=1e-10)
        p.add_argument("--out")

    p = sub.add_parser("scan", help="entropy report over N")
    scan_flags(p)
    p.add_argument("--target")
    p.add_argument("--ledger")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify", help="check the lower-bound chain")
    scan_flags(p)
    p.add_argument("--ledger", required=True)
    p.add_argument("--target", help="defaults to the target recorded in the ledger")
    p.add_argument("--grid", type=int, default=512, help="points of the Lambda-vs-h grid")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="brute-force spin-chain entropy for small N")
    p.add_argument("--set", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--tol-oracle", type=float, default=1e-8)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("lambda", help="print Lambda_K on a phi grid")
    p.add_argument("--set", required=True)
    p.add_argument("--phi", required=True, help="lo..hi:logN, lo..hi:N or a comma list")
    p.add_argument("--out")
    p.set_defaults(func=cmd_lambda)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
