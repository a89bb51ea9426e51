"""Command-line interface: ``fuchsnielsen <subcommand> [flags]``.

Exit codes: 0 success / decided, 2 ExceptionalUnknown or skipped everywhere,
1 error, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .cyclo import pi_injectivity_scan
from .errors import FuchsNielsenError
from .invariant import APPROX_TOL, certify_inequivalence, verify_certificate
from .presentation import (EXCEPTIONAL_UNKNOWN, StandardGenSys, criterion_decide,
                           is_exceptional, parse_presentation, rep_case, signature_type)
from .sl2rep import build_cyclic_faithful, verify_rep

EXIT_OK, EXIT_ERROR, EXIT_UNDECIDED, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _frac_list(text: str) -> list[Fraction]:
    try:
        return [Fraction(x) for x in text.replace(" ", "").split(",") if x]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected comma-separated rationals, got {text!r}")


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def read_input_file(path: str) -> tuple[dict, list[dict]]:
    """Parse ``key = value`` lines (values in JSON, bare text allowed; ``#`` comments).

    ``group.*`` keys describe the presentation.  ``gensys.*`` keys describe
    generating systems; a repeated key starts the next system, so the first
    block is U and the second is V.
    """
    group: dict = {}
    systems: list[dict] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            try:
                value = json.loads(val)
            except json.JSONDecodeError:
                value = val
            if key.startswith("group."):
                group[key] = value
            elif key.startswith("gensys."):
                sub = key.split(".", 1)[1]
                if not systems or sub in systems[-1]:
                    systems.append({})
                systems[-1][sub] = value
            else:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
    return group, systems


def _presentation(args):
    record: dict = {}
    if getattr(args, "input", None):
        group, systems = read_input_file(args.input)
        record.update(group)
        args._systems = systems
    else:
        args._systems = []
    if args.exponents is not None:
        record["exponents"] = list(args.exponents)
    if "exponents" not in record and "group.exponents" not in record:
        raise UsageError("--exponents (or --input) is required")
    if args.n:
        key = "group.exponents" if "group.exponents" in record else "exponents"
        record[key] = list(record[key]) + [2] * args.n
    for flag, key in (("genus", "genus"), ("crosscaps", "crosscaps"),
                      ("extra_relator", "extra_relator")):
        v = getattr(args, flag)
        if v is not None:
            record[key] = v
    return parse_presentation(record)


def _system(args, which: str, P) -> StandardGenSys:
    present = getattr(args, which)
    missing = getattr(args, f"missing_{which}")
    idx = 0 if which == "u" else 1
    if present is None and len(args._systems) > idx:
        rec = args._systems[idx]
        present, missing = rec.get("exponents"), rec.get("missing", missing)
    if present is None:
        raise UsageError(f"--{which} (or a gensys block in --input) is required")
    if missing is None:
        missing = P.ell
    S = StandardGenSys.from_present(int(missing), present)
    S.validate(P)
    return S


def _emit(args, payload: dict, text: str) -> None:
    print(json.dumps(payload) if args.json else text)


def cmd_classify(args) -> int:
    P = _presentation(args)
    exc, label = is_exceptional(P)
    case = rep_case(P.base())
    sig = signature_type(P.base() if P.extra_relator is not None else P)
    payload = {"presentation": P.to_dict(), "signature": str(sig), "exceptional": exc,
               "condition": label, "representation_case": case.label,
               "sum_inverse_orders": str(case.lhs), "m_minus_2": case.rhs}
    text = (f"presentation: {P.describe()}\nsignature: {sig}\n"
            f"exceptional: {'yes, condition (' + label + ')' if exc else 'no'}\n"
            f"representation case: {case}")
    _emit(args, payload, text)
    return EXIT_UNDECIDED if exc else EXIT_OK


def cmd_rep(args) -> int:
    P = _presentation(args)
    R = build_cyclic_faithful(P.base(), seed=args.seed, extra_sign=(-1) ** P.crosscaps)
    V = verify_rep(R, P.base(), tol=args.tol if args.tol is not None else 1e-9)
    payload = {"presentation": P.to_dict(), "representation": R.to_dict(), "verification": V.to_dict()}
    lines = [f"presentation: {P.describe()}", f"attempts: {R.attempts}"]
    for i, (A, rc) in enumerate(zip(R.generator_images, R.root_choices), 1):
        lines.append(f"s{i} (gamma={rc[0]}, root k={rc[1]}): "
                     f"[[{A[0, 0]:.6g}, {A[0, 1]:.6g}], [{A[1, 0]:.6g}, {A[1, 1]:.6g}]]")
    lines.append(f"verification: {'PASS' if V.passed else 'FAIL'} ({V.summary()})")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if V.passed else EXIT_ERROR


def cmd_decide(args) -> int:
    P = _presentation(args)
    U, V = _system(args, "u", P), _system(args, "v", P)
    rep = criterion_decide(P, U, V)
    payload = rep.to_dict()
    lines = [f"presentation: {P.describe()}", f"signature: {rep.signature}",
             f"verdict: {rep.verdict}" + (f" (condition {rep.condition})" if rep.condition else "")]
    for i, u, v, ok in rep.checks:
        lines.append(f"  i={i}: u={u} v={v} {'ok' if ok else 'FAILS'} u = +-v mod {P.exponents[i - 1]}")
    if rep.certificate is not None:
        ok = verify_certificate(P, rep.certificate, seeds=[args.seed + k for k in range(5)])
        payload["certificate_numeric_check"] = {
            "seeds": 5, "tolerance": 1e-7, "pass": ok,
            "note": "probabilistic check under seeded numeric representations"}
        lines.append(f"certificate ({len(rep.certificate.ops)} operations), numeric check: "
                     f"{'PASS' if ok else 'FAIL'}")
        lines.extend("  " + s for s in rep.certificate.to_list())
        if not ok:
            _emit(args, payload, "\n".join(lines))
            return EXIT_ERROR
    _emit(args, payload, "\n".join(lines))
    return EXIT_UNDECIDED if rep.verdict == EXCEPTIONAL_UNKNOWN else EXIT_OK


def cmd_certify(args) -> int:
    P = _presentation(args)
    U, V = _system(args, "u", P), _system(args, "v", P)
    tol = args.tol if args.tol is not None else APPROX_TOL
    rep = certify_inequivalence(P, U, V, backend=args.backend, seed=args.seed, tol=tol)
    lines = [f"presentation: {P.describe()}", f"verdict: {rep.verdict}",
             f"backend: {rep.backend}, tolerance: {rep.tolerance}"]
    if rep.reduced:
        lines.append("passed to the canonical 4-quotient first")
    for pos in rep.positions:
        extra = f" partner={pos.partner} p={pos.p}" if pos.partner else f" ({pos.reason})"
        if pos.r is not None:
            extra += f" r={pos.r}"
        lines.append(f"  position {pos.index}: {pos.status}{extra}")
        if pos.witness_u is not None:
            lines.append(f"    U value: {pos.witness_u}")
            lines.append(f"    V value: {pos.witness_v}")
    _emit(args, rep.to_dict(), "\n".join(lines))
    return EXIT_OK if rep.verdict in ("Inequivalent", "Consistent") else EXIT_UNDECIDED


def cmd_scan_pi(args) -> int:
    if args.p is None or args.q is None:
        raise UsageError("--p and --q are required")
    rs = args.r if args.r is not None else [Fraction(1)]
    rep = pi_injectivity_scan(args.p, args.q, rs)
    text = (f"p={rep.p} q={rep.q} r in {{{', '.join(str(r) for r in rep.r_set)}}}: "
            f"{rep.triple_count} triples, {len(rep.classes)} collision classes, "
            f"{len(rep.violations)} violations")
    _emit(args, rep.to_dict(), text)
    return EXIT_OK if rep.ok else EXIT_ERROR


def cmd_selftest(args) -> int:
    from .selftest import run_selftest
    results = run_selftest(args.seed)
    text = "\n".join(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail} ({r.seconds:.2f}s)"
                     for r in results)
    _emit(args, {"suites": [r.to_dict() for r in results]}, text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fuchsnielsen",
                     description="Nielsen equivalence of standard generating systems of Fuchsian groups")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, group=True, systems=False):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--seed", type=int, default=0, help="seed for all randomness (default 0)")
        sp.add_argument("--tol", type=_positive_float, default=None, help="numeric tolerance")
        sp.add_argument("--backend", choices=["auto", "exact", "approx"], default="auto")
        if group:
            sp.add_argument("--input", help="file with group.* / gensys.* lines")
            sp.add_argument("--exponents", type=_int_list, help="orders gamma_i, e.g. 5,5,5,5,5")
            sp.add_argument("--n", type=int, default=0, help="append this many order-2 generators")
            sp.add_argument("--genus", type=int, default=None)
            sp.add_argument("--crosscaps", type=int, default=None)
            sp.add_argument("--extra-relator", dest="extra_relator", default=None,
                            help="word in d1..dq, e.g. 'd1 d2 d1^-1 d2^-1'")
        if systems:
            for w in ("u", "v"):
                sp.add_argument(f"--{w}", type=_int_list, default=None,
                                help=f"exponents of {w.upper()} in index order, skipping the missing one")
                sp.add_argument(f"--missing-{w}", dest=f"missing_{w}", type=int, default=None,
                                help=f"index omitted by {w.upper()} (default: last)")

    common(sub.add_parser("classify", help="exceptional classification and representation case"))
    common(sub.add_parser("rep", help="build and verify a cyclic-faithful representation"))
    common(sub.add_parser("decide", help="congruence criterion with Nielsen certificate"), systems=True)
    common(sub.add_parser("certify", help="invariant-based certification"), systems=True)
    sp = sub.add_parser("scan-pi", help="exhaustive injectivity scan of Pi(a, b, r)")
    common(sp, group=False)
    sp.add_argument("--p", type=int)
    sp.add_argument("--q", type=int)
    sp.add_argument("--r", type=_frac_list, default=None, help="comma-separated rationals (default 1)")
    common(sub.add_parser("selftest", help="run the quick property suites"), group=False)
    return parser


COMMANDS = {"classify": cmd_classify, "rep": cmd_rep, "decide": cmd_decide,
            "certify": cmd_certify, "scan-pi": cmd_scan_pi, "selftest": cmd_selftest}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fuchsnielsen {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FuchsNielsenError, ValueError, KeyError, OSError) as exc:
        print(f"fuchsnielsen {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
