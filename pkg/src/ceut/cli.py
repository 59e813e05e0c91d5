"""Command line interface.

Exit codes: 0 success, 1 a finding (violated audit, replay mismatch),
2 bad input (parse or validation failure, unknown fixture, unusable port),
3 marking/profile conflicts.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Sequence

from .audit import (
    audit_independence,
    audit_invariance,
    audit_transitivity,
    ensemble_invariance,
    ensemble_transitivity,
)
from .corpus import (
    load_all,
    load_fixture,
    replay,
    run_independence_audit,
    run_invariance_audit,
)
from .evaluator import EvaluationMode, evaluate, evaluation_payload, rank
from .model import (
    Marking,
    Outcome,
    ValidationError,
    canonical_json,
    check_problem,
    problem_from_dict,
)
from .policies import Profile, apply_policy, profile_from_dict

EXIT_OK = 0
EXIT_FINDING = 1
EXIT_BAD_INPUT = 2
EXIT_CONFLICT = 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _read_json(path: str) -> Any:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_BAD_INPUT, f"{path}: invalid JSON: {exc}") from None
    except OSError as exc:
        raise CliError(EXIT_BAD_INPUT, f"{path}: {exc.strerror or exc}") from None


def _load_problem(path: str):
    try:
        problem = problem_from_dict(_read_json(path))
    except ValueError as exc:
        raise CliError(EXIT_BAD_INPUT, f"{path}: {exc}") from None
    report = check_problem(problem)
    if not report.ok:
        lines = "\n".join(f"  - {e}" for e in report.errors)
        raise CliError(EXIT_BAD_INPUT, f"{path}: invalid problem:\n{lines}")
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return problem


def _load_marking(path: str) -> Marking:
    try:
        return Marking.from_dict(_read_json(path))
    except ValueError as exc:
        raise CliError(EXIT_BAD_INPUT, f"{path}: {exc}") from None


def _load_profile(path: str) -> Profile:
    try:
        return profile_from_dict(_read_json(path))
    except ValueError as exc:
        raise CliError(EXIT_BAD_INPUT, f"{path}: {exc}") from None


def _resolve_marking(problem, marking_path: str | None, profile_path: str | None) -> Marking:
    if (marking_path is None) == (profile_path is None):
        raise CliError(
            EXIT_CONFLICT, "exactly one of --marking or --profile must be given"
        )
    if marking_path is not None:
        marking = _load_marking(marking_path)
        mismatches = marking.mismatches(problem)
        if mismatches:
            lines = "\n".join(f"  - {m}" for m in mismatches)
            raise CliError(EXIT_CONFLICT, f"marking does not fit the problem:\n{lines}")
        return marking
    profile = _load_profile(profile_path)
    try:
        return apply_policy(problem, profile)
    except ValueError as exc:
        raise CliError(EXIT_CONFLICT, str(exc)) from None


def _mode(raw: str) -> EvaluationMode:
    return EvaluationMode(raw)


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [
        max(len(headers[i]), *(len(r[i]) for r in rows)) if rows else len(headers[i])
        for i in range(len(headers))
    ]
    def fmt(cells):
        first = cells[0].ljust(widths[0])
        rest = [c.rjust(widths[i + 1]) for i, c in enumerate(cells[1:])]
        return "  ".join([first, *rest]).rstrip()
    return "\n".join([fmt(headers), *(fmt(r) for r in rows)])


def _f3(v: float) -> str:
    return f"{v:.3f}"


def cmd_eval(args) -> int:
    problem = _load_problem(args.problem)
    marking = _resolve_marking(problem, args.marking, args.profile)
    try:
        evaluation = evaluate(problem, marking, _mode(args.mode))
    except ValueError as exc:
        raise CliError(EXIT_BAD_INPUT, str(exc)) from None
    ranking = rank(evaluation)
    for w in evaluation.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.format == "json":
        print(canonical_json(evaluation_payload(evaluation, ranking)))
        return EXIT_OK
    rows = []
    tied = False
    for r in evaluation.rows:
        alt = r.best_alt + ("*" if r.best_alt_tied else "")
        tied = tied or r.best_alt_tied
        rows.append(
            [r.prospect, _f3(r.ex), alt, _f3(r.best_alt_ex), _f3(r.ccc_prob_mass),
             _f3(r.ccc), _f3(r.ceu)]
        )
    print(_table(
        ["prospect", "ex", "best_alt", "best_alt_ex", "ccc_prob_mass", "ccc", "ceu"],
        rows,
    ))
    if tied:
        print("(*) best-alternative tie, broken by problem order")
    for note in ranking.tie_breaks:
        print(f"tie-break: {note}")
    print(f"recommend: {ranking.recommended}")
    return EXIT_OK


def _print_report(report, fmt: str) -> int:
    if fmt == "json":
        print(canonical_json(report.to_dict()))
    else:
        print(f"axiom: {report.axiom}")
        print(f"verdict: {report.verdict}")
        if report.witness is not None:
            print(f"witness: {canonical_json(report.witness)}")
    return EXIT_OK if report.holds else EXIT_FINDING


def _fixture(args):
    try:
        return load_fixture(args.fixture, args.corpus)
    except KeyError as exc:
        raise CliError(EXIT_BAD_INPUT, str(exc.args[0])) from None
    except (ValueError, json.JSONDecodeError) as exc:
        raise CliError(EXIT_BAD_INPUT, f"fixture {args.fixture}: {exc}") from None


def cmd_audit_transitivity(args) -> int:
    if args.ensemble is not None:
        profile = _load_profile(args.profile) if args.profile else None
        summary = ensemble_transitivity(
            count=args.ensemble, seed=args.seed, profile=profile, mode=_mode(args.mode)
        )
        if args.format == "json":
            print(canonical_json(summary))
        else:
            print(
                f"transitivity ensemble: {summary['cycles']} cycles in "
                f"{summary['problems_with_cycles']} of {summary['problems']} problems "
                f"(seed {summary['seed']}, mode {summary['mode']})"
            )
            if summary["first_witness"]:
                print(f"first witness: {canonical_json(summary['first_witness'])}")
        return EXIT_OK if summary["cycles"] == 0 else EXIT_FINDING
    if args.fixture:
        fixture = _fixture(args)
        decision = fixture.decisions[args.decision]
        report = audit_transitivity(decision.problem, decision.marking, _mode(args.mode))
    else:
        if not args.problem:
            raise CliError(EXIT_BAD_INPUT, "need --fixture, --problem, or --ensemble")
        problem = _load_problem(args.problem)
        source = _resolve_marking(problem, args.marking, args.profile)
        report = audit_transitivity(problem, source, _mode(args.mode))
    return _print_report(report, args.format)


def _branch(raw: str) -> Outcome:
    try:
        doc = json.loads(raw)
        return Outcome(float(doc["value"]), float(doc["p"]))
    except (ValueError, TypeError, KeyError):
        raise CliError(
            EXIT_BAD_INPUT, f'branch must look like {{"value": 100, "p": 0.89}}, got {raw!r}'
        ) from None


def cmd_audit_independence(args) -> int:
    if args.fixture:
        fixture = _fixture(args)
        if fixture.independence is None:
            raise CliError(
                EXIT_BAD_INPUT, f"fixture {fixture.id} configures no independence audit"
            )
        report = run_independence_audit(fixture)
        return _print_report(report, args.format)
    needed = (args.pair_one, args.pair_two, args.branch_one, args.branch_two)
    if any(v is None for v in needed):
        raise CliError(
            EXIT_BAD_INPUT,
            "need --fixture, or --pair-one/--pair-two/--branch-one/--branch-two",
        )
    pair_one = _load_problem(args.pair_one)
    pair_two = _load_problem(args.pair_two)
    if args.profile:
        if args.marking_one or args.marking_two:
            raise CliError(EXIT_CONFLICT, "give either --profile or both marking files")
        source: Any = _load_profile(args.profile)
    elif args.marking_one and args.marking_two:
        source = (_load_marking(args.marking_one), _load_marking(args.marking_two))
    else:
        raise CliError(EXIT_CONFLICT, "need --profile or both --marking-one/--marking-two")
    try:
        report = audit_independence(
            pair_one, pair_two, _branch(args.branch_one), _branch(args.branch_two), source
        )
    except ValueError as exc:
        raise CliError(EXIT_BAD_INPUT, str(exc)) from None
    return _print_report(report, args.format)


def cmd_audit_invariance(args) -> int:
    if args.ensemble is not None:
        profile = _load_profile(args.profile) if args.profile else None
        summary = ensemble_invariance(count=args.ensemble, seed=args.seed, profile=profile)
        if args.format == "json":
            print(canonical_json(summary))
        else:
            print(
                f"invariance ensemble: {summary['agreements']} of {summary['problems']} "
                f"rankings survive a random shift (rate {summary['rate']:.3f}, "
                f"seed {summary['seed']})"
            )
            if summary["first_disagreement"]:
                print(f"first disagreement: {canonical_json(summary['first_disagreement'])}")
        return EXIT_OK if summary["agreements"] == summary["problems"] else EXIT_FINDING
    if args.fixture:
        fixture = _fixture(args)
        if fixture.invariance is None and args.offset is None:
            raise CliError(
                EXIT_BAD_INPUT, f"fixture {fixture.id} configures no invariance audit"
            )
        report = run_invariance_audit(fixture, args.offset)
        return _print_report(report, args.format)
    if not args.problem or args.offset is None:
        raise CliError(EXIT_BAD_INPUT, "need --fixture, or --problem with --offset")
    problem = _load_problem(args.problem)
    if args.profile and not args.marking:
        source: Any = _load_profile(args.profile)
    else:
        source = _resolve_marking(problem, args.marking, args.profile)
    try:
        report = audit_invariance(problem, args.offset, source, _mode(args.mode))
    except ValueError as exc:
        raise CliError(EXIT_BAD_INPUT, str(exc)) from None
    return _print_report(report, args.format)


def cmd_replay(args) -> int:
    if args.all:
        try:
            fixtures = load_all(args.corpus)
        except (FileNotFoundError, ValueError, json.JSONDecodeError, KeyError) as exc:
            raise CliError(EXIT_BAD_INPUT, str(exc)) from None
    elif args.fixture:
        args_fixture = argparse.Namespace(fixture=args.fixture, corpus=args.corpus)
        fixtures = [_fixture(args_fixture)]
    else:
        raise CliError(EXIT_BAD_INPUT, "name a fixture or pass --all")
    reports = [replay(f) for f in fixtures]
    if args.format == "json":
        print(canonical_json([r.to_dict() for r in reports]))
    else:
        for report in reports:
            rows = []
            for c in report.checks:
                expected = c.expected if isinstance(c.expected, str) else json.dumps(c.expected)
                computed = c.computed if isinstance(c.computed, str) else json.dumps(c.computed)
                rows.append([
                    c.prospect or "-",
                    c.field,
                    expected,
                    computed,
                    "-" if c.tol is None else f"{c.tol:g}",
                    "pass" if c.ok else "FAIL",
                ])
            print(f"fixture {report.fixture_id}: {'pass' if report.passed else 'FAIL'}")
            print(_table(["prospect", "field", "expected", "computed", "tol", "status"], rows))
            print()
        passed = sum(1 for r in reports if r.passed)
        print(f"{passed}/{len(reports)} fixtures pass")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FINDING


def cmd_serve(args) -> int:
    import socket

    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, args.port))
        probe.close()
    except OSError as exc:
        print(f"cannot bind {args.host}:{args.port}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    import uvicorn

    from .service import create_app

    app = create_app(
        corpus=args.corpus,
        session_ttl=args.ttl,
        persist_dir=args.persist,
        ui_dir=args.ui_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ceut",
        description="Comparative expected utility: evaluate, audit, replay, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="five-step evaluation of a problem")
    p_eval.add_argument("problem", help="problem JSON file, or - for stdin")
    p_eval.add_argument("--marking", help="marking JSON file, or - for stdin")
    p_eval.add_argument("--profile", help="policy profile JSON file")
    p_eval.add_argument("--mode", choices=["joint", "pairwise"], default="joint")
    p_eval.add_argument("--format", choices=["table", "json"], default="table")
    p_eval.set_defaults(func=cmd_eval)

    p_audit = sub.add_parser("audit", help="axiom audits")
    audit_sub = p_audit.add_subparsers(dest="axiom", required=True)

    p_tr = audit_sub.add_parser("transitivity", help="3-cycle search over pairwise preferences")
    p_tr.add_argument("--fixture")
    p_tr.add_argument("--corpus", help="corpus directory override")
    p_tr.add_argument("--decision", type=int, default=0)
    p_tr.add_argument("--problem")
    p_tr.add_argument("--marking")
    p_tr.add_argument("--profile")
    p_tr.add_argument("--mode", choices=["pairwise", "joint"], default="pairwise")
    p_tr.add_argument("--ensemble", type=int, help="run over N random problems instead")
    p_tr.add_argument("--seed", type=int, default=42)
    p_tr.add_argument("--format", choices=["table", "json"], default="table")
    p_tr.set_defaults(func=cmd_audit_transitivity)

    p_ind = audit_sub.add_parser("independence", help="common-branch cancellation")
    p_ind.add_argument("--fixture")
    p_ind.add_argument("--corpus")
    p_ind.add_argument("--pair-one")
    p_ind.add_argument("--pair-two")
    p_ind.add_argument("--branch-one", help='shared branch, e.g. \'{"value": 100, "p": 0.89}\'')
    p_ind.add_argument("--branch-two")
    p_ind.add_argument("--marking-one")
    p_ind.add_argument("--marking-two")
    p_ind.add_argument("--profile")
    p_ind.add_argument("--format", choices=["table", "json"], default="table")
    p_ind.set_defaults(func=cmd_audit_independence)

    p_inv = audit_sub.add_parser("invariance", help="ranking stability under a uniform value shift")
    p_inv.add_argument("--fixture")
    p_inv.add_argument("--corpus")
    p_inv.add_argument("--offset", type=float)
    p_inv.add_argument("--problem")
    p_inv.add_argument("--marking")
    p_inv.add_argument("--profile")
    p_inv.add_argument("--mode", choices=["joint", "pairwise"], default="joint")
    p_inv.add_argument("--ensemble", type=int)
    p_inv.add_argument("--seed", type=int, default=42)
    p_inv.add_argument("--format", choices=["table", "json"], default="table")
    p_inv.set_defaults(func=cmd_audit_invariance)

    p_replay = sub.add_parser("replay", help="recompute a stored fixture and diff the numbers")
    p_replay.add_argument("fixture", nargs="?", help="fixture id, e.g. F1")
    p_replay.add_argument("--all", action="store_true")
    p_replay.add_argument("--corpus")
    p_replay.add_argument("--format", choices=["table", "json"], default="table")
    p_replay.set_defaults(func=cmd_replay)

    p_serve = sub.add_parser("serve", help="run the what-if HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--corpus-dir", dest="corpus")
    p_serve.add_argument("--ttl", type=float, default=3600.0, help="session idle TTL, seconds")
    p_serve.add_argument("--persist", help="directory for session snapshots")
    p_serve.add_argument("--ui-dir", help="serve a built UI from this directory at /ui")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ValidationError as exc:
        for v in exc.violations:
            print(f"error: {v}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
