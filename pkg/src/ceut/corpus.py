"""Worked-example corpus: classic choice problems with verbatim markings and
the published evaluation numbers, replayed through the evaluator.

Fixtures load from JSON. Resolution order for the corpus directory: explicit
argument, the CEUT_CORPUS_DIR environment variable, then the packaged data.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .audit import AuditReport, audit_independence, audit_invariance
from .evaluator import EvaluationMode, evaluate, rank
from .model import DecisionProblem, Marking, Outcome, problem_from_dict, problem_to_dict, validate_problem
from .policies import Profile, apply_policy, profile_from_dict

FIXTURE_IDS = ("F1", "F2", "F3", "F4", "F5", "F6", "F7")
ENV_CORPUS_DIR = "CEUT_CORPUS_DIR"

# tolerance for the optional exact-value annotations on expected fields
EXACT_TOL = 1e-9


@dataclass(frozen=True)
class ExpectedField:
    """A published number with its comparison tolerance.

    ``exact`` records the unrounded value when the published figure was
    rounded; replay checks both.
    """

    value: float
    tol: float
    exact: float | None = None
    note: str = ""


@dataclass(frozen=True)
class ExpectedRow:
    prospect: str
    ex: ExpectedField
    abs_ccc: ExpectedField
    ceu: ExpectedField


@dataclass(frozen=True)
class Decision:
    """One self-contained choice within a fixture, with its verbatim marking."""

    mode: EvaluationMode
    problem: DecisionProblem
    marking: Marking
    recommended: str | None = None
    order: tuple[str, ...] | None = None


@dataclass(frozen=True)
class IndependenceSpec:
    branch_one: Outcome
    branch_two: Outcome
    decision_one: int = 0
    decision_two: int = 1


@dataclass(frozen=True)
class InvarianceSpec:
    offset: float
    decision: int = 0


@dataclass(frozen=True)
class Fixture:
    id: str
    title: str
    source: str
    decisions: tuple[Decision, ...]
    expected: tuple[ExpectedRow, ...]
    profile: Profile | None = None
    independence: IndependenceSpec | None = None
    invariance: InvarianceSpec | None = None
    unit: str | None = None

    def verbatim_marking(self) -> Marking:
        """The fixture's marks merged across its decisions."""
        flags: dict[str, tuple[bool, ...]] = {}
        for d in self.decisions:
            flags.update(d.marking.flags)
        return Marking(flags)

    def prospect_names(self) -> tuple[str, ...]:
        names: list[str] = []
        for d in self.decisions:
            names.extend(d.problem.names())
        return tuple(names)


def _field_from(raw: Mapping[str, Any], where: str) -> ExpectedField:
    if not isinstance(raw, Mapping) or "value" not in raw or "tol" not in raw:
        raise ValueError(f'{where}: expected field needs "value" and "tol"')
    exact = raw.get("exact")
    return ExpectedField(
        value=float(raw["value"]),
        tol=float(raw["tol"]),
        exact=None if exact is None else float(exact),
        note=str(raw.get("note", "")),
    )


def _field_to(f: ExpectedField) -> dict[str, Any]:
    out: dict[str, Any] = {"value": f.value, "tol": f.tol}
    if f.exact is not None:
        out["exact"] = f.exact
    if f.note:
        out["note"] = f.note
    return out


def _outcome_from(raw: Mapping[str, Any], where: str) -> Outcome:
    if not isinstance(raw, Mapping) or "value" not in raw or "p" not in raw:
        raise ValueError(f'{where}: branch needs "value" and "p"')
    return Outcome(float(raw["value"]), float(raw["p"]))


def fixture_from_dict(doc: Mapping[str, Any]) -> Fixture:
    """Parse and cross-check a fixture document.

    Beyond shape, this enforces fixture-level coherence: problems validate,
    markings cover their problems, recommendation/order name real prospects,
    and the expected table covers every prospect across all decisions.
    """
    if not isinstance(doc, Mapping):
        raise ValueError("fixture document must be an object")
    for key in ("id", "title", "source", "decisions", "expected"):
        if key not in doc:
            raise ValueError(f"fixture missing {key!r}")
    fid = str(doc["id"])
    decisions = []
    for di, raw in enumerate(doc["decisions"]):
        where = f"{fid} decision {di}"
        mode_raw = str(raw.get("mode", "joint")).lower()
        try:
            mode = EvaluationMode(mode_raw)
        except ValueError:
            raise ValueError(f"{where}: unknown mode {mode_raw!r}") from None
        problem = validate_problem(problem_from_dict(raw["problem"]))
        marking = Marking.from_dict(raw["marking"])
        mismatches = marking.mismatches(problem)
        if mismatches:
            raise ValueError(f"{where}: " + "; ".join(mismatches))
        recommended = raw.get("recommended")
        if recommended is not None and recommended not in problem.names():
            raise ValueError(f"{where}: recommended {recommended!r} not in problem")
        order = raw.get("order")
        if order is not None:
            if sorted(order) != sorted(problem.names()):
                raise ValueError(f"{where}: order must permute the prospect names")
            order = tuple(order)
        decisions.append(Decision(mode, problem, marking, recommended, order))
    expected = []
    for raw in doc["expected"]:
        name = str(raw["prospect"])
        expected.append(
            ExpectedRow(
                prospect=name,
                ex=_field_from(raw["ex"], f"{fid} {name} ex"),
                abs_ccc=_field_from(raw["abs_ccc"], f"{fid} {name} abs_ccc"),
                ceu=_field_from(raw["ceu"], f"{fid} {name} ceu"),
            )
        )
    all_names = [n for d in decisions for n in d.problem.names()]
    if len(set(all_names)) != len(all_names):
        raise ValueError(f"{fid}: prospect names must be unique across decisions")
    covered = {e.prospect for e in expected}
    if covered != set(all_names):
        raise ValueError(
            f"{fid}: expected table covers {sorted(covered)}, prospects are {sorted(all_names)}"
        )
    profile = None
    if doc.get("profile") is not None:
        profile = profile_from_dict(doc["profile"])
    audits = doc.get("audits") or {}
    independence = None
    if "independence" in audits:
        raw = audits["independence"]
        independence = IndependenceSpec(
            branch_one=_outcome_from(raw["branch_one"], f"{fid} independence"),
            branch_two=_outcome_from(raw["branch_two"], f"{fid} independence"),
            decision_one=int(raw.get("decision_one", 0)),
            decision_two=int(raw.get("decision_two", 1)),
        )
    invariance = None
    if "invariance" in audits:
        raw = audits["invariance"]
        invariance = InvarianceSpec(
            offset=float(raw["offset"]), decision=int(raw.get("decision", 0))
        )
    return Fixture(
        id=fid,
        title=str(doc["title"]),
        source=str(doc["source"]),
        decisions=tuple(decisions),
        expected=tuple(expected),
        profile=profile,
        independence=independence,
        invariance=invariance,
        unit=doc.get("unit"),
    )


def fixture_to_dict(fixture: Fixture) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "id": fixture.id,
        "title": fixture.title,
        "source": fixture.source,
        "decisions": [],
        "expected": [
            {
                "prospect": e.prospect,
                "ex": _field_to(e.ex),
                "abs_ccc": _field_to(e.abs_ccc),
                "ceu": _field_to(e.ceu),
            }
            for e in fixture.expected
        ],
    }
    for d in fixture.decisions:
        entry: dict[str, Any] = {
            "mode": d.mode.value,
            "problem": problem_to_dict(d.problem),
            "marking": d.marking.to_dict(),
        }
        if d.recommended is not None:
            entry["recommended"] = d.recommended
        if d.order is not None:
            entry["order"] = list(d.order)
        doc["decisions"].append(entry)
    if fixture.profile is not None:
        doc["profile"] = fixture.profile.to_dict()
    audits: dict[str, Any] = {}
    if fixture.independence is not None:
        audits["independence"] = {
            "branch_one": {
                "value": fixture.independence.branch_one.value,
                "p": fixture.independence.branch_one.p,
            },
            "branch_two": {
                "value": fixture.independence.branch_two.value,
                "p": fixture.independence.branch_two.p,
            },
            "decision_one": fixture.independence.decision_one,
            "decision_two": fixture.independence.decision_two,
        }
    if fixture.invariance is not None:
        audits["invariance"] = {
            "offset": fixture.invariance.offset,
            "decision": fixture.invariance.decision,
        }
    if audits:
        doc["audits"] = audits
    if fixture.unit is not None:
        doc["unit"] = fixture.unit
    return doc


def default_corpus_dir() -> Path:
    return Path(__file__).parent / "data" / "corpus"


def corpus_dir(override: str | os.PathLike | None = None) -> Path:
    if override is not None:
        return Path(override)
    env = os.environ.get(ENV_CORPUS_DIR)
    if env:
        return Path(env)
    return default_corpus_dir()


def load_fixture(fixture_id: str, corpus: str | os.PathLike | None = None) -> Fixture:
    path = corpus_dir(corpus) / f"{fixture_id}.json"
    if not path.is_file():
        raise KeyError(f"unknown fixture {fixture_id!r} (no {path.name} in {path.parent})")
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    fixture = fixture_from_dict(doc)
    if fixture.id != fixture_id:
        raise ValueError(f"{path.name} declares id {fixture.id!r}")
    return fixture


def load_all(corpus: str | os.PathLike | None = None) -> tuple[Fixture, ...]:
    directory = corpus_dir(corpus)
    fixtures = []
    for path in sorted(directory.glob("*.json")):
        fixtures.append(load_fixture(path.stem, directory))
    if not fixtures:
        raise FileNotFoundError(f"no fixture files in {directory}")
    return tuple(fixtures)


def replicate_fixture_marking(
    fixture_id: str, corpus: str | os.PathLike | None = None
) -> Marking:
    """The fixture's verbatim marking, merged across its decisions."""
    return load_fixture(fixture_id, corpus).verbatim_marking()


@dataclass(frozen=True)
class ReplayCheck:
    """One compared quantity: stored expectation against the recomputed value."""

    prospect: str
    field: str
    expected: Any
    computed: Any
    tol: float | None
    ok: bool
    note: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "prospect": self.prospect,
            "field": self.field,
            "expected": self.expected,
            "computed": self.computed,
            "tol": self.tol,
            "ok": self.ok,
            "note": self.note,
        }


@dataclass(frozen=True)
class ReplayReport:
    fixture_id: str
    checks: tuple[ReplayCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def to_dict(self) -> dict[str, Any]:
        return {
            "fixture": self.fixture_id,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }


def _num_check(
    prospect: str, field: str, expected: ExpectedField, computed: float
) -> list[ReplayCheck]:
    checks = [
        ReplayCheck(
            prospect=prospect,
            field=field,
            expected=expected.value,
            computed=computed,
            tol=expected.tol,
            ok=abs(computed - expected.value) <= expected.tol,
            note=expected.note,
        )
    ]
    if expected.exact is not None:
        checks.append(
            ReplayCheck(
                prospect=prospect,
                field=f"{field}(exact)",
                expected=expected.exact,
                computed=computed,
                tol=EXACT_TOL,
                ok=abs(computed - expected.exact) <= EXACT_TOL,
                note=expected.note,
            )
        )
    return checks


def replay(fixture: Fixture) -> ReplayReport:
    """Re-run every decision and compare against the stored numbers.

    Mismatches are report content, not exceptions: a failing corpus still
    produces a full report.
    """
    checks: list[ReplayCheck] = []
    expected_by_name = {e.prospect: e for e in fixture.expected}
    for d in fixture.decisions:
        ev = evaluate(d.problem, d.marking, d.mode)
        ranking = rank(ev)
        for row in ev.rows:
            exp = expected_by_name[row.prospect]
            checks.extend(_num_check(row.prospect, "ex", exp.ex, row.ex))
            checks.extend(_num_check(row.prospect, "abs_ccc", exp.abs_ccc, abs(row.ccc)))
            checks.extend(_num_check(row.prospect, "ceu", exp.ceu, row.ceu))
        if d.recommended is not None:
            checks.append(
                ReplayCheck(
                    prospect="",
                    field="recommended",
                    expected=d.recommended,
                    computed=ranking.recommended,
                    tol=None,
                    ok=ranking.recommended == d.recommended,
                )
            )
        if d.order is not None:
            checks.append(
                ReplayCheck(
                    prospect="",
                    field="order",
                    expected=list(d.order),
                    computed=list(ranking.order),
                    tol=None,
                    ok=ranking.order == d.order,
                )
            )
        if fixture.profile is not None:
            derived = apply_policy(d.problem, fixture.profile)
            checks.append(
                ReplayCheck(
                    prospect="",
                    field="profile_replicates_marking",
                    expected=d.marking.to_dict(),
                    computed=derived.to_dict(),
                    tol=None,
                    ok=derived.flags == d.marking.flags,
                    note="stored profile parameters must reproduce the verbatim marks",
                )
            )
    return ReplayReport(fixture.id, tuple(checks))


def run_independence_audit(fixture: Fixture) -> AuditReport:
    """The fixture's configured common-branch cancellation audit."""
    spec = fixture.independence
    if spec is None:
        raise ValueError(f"fixture {fixture.id} configures no independence audit")
    d_one = fixture.decisions[spec.decision_one]
    d_two = fixture.decisions[spec.decision_two]
    return audit_independence(
        d_one.problem,
        d_two.problem,
        spec.branch_one,
        spec.branch_two,
        (d_one.marking, d_two.marking),
    )


def run_invariance_audit(
    fixture: Fixture, offset: float | None = None
) -> AuditReport:
    """The fixture's configured frame-shift audit with index-preserved marks."""
    spec = fixture.invariance
    if spec is None:
        raise ValueError(f"fixture {fixture.id} configures no invariance audit")
    d = fixture.decisions[spec.decision]
    return audit_invariance(
        d.problem, spec.offset if offset is None else offset, d.marking
    )
