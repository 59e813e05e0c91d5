"""Axiom audits over evaluated problems.

Every audit is an empirical check of the given input, never a theorem: the
verdicts are "holds-on-input" / "violated-on-input". Ensemble helpers run the
same checks over seeded random problems and report counts.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Mapping, Union

from .evaluator import Evaluation, EvaluationMode, evaluate, rank
from .generate import random_problem
from .model import DecisionProblem, Marking, Outcome, Prospect, validate_problem
from .policies import Profile, apply_policy

MarkSource = Union[Marking, Profile]

VERDICT_HOLDS = "holds-on-input"
VERDICT_VIOLATED = "violated-on-input"


@dataclass(frozen=True)
class AuditReport:
    """Uniform audit result: a verdict, a concrete witness when violated, and
    the numeric evidence behind it."""

    axiom: str
    verdict: str
    witness: dict[str, Any] | None
    evidence: tuple[dict[str, Any], ...]

    @property
    def holds(self) -> bool:
        return self.verdict == VERDICT_HOLDS

    def to_dict(self) -> dict[str, Any]:
        return {
            "axiom": self.axiom,
            "verdict": self.verdict,
            "witness": self.witness,
            "evidence": list(self.evidence),
        }


def _sign(a: float, b: float) -> int:
    return (a > b) - (a < b)


def _marking_for(problem: DecisionProblem, source: MarkSource) -> Marking:
    if isinstance(source, Profile):
        return apply_policy(problem, source)
    return source.restrict(problem.names())


@dataclass(frozen=True)
class PreferenceMatrix:
    """Pairwise preference signs: entry (u, v) is the sign of CEU_u - CEU_v.

    In joint mode every prospect is evaluated once against the whole field;
    in pairwise mode each pair is evaluated as its own two-prospect problem,
    so the same prospect can carry a different CEU in different pairs.
    """

    names: tuple[str, ...]
    mode: EvaluationMode
    entries: Mapping[tuple[str, str], int]
    pair_ceu: Mapping[tuple[str, str], tuple[float, float]]

    def entry(self, u: str, v: str) -> int:
        return self.entries[(u, v)]

    def prefers(self, u: str, v: str) -> bool:
        return self.entry(u, v) > 0

    def to_dict(self) -> dict[str, Any]:
        pairs = []
        for (u, v), (cu, cv) in self.pair_ceu.items():
            pairs.append(
                {"a": u, "b": v, "ceu_a": cu, "ceu_b": cv, "sign": self.entries[(u, v)]}
            )
        return {"names": list(self.names), "mode": self.mode.value, "pairs": pairs}


def preference_matrix(
    problem: DecisionProblem,
    source: MarkSource,
    mode: EvaluationMode = EvaluationMode.PAIRWISE,
) -> PreferenceMatrix:
    """All pairwise preference signs under one marking source.

    A Profile is re-applied to each pairwise subproblem (the best alternative
    changes with the field); a Marking is positional data and is restricted.
    """
    validate_problem(problem)
    names = problem.names()
    entries: dict[tuple[str, str], int] = {}
    pair_ceu: dict[tuple[str, str], tuple[float, float]] = {}
    if mode is EvaluationMode.JOINT:
        ev = evaluate(problem, _marking_for(problem, source), EvaluationMode.JOINT)
        ceu_by_name = {r.prospect: r.ceu for r in ev.rows}
        for u, v in combinations(names, 2):
            cu, cv = ceu_by_name[u], ceu_by_name[v]
            pair_ceu[(u, v)] = (cu, cv)
            entries[(u, v)] = _sign(cu, cv)
            entries[(v, u)] = -entries[(u, v)]
    else:
        for u, v in combinations(names, 2):
            sub = DecisionProblem((problem.prospect(u), problem.prospect(v)))
            ev = evaluate(sub, _marking_for(sub, source), EvaluationMode.PAIRWISE)
            cu, cv = ev.rows[0].ceu, ev.rows[1].ceu
            pair_ceu[(u, v)] = (cu, cv)
            entries[(u, v)] = _sign(cu, cv)
            entries[(v, u)] = -entries[(u, v)]
    return PreferenceMatrix(names, mode, entries, pair_ceu)


def find_cycles(matrix: PreferenceMatrix) -> tuple[tuple[str, str, str], ...]:
    """All strict 3-cycles, one canonical triple per cycle.

    Each unordered triple can host at most one strict cycle (the two
    orientations contradict each other), so rotations never duplicate.
    """
    cycles = []
    for a, b, c in combinations(matrix.names, 3):
        if matrix.prefers(a, b) and matrix.prefers(b, c) and matrix.prefers(c, a):
            cycles.append((a, b, c))
        elif matrix.prefers(a, c) and matrix.prefers(c, b) and matrix.prefers(b, a):
            cycles.append((a, c, b))
    return tuple(cycles)


def audit_transitivity(
    problem: DecisionProblem,
    source: MarkSource,
    mode: EvaluationMode = EvaluationMode.PAIRWISE,
) -> AuditReport:
    """Dominance consistency: are the pairwise preferences free of 3-cycles?"""
    matrix = preference_matrix(problem, source, mode)
    cycles = find_cycles(matrix)
    witness = None
    if cycles:
        a, b, c = cycles[0]
        witness = {
            "cycle": [a, b, c],
            "meaning": f"{a} beats {b}, {b} beats {c}, {c} beats {a}",
        }
    evidence = [matrix.to_dict()]
    if cycles:
        evidence.append({"cycles": [list(cy) for cy in cycles]})
    return AuditReport(
        axiom="transitivity",
        verdict=VERDICT_VIOLATED if cycles else VERDICT_HOLDS,
        witness=witness,
        evidence=tuple(evidence),
    )


@dataclass(frozen=True)
class SubDistributionPair:
    """A two-prospect pair after a common branch was cancelled.

    Probabilities no longer sum to 1, so this is deliberately not a
    DecisionProblem and would fail validation; only the independence audit
    consumes it.
    """

    first: Prospect
    second: Prospect
    cancelled: Outcome

    def prospects(self) -> tuple[Prospect, Prospect]:
        return (self.first, self.second)

    def to_dict(self) -> dict[str, Any]:
        return {
            "prospects": [
                {
                    "name": p.name,
                    "outcomes": [{"value": o.value, "p": o.p} for o in p.outcomes],
                }
                for p in self.prospects()
            ],
            "cancelled": {"value": self.cancelled.value, "p": self.cancelled.p},
        }


def _remove_branch(prospect: Prospect, branch: Outcome) -> Prospect:
    # a certain outcome decomposes: 100% at v contains a (v, p) branch plus a
    # (v, 1-p) remainder, which stays in place
    for i, o in enumerate(prospect.outcomes):
        if o.value == branch.value and o.p >= branch.p - 1e-12:
            remainder = o.p - branch.p
            if remainder <= 1e-12:
                outcomes = prospect.outcomes[:i] + prospect.outcomes[i + 1 :]
            else:
                outcomes = (
                    prospect.outcomes[:i]
                    + (Outcome(o.value, remainder),)
                    + prospect.outcomes[i + 1 :]
                )
            return Prospect(prospect.name, outcomes)
    raise ValueError(
        f"prospect {prospect.name!r} has no branch with value {branch.value} "
        f"and probability >= {branch.p}"
    )


def cancel_common_branch(pair: DecisionProblem, branch: Outcome) -> SubDistributionPair:
    """Remove one shared (value, probability) branch from both prospects.

    No renormalization happens: the result is a sub-distribution pair whose
    remaining mass is 1 minus the cancelled probability.
    """
    validate_problem(pair)
    if len(pair.prospects) != 2:
        raise ValueError(f"cancellation needs exactly 2 prospects, got {len(pair.prospects)}")
    first, second = pair.prospects
    return SubDistributionPair(
        _remove_branch(first, branch), _remove_branch(second, branch), branch
    )


def _outcomes_match(a: Prospect, b: Prospect) -> bool:
    if len(a.outcomes) != len(b.outcomes):
        return False
    ka = sorted((o.value, o.p) for o in a.outcomes)
    kb = sorted((o.value, o.p) for o in b.outcomes)
    return all(
        math.isclose(x, y, rel_tol=1e-9, abs_tol=1e-9)
        and math.isclose(p, q, rel_tol=1e-9, abs_tol=1e-9)
        for (x, p), (y, q) in zip(ka, kb)
    )


def _preferred(ev: Evaluation) -> str:
    a, b = ev.rows
    s = _sign(a.ceu, b.ceu)
    if s > 0:
        return a.prospect
    if s < 0:
        return b.prospect
    return "indifferent"


def audit_independence(
    pair_one: DecisionProblem,
    pair_two: DecisionProblem,
    branch_one: Outcome,
    branch_two: Outcome,
    source: MarkSource | tuple[Marking, Marking],
) -> AuditReport:
    """Cancellation consistency across two pairs that reduce to the same pair.

    Both pairs are evaluated as given (marks included); the audit then cancels
    the stated common branch from each, checks the reductions are identical
    position by position, and compares the two preference signs. Any
    difference in sign is a violation.
    """
    for pair in (pair_one, pair_two):
        validate_problem(pair)
        if len(pair.prospects) != 2:
            raise ValueError("independence audit needs two-prospect pairs")
    reduced_one = cancel_common_branch(pair_one, branch_one)
    reduced_two = cancel_common_branch(pair_two, branch_two)
    for a, b in zip(reduced_one.prospects(), reduced_two.prospects()):
        if not _outcomes_match(a, b):
            raise ValueError(
                f"reduced pairs differ at position ({a.name!r} vs {b.name!r}); "
                "the independence audit is only defined for identical reductions"
            )
    if isinstance(source, tuple):
        source_one, source_two = source
    else:
        source_one = source_two = source
    ev_one = evaluate(pair_one, _marking_for(pair_one, source_one), EvaluationMode.PAIRWISE)
    ev_two = evaluate(pair_two, _marking_for(pair_two, source_two), EvaluationMode.PAIRWISE)
    sign_one = _sign(ev_one.rows[0].ceu, ev_one.rows[1].ceu)
    sign_two = _sign(ev_two.rows[0].ceu, ev_two.rows[1].ceu)
    violated = sign_one != sign_two
    witness = None
    if violated:
        witness = {
            "pair_one_prefers": _preferred(ev_one),
            "pair_two_prefers": _preferred(ev_two),
            "reduced_common_form": reduced_one.to_dict(),
            "note": "identical reduced pairs, different preference signs",
        }
    evidence = (
        {"pair": "one", "rows": [r.to_dict() for r in ev_one.rows],
         "reduced": reduced_one.to_dict()},
        {"pair": "two", "rows": [r.to_dict() for r in ev_two.rows],
         "reduced": reduced_two.to_dict()},
    )
    return AuditReport(
        axiom="independence",
        verdict=VERDICT_VIOLATED if violated else VERDICT_HOLDS,
        witness=witness,
        evidence=evidence,
    )


def frame_shift(problem: DecisionProblem, offset: float) -> DecisionProblem:
    """The same problem with every outcome value shifted by ``offset``."""
    if not (isinstance(offset, (int, float)) and math.isfinite(offset)):
        raise ValueError(f"offset must be a finite number, got {offset!r}")
    validate_problem(problem)
    return DecisionProblem(
        tuple(
            Prospect(p.name, tuple(Outcome(o.value + offset, o.p) for o in p.outcomes))
            for p in problem.prospects
        )
    )


def audit_invariance(
    problem: DecisionProblem,
    offset: float,
    source: MarkSource,
    mode: EvaluationMode = EvaluationMode.JOINT,
) -> AuditReport:
    """Does the CEU ranking survive a uniform shift of all outcome values?

    With a Marking, the same positional marks apply in both frames (the marks
    express the decision-maker's judgement about branches, which the shift
    does not touch). With a Profile, the policy is re-derived in each frame,
    which audits the policy's own frame sensitivity instead.
    """
    shifted = frame_shift(problem, offset)
    if isinstance(source, Profile):
        marking_orig = apply_policy(problem, source)
        marking_shift = apply_policy(shifted, source)
        how = "re-derived per frame"
    else:
        marking_orig = source.restrict(problem.names())
        marking_shift = marking_orig
        how = "index-preserved"
    ev_orig = evaluate(problem, marking_orig, mode)
    ev_shift = evaluate(shifted, marking_shift, mode)
    order_orig = rank(ev_orig).order
    order_shift = rank(ev_shift).order
    violated = order_orig != order_shift
    witness = None
    if violated:
        witness = {
            "original_order": list(order_orig),
            "shifted_order": list(order_shift),
            "offset": float(offset),
        }
    evidence = (
        {
            "frame": "original",
            "offset": 0.0,
            "marking": marking_orig.to_dict(),
            "rows": [r.to_dict() for r in ev_orig.rows],
            "order": list(order_orig),
        },
        {
            "frame": "shifted",
            "offset": float(offset),
            "marking_source": how,
            "marking": marking_shift.to_dict(),
            "rows": [r.to_dict() for r in ev_shift.rows],
            "order": list(order_shift),
        },
    )
    return AuditReport(
        axiom="invariance",
        verdict=VERDICT_VIOLATED if violated else VERDICT_HOLDS,
        witness=witness,
        evidence=evidence,
    )


def ensemble_transitivity(
    count: int = 1000,
    seed: int = 42,
    profile: Profile | None = None,
    mode: EvaluationMode = EvaluationMode.PAIRWISE,
    n_prospects: tuple[int, int] = (3, 3),
    n_outcomes: tuple[int, int] = (1, 5),
) -> dict[str, Any]:
    """Cycle counts over seeded random problems under a marking policy."""
    from .policies import Policy

    if profile is None:
        profile = Profile(Policy.STRICT_COMPARISON)
    rng = random.Random(seed)
    total_cycles = 0
    problems_with_cycles = 0
    first_witness = None
    for i in range(count):
        problem = random_problem(rng, n_prospects=n_prospects, n_outcomes=n_outcomes)
        cycles = find_cycles(preference_matrix(problem, profile, mode))
        if cycles:
            problems_with_cycles += 1
            total_cycles += len(cycles)
            if first_witness is None:
                first_witness = {"problem_index": i, "cycle": list(cycles[0])}
    return {
        "audit": "transitivity-ensemble",
        "problems": count,
        "seed": seed,
        "mode": mode.value,
        "policy": profile.to_dict(),
        "cycles": total_cycles,
        "problems_with_cycles": problems_with_cycles,
        "first_witness": first_witness,
    }


def ensemble_invariance(
    count: int = 1000,
    seed: int = 42,
    profile: Profile | None = None,
    offset_range: tuple[float, float] = (-1000.0, 1000.0),
    n_prospects: tuple[int, int] = (2, 6),
    n_outcomes: tuple[int, int] = (1, 5),
) -> dict[str, Any]:
    """Agreement rate of rankings across random frame shifts, with the policy
    re-derived in the shifted frame."""
    from .policies import Policy

    if profile is None:
        profile = Profile(Policy.STRICT_COMPARISON)
    rng = random.Random(seed)
    agreements = 0
    first_disagreement = None
    for i in range(count):
        problem = random_problem(rng, n_prospects=n_prospects, n_outcomes=n_outcomes)
        offset = rng.uniform(*offset_range)
        report = audit_invariance(problem, offset, profile)
        if report.holds:
            agreements += 1
        elif first_disagreement is None:
            first_disagreement = {"problem_index": i, **(report.witness or {})}
    return {
        "audit": "invariance-ensemble",
        "problems": count,
        "seed": seed,
        "policy": profile.to_dict(),
        "agreements": agreements,
        "rate": agreements / count if count else 1.0,
        "first_disagreement": first_disagreement,
    }
