"""The five-step comparative evaluation and the baseline rankings.

For each prospect: expected value, the best unchosen alternative, the marked
probability mass, the comparative cost CCC = mass * Ex(best alternative), and
CEU = Ex - |CCC|. The sign of CCC is kept on the row; the absolute value is
applied only at the final step.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, NamedTuple, Sequence

from .model import DecisionProblem, Marking, Prospect, validate_problem


class EvaluationMode(enum.Enum):
    JOINT = "joint"
    PAIRWISE = "pairwise"


def expected_value(prospect: Prospect) -> float:
    return math.fsum(o.value * o.p for o in prospect.outcomes)


class BestAlternative(NamedTuple):
    name: str
    ex: float
    tied: bool


def best_alternative(problem: DecisionProblem, chosen: str) -> BestAlternative:
    """Highest-Ex prospect other than ``chosen``.

    In a loss domain this is the least-negative Ex, i.e. the smallest loss.
    Ties resolve to the earliest prospect in problem order and are flagged.
    """
    others = [p for p in problem.prospects if p.name != chosen]
    if len(others) == len(problem.prospects):
        raise KeyError(chosen)
    if not others:
        raise ValueError(f"{chosen!r} has no alternative to compare against")
    best = others[0]
    best_ex = expected_value(best)
    tied = False
    for p in others[1:]:
        ex = expected_value(p)
        if ex > best_ex:
            best, best_ex, tied = p, ex, False
        elif ex == best_ex:
            tied = True
    return BestAlternative(best.name, best_ex, tied)


def ccc(prospect: Prospect, marks: Sequence[bool], best_alt_ex: float) -> tuple[float, float]:
    """(marked probability mass, signed comparative cost) for one prospect."""
    if len(marks) != len(prospect.outcomes):
        raise ValueError(
            f"{prospect.name!r}: {len(marks)} flags for {len(prospect.outcomes)} outcomes"
        )
    mass = math.fsum(o.p for o, flagged in zip(prospect.outcomes, marks) if flagged)
    return mass, mass * best_alt_ex


def ceu(ex: float, ccc_value: float) -> float:
    return ex - abs(ccc_value)


@dataclass(frozen=True)
class EvaluationRow:
    """One prospect's full five-step trace."""

    prospect: str
    ex: float
    best_alt: str
    best_alt_ex: float
    ccc_prob_mass: float
    ccc: float
    ceu: float
    best_alt_tied: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "prospect": self.prospect,
            "ex": self.ex,
            "best_alt": self.best_alt,
            "best_alt_ex": self.best_alt_ex,
            "ccc_prob_mass": self.ccc_prob_mass,
            "ccc": self.ccc,
            "ceu": self.ceu,
            "best_alt_tied": self.best_alt_tied,
        }


@dataclass(frozen=True)
class Evaluation:
    """Rows in problem order plus evaluation-level warnings."""

    rows: tuple[EvaluationRow, ...]
    mode: EvaluationMode
    warnings: tuple[str, ...] = ()

    def row(self, name: str) -> EvaluationRow:
        for r in self.rows:
            if r.prospect == name:
                return r
        raise KeyError(name)


def evaluate(
    problem: DecisionProblem,
    marking: Marking,
    mode: EvaluationMode = EvaluationMode.JOINT,
) -> Evaluation:
    """Run the five steps for every prospect.

    Pairwise mode demands exactly two prospects; with two prospects it agrees
    with joint mode, since each prospect's only alternative is the other.
    """
    validate_problem(problem)
    if mode is EvaluationMode.PAIRWISE and len(problem.prospects) != 2:
        raise ValueError(
            f"pairwise mode needs exactly 2 prospects, got {len(problem.prospects)}"
        )
    mismatches = marking.mismatches(problem)
    if mismatches:
        raise ValueError("; ".join(mismatches))
    rows = []
    for prospect in problem.prospects:
        ex = expected_value(prospect)
        alt = best_alternative(problem, prospect.name)
        mass, cost = ccc(prospect, marking.for_prospect(prospect.name), alt.ex)
        rows.append(
            EvaluationRow(
                prospect=prospect.name,
                ex=ex,
                best_alt=alt.name,
                best_alt_ex=alt.ex,
                ccc_prob_mass=mass,
                ccc=cost,
                ceu=ceu(ex, cost),
                best_alt_tied=alt.tied,
            )
        )
    warnings = []
    if any(r.ex > 0 for r in rows) and any(r.ex < 0 for r in rows):
        warnings.append("mixed-domain: expected values span gains and losses")
    return Evaluation(tuple(rows), mode, tuple(warnings))


@dataclass(frozen=True)
class Ranking:
    """Prospects best-first with the score each was ranked on.

    Ties break by higher expected value, then by problem order; every applied
    tie-break is recorded.
    """

    entries: tuple[tuple[str, float], ...]
    tie_breaks: tuple[str, ...] = ()

    @property
    def order(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.entries)

    @property
    def recommended(self) -> str:
        return self.entries[0][0]

    def to_dict(self) -> dict[str, Any]:
        return {
            "order": [{"prospect": n, "score": s} for n, s in self.entries],
            "recommended": self.recommended,
            "tie_breaks": list(self.tie_breaks),
        }


def _ranked(
    names: Sequence[str], primary: Sequence[float], secondary: Sequence[float]
) -> Ranking:
    # stable sort keeps problem order as the final tie-break
    order = sorted(
        range(len(names)), key=lambda i: (-primary[i], -secondary[i])
    )
    tie_breaks = []
    for a, b in zip(order, order[1:]):
        if primary[a] != primary[b]:
            continue
        if secondary[a] != secondary[b]:
            tie_breaks.append(
                f"{names[a]} over {names[b]}: equal score, higher ex wins"
            )
        else:
            tie_breaks.append(
                f"{names[a]} over {names[b]}: equal score and ex, problem order wins"
            )
    return Ranking(
        tuple((names[i], primary[i]) for i in order), tuple(tie_breaks)
    )


def rank(evaluation: Evaluation) -> Ranking:
    """Order prospects by CEU, recording any tie-breaks applied."""
    rows = evaluation.rows
    return _ranked(
        [r.prospect for r in rows], [r.ceu for r in rows], [r.ex for r in rows]
    )


def eut_rank(problem: DecisionProblem) -> Ranking:
    """Plain expected-value ranking, computed directly from the outcomes.

    Deliberately does not go through :func:`evaluate`, so it can serve as an
    independent cross-check of the all-false-marking degeneration.
    """
    validate_problem(problem)
    names = problem.names()
    exs = [expected_value(p) for p in problem.prospects]
    return _ranked(names, exs, exs)


def conventional_oc_rank(problem: DecisionProblem) -> Ranking:
    """Classical opportunity-cost ranking: score = Ex_i - max of the others.

    Subtracting the full foregone expectation shifts every score but, for
    problems with distinct expected values, never reorders them relative to
    :func:`eut_rank`.
    """
    validate_problem(problem)
    names = problem.names()
    exs = [expected_value(p) for p in problem.prospects]
    scores = [
        ex - max(other for j, other in enumerate(exs) if j != i)
        for i, ex in enumerate(exs)
    ]
    return _ranked(names, scores, exs)


def evaluation_payload(evaluation: Evaluation, ranking: Ranking) -> dict[str, Any]:
    """Wire form shared by the CLI's JSON output and the service."""
    return {
        "mode": evaluation.mode.value,
        "rows": [r.to_dict() for r in evaluation.rows],
        "ranking": ranking.to_dict(),
        "recommended": ranking.recommended,
        "warnings": list(evaluation.warnings),
    }
