"""Value types for risky choice problems, markings, and their validation.

A decision problem is a set of mutually exclusive prospects; each prospect is
an ordered list of (value, probability) outcomes. Outcome order matters
because markings address outcomes by position.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

PROB_SUM_TOL = 1e-9


class ValidationError(ValueError):
    """A decision problem broke one or more structural invariants.

    ``violations`` holds every independent violation found, not just the
    first, so callers can report them all at once.
    """

    def __init__(self, violations: Iterable[str]):
        self.violations = tuple(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class Outcome:
    """One branch of a prospect: a payoff and the chance of receiving it."""

    value: float
    p: float


@dataclass(frozen=True)
class Prospect:
    """A named option: the ordered outcomes a decision-maker would face."""

    name: str
    outcomes: tuple[Outcome, ...]

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(self.outcomes))

    def total_probability(self) -> float:
        return math.fsum(o.p for o in self.outcomes)


@dataclass(frozen=True)
class DecisionProblem:
    """Two or more prospects, exactly one of which will be chosen."""

    prospects: tuple[Prospect, ...]

    def __post_init__(self):
        object.__setattr__(self, "prospects", tuple(self.prospects))

    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.prospects)

    def prospect(self, name: str) -> Prospect:
        for p in self.prospects:
            if p.name == name:
                return p
        raise KeyError(name)


@dataclass(frozen=True)
class Marking:
    """Per-prospect boolean flags; True marks an outcome as regret-carrying.

    Flags are positional: ``flags[name][i]`` refers to outcome ``i`` of the
    prospect called ``name``. Treat instances as immutable.
    """

    flags: Mapping[str, tuple[bool, ...]]

    def __post_init__(self):
        normalized = {str(k): tuple(bool(b) for b in v) for k, v in self.flags.items()}
        object.__setattr__(self, "flags", normalized)

    @classmethod
    def none(cls, problem: DecisionProblem) -> "Marking":
        """All-false marking for ``problem``: no outcome carries regret."""
        return cls({p.name: tuple(False for _ in p.outcomes) for p in problem.prospects})

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "Marking":
        if not isinstance(doc, Mapping):
            raise ValueError("marking document must be a JSON object")
        flags = {}
        for name, raw in doc.items():
            if not isinstance(raw, (list, tuple)) or not all(
                isinstance(b, bool) for b in raw
            ):
                raise ValueError(f"marking for {name!r} must be a list of booleans")
            flags[str(name)] = tuple(raw)
        return cls(flags)

    def to_dict(self) -> dict[str, list[bool]]:
        return {name: list(v) for name, v in self.flags.items()}

    def for_prospect(self, name: str) -> tuple[bool, ...]:
        return self.flags[name]

    def with_flag(self, name: str, index: int, flag: bool) -> "Marking":
        """Copy of this marking with one positional flag replaced."""
        current = self.flags[name]
        if not 0 <= index < len(current):
            raise IndexError(f"outcome index {index} out of range for {name!r}")
        updated = dict(self.flags)
        updated[name] = current[:index] + (bool(flag),) + current[index + 1 :]
        return Marking(updated)

    def restrict(self, names: Iterable[str]) -> "Marking":
        """Sub-marking covering only ``names`` (for pairwise subproblems)."""
        return Marking({n: self.flags[n] for n in names})

    def mismatches(self, problem: DecisionProblem) -> list[str]:
        """Ways this marking fails to cover ``problem`` exactly once."""
        out = []
        names = problem.names()
        for name in names:
            if name not in self.flags:
                out.append(f"marking missing prospect {name!r}")
                continue
            want = len(problem.prospect(name).outcomes)
            got = len(self.flags[name])
            if got != want:
                out.append(
                    f"marking for {name!r} has {got} flags, prospect has {want} outcomes"
                )
        for name in self.flags:
            if name not in names:
                out.append(f"marking names unknown prospect {name!r}")
        return out


@dataclass(frozen=True)
class ProblemReport:
    """Outcome of checking a problem: hard violations plus advisory warnings."""

    errors: tuple[str, ...]
    warnings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


def check_problem(problem: DecisionProblem) -> ProblemReport:
    """Check every structural invariant and report all violations found.

    A problem with k independent violations yields k error entries. Warnings
    (probability-zero outcomes) never block evaluation.
    """
    errors: list[str] = []
    warnings: list[str] = []
    if len(problem.prospects) < 2:
        errors.append(f"problem has {len(problem.prospects)} prospects, needs at least 2")
    seen: set[str] = set()
    for prospect in problem.prospects:
        if prospect.name in seen:
            errors.append(f"duplicate prospect name {prospect.name!r}")
        seen.add(prospect.name)
        if not prospect.name:
            errors.append("prospect with empty name")
        if not prospect.outcomes:
            errors.append(f"prospect {prospect.name!r} has no outcomes")
            continue
        sum_ok = True
        for i, o in enumerate(prospect.outcomes):
            if not math.isfinite(o.value):
                errors.append(f"{prospect.name!r} outcome {i}: value {o.value} is not finite")
            if not math.isfinite(o.p):
                errors.append(f"{prospect.name!r} outcome {i}: probability {o.p} is not finite")
                sum_ok = False
            elif not 0.0 <= o.p <= 1.0:
                errors.append(
                    f"{prospect.name!r} outcome {i}: probability {o.p} outside [0, 1]"
                )
            elif o.p == 0.0:
                warnings.append(
                    f"{prospect.name!r} outcome {i}: probability 0 outcome can never be received"
                )
        if sum_ok:
            total = prospect.total_probability()
            if abs(total - 1.0) > PROB_SUM_TOL:
                errors.append(
                    f"{prospect.name!r}: probabilities sum to {total!r}, not 1"
                )
    return ProblemReport(tuple(errors), tuple(warnings))


def validate_problem(problem: DecisionProblem) -> DecisionProblem:
    """Return ``problem`` unchanged, or raise with every violation listed."""
    report = check_problem(problem)
    if not report.ok:
        raise ValidationError(report.errors)
    return problem


def _parse_probability(raw: Any) -> float:
    # accepts a plain number or an exact rational {"num": 1, "den": 3}
    if isinstance(raw, Mapping):
        try:
            num, den = raw["num"], raw["den"]
        except KeyError as exc:
            raise ValueError(f"rational probability missing {exc.args[0]!r}") from None
        if den == 0:
            raise ValueError("rational probability with zero denominator")
        return float(num) / float(den)
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ValueError(f"probability must be a number or num/den object, got {raw!r}")
    return float(raw)


def problem_from_dict(doc: Mapping[str, Any]) -> DecisionProblem:
    """Build a problem from its wire form. Raises ValueError on malformed shape.

    Structural invariants are not enforced here; run the result through
    :func:`validate_problem` (or :func:`check_problem` for the full report).
    """
    if not isinstance(doc, Mapping) or "prospects" not in doc:
        raise ValueError('problem document must be an object with a "prospects" list')
    raw_prospects = doc["prospects"]
    if not isinstance(raw_prospects, list):
        raise ValueError('"prospects" must be a list')
    prospects = []
    for entry in raw_prospects:
        if not isinstance(entry, Mapping):
            raise ValueError("each prospect must be an object")
        try:
            name = entry["name"]
            raw_outcomes = entry["outcomes"]
        except KeyError as exc:
            raise ValueError(f"prospect missing {exc.args[0]!r}") from None
        if not isinstance(raw_outcomes, list):
            raise ValueError(f'prospect {name!r}: "outcomes" must be a list')
        outcomes = []
        for raw in raw_outcomes:
            if not isinstance(raw, Mapping) or "value" not in raw or "p" not in raw:
                raise ValueError(
                    f'prospect {name!r}: each outcome needs "value" and "p"'
                )
            value = raw["value"]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError(f"prospect {name!r}: value must be a number")
            outcomes.append(Outcome(float(value), _parse_probability(raw["p"])))
        prospects.append(Prospect(str(name), tuple(outcomes)))
    return DecisionProblem(tuple(prospects))


def problem_to_dict(problem: DecisionProblem) -> dict[str, Any]:
    return {
        "prospects": [
            {
                "name": p.name,
                "outcomes": [{"value": o.value, "p": o.p} for o in p.outcomes],
            }
            for p in problem.prospects
        ]
    }


def canonical_json(obj: Any) -> str:
    """Deterministic JSON: sorted keys, compact separators, full float repr.

    The compact form means an object serializes to the same bytes whether it
    stands alone or is embedded in a larger response.
    """
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)
