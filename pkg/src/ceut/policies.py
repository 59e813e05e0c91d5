"""Marking policies: parameterized stand-ins for the decision-maker's own
judgement about which outcomes would carry regret.

Markings are subjective data in the underlying theory. Policies exist so that
ensembles and what-if runs can derive markings mechanically; Manual means the
marking arrives as data and no policy runs at all.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, Mapping

from .evaluator import best_alternative
from .model import DecisionProblem, Marking, validate_problem

# an outcome is treated as certain when its probability is within the
# problem-level probability tolerance of 1
CERTAIN_P = 1.0 - 1e-9


class Policy(enum.Enum):
    MANUAL = "manual"
    STRICT_COMPARISON = "strict_comparison"
    TOLERANT = "tolerant"


@dataclass(frozen=True)
class Profile:
    """A policy with its parameters. All parameters must be finite and >= 0."""

    policy: Policy
    tolerance_rel: float = 0.0
    aspiration_gain: float = 0.0
    loss_pain_threshold: float = 0.0

    def __post_init__(self):
        for name in ("tolerance_rel", "aspiration_gain", "loss_pain_threshold"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be a finite number >= 0, got {v!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "policy": self.policy.value,
            "tolerance_rel": float(self.tolerance_rel),
            "aspiration_gain": float(self.aspiration_gain),
            "loss_pain_threshold": float(self.loss_pain_threshold),
        }


def profile_from_dict(doc: Mapping[str, Any]) -> Profile:
    if not isinstance(doc, Mapping) or "policy" not in doc:
        raise ValueError('profile document must be an object with a "policy" field')
    raw = str(doc["policy"]).strip().lower().replace("-", "_")
    try:
        policy = Policy(raw)
    except ValueError:
        known = ", ".join(p.value for p in Policy)
        raise ValueError(f"unknown policy {doc['policy']!r} (known: {known})") from None
    kwargs = {}
    for name in ("tolerance_rel", "aspiration_gain", "loss_pain_threshold"):
        if name in doc:
            v = doc[name]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValueError(f"{name} must be a number")
            kwargs[name] = float(v)
    extra = set(doc) - {"policy", "tolerance_rel", "aspiration_gain", "loss_pain_threshold"}
    if extra:
        raise ValueError(f"unknown profile fields: {sorted(extra)}")
    return Profile(policy, **kwargs)


def apply_policy(problem: DecisionProblem, profile: Profile) -> Marking:
    """Derive a marking for every prospect of ``problem``.

    strict_comparison marks an outcome iff its value is strictly below the
    best alternative's expected value. tolerant loosens that cut by a
    relative slack and, for certain outcomes only, replaces it with absolute
    rules: a certain gain is marked iff it falls short of ``aspiration_gain``;
    a certain loss is marked iff its magnitude reaches
    ``loss_pain_threshold``. No policy ever marks a probability-0 outcome.
    """
    validate_problem(problem)
    if profile.policy is Policy.MANUAL:
        raise ValueError("manual markings arrive as data; no policy to apply")
    flags: dict[str, tuple[bool, ...]] = {}
    for prospect in problem.prospects:
        alt = best_alternative(problem, prospect.name)
        cut = alt.ex - profile.tolerance_rel * abs(alt.ex)
        marks = []
        for o in prospect.outcomes:
            if o.p == 0.0:
                marks.append(False)
            elif profile.policy is Policy.STRICT_COMPARISON:
                marks.append(o.value < alt.ex)
            elif o.p >= CERTAIN_P:
                if o.value >= 0:
                    marks.append(o.value < profile.aspiration_gain)
                else:
                    marks.append(-o.value >= profile.loss_pain_threshold)
            else:
                marks.append(o.value < cut)
        flags[prospect.name] = tuple(marks)
    return Marking(flags)
