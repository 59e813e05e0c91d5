"""Comparative expected utility for risky choice problems.

Evaluate prospects in five steps (expected value, marked outcomes, marked
mass, comparative cost against the best unchosen alternative, CEU), derive
markings from policies, audit classical axioms on concrete inputs, and replay
a corpus of worked examples.
"""

from .audit import (
    AuditReport,
    PreferenceMatrix,
    SubDistributionPair,
    audit_independence,
    audit_invariance,
    audit_transitivity,
    cancel_common_branch,
    ensemble_invariance,
    ensemble_transitivity,
    find_cycles,
    frame_shift,
    preference_matrix,
)
from .corpus import (
    FIXTURE_IDS,
    Decision,
    Fixture,
    ReplayReport,
    fixture_from_dict,
    fixture_to_dict,
    load_all,
    load_fixture,
    replay,
    replicate_fixture_marking,
    run_independence_audit,
    run_invariance_audit,
)
from .evaluator import (
    Evaluation,
    EvaluationMode,
    EvaluationRow,
    Ranking,
    best_alternative,
    ccc,
    ceu,
    conventional_oc_rank,
    eut_rank,
    evaluate,
    evaluation_payload,
    expected_value,
    rank,
)
from .generate import random_problem, random_problems
from .model import (
    PROB_SUM_TOL,
    DecisionProblem,
    Marking,
    Outcome,
    ProblemReport,
    Prospect,
    ValidationError,
    canonical_json,
    check_problem,
    problem_from_dict,
    problem_to_dict,
    validate_problem,
)
from .policies import Policy, Profile, apply_policy, profile_from_dict

__version__ = "0.1.0"

__all__ = [
    "AuditReport",
    "Decision",
    "DecisionProblem",
    "Evaluation",
    "EvaluationMode",
    "EvaluationRow",
    "FIXTURE_IDS",
    "Fixture",
    "Marking",
    "Outcome",
    "PROB_SUM_TOL",
    "Policy",
    "PreferenceMatrix",
    "ProblemReport",
    "Profile",
    "Prospect",
    "Ranking",
    "ReplayReport",
    "SubDistributionPair",
    "ValidationError",
    "apply_policy",
    "audit_independence",
    "audit_invariance",
    "audit_transitivity",
    "best_alternative",
    "canonical_json",
    "ccc",
    "ceu",
    "check_problem",
    "conventional_oc_rank",
    "cancel_common_branch",
    "ensemble_invariance",
    "ensemble_transitivity",
    "eut_rank",
    "evaluate",
    "evaluation_payload",
    "expected_value",
    "find_cycles",
    "fixture_from_dict",
    "fixture_to_dict",
    "frame_shift",
    "load_all",
    "load_fixture",
    "preference_matrix",
    "problem_from_dict",
    "problem_to_dict",
    "profile_from_dict",
    "random_problem",
    "random_problems",
    "rank",
    "replay",
    "replicate_fixture_marking",
    "run_independence_audit",
    "run_invariance_audit",
    "validate_problem",
]
