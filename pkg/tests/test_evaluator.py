"""Five-step evaluation against hand-computed oracles, plus ranking rules."""

from __future__ import annotations

import pytest
from hypothesis import given

from ceut.evaluator import (
    EvaluationMode,
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
from ceut.model import (
    DecisionProblem,
    Marking,
    Outcome,
    Prospect,
    ValidationError,
)

from conftest import marked_problems, problems

A = Prospect("A", (Outcome(4000.0, 0.8), Outcome(0.0, 0.2)))
B = Prospect("B", (Outcome(3000.0, 1.0),))
C = Prospect("C", (Outcome(5000.0, 0.8), Outcome(0.0, 0.2)))
PAIR = DecisionProblem((A, B))
TRIPLE = DecisionProblem((A, B, C))
PAIR_MARKS = Marking.from_dict({"A": [False, True], "B": [False]})


def test_expected_value_oracles():
    assert expected_value(A) == pytest.approx(3200.0, abs=1e-9)
    assert expected_value(B) == 3000.0
    assert expected_value(C) == pytest.approx(4000.0, abs=1e-9)
    loss = Prospect("L", (Outcome(-1000.0, 0.75), Outcome(0.0, 0.25)))
    assert expected_value(loss) == -750.0


def test_best_alternative_joint_field():
    assert best_alternative(TRIPLE, "A")[:2] == ("C", pytest.approx(4000.0))
    assert best_alternative(TRIPLE, "B")[:2] == ("C", pytest.approx(4000.0))
    assert best_alternative(TRIPLE, "C")[:2] == ("A", pytest.approx(3200.0))


def test_best_alternative_least_loss_in_loss_domain():
    problem = DecisionProblem(
        (
            Prospect("X", (Outcome(-100.0, 1.0),)),
            Prospect("Y", (Outcome(-10.0, 1.0),)),
            Prospect("Z", (Outcome(-50.0, 1.0),)),
        )
    )
    alt = best_alternative(problem, "X")
    assert (alt.name, alt.ex) == ("Y", -10.0)


def test_best_alternative_tie_earliest_and_flagged():
    problem = DecisionProblem(
        (
            Prospect("X", (Outcome(5.0, 1.0),)),
            Prospect("Y", (Outcome(7.0, 1.0),)),
            Prospect("Z", (Outcome(7.0, 1.0),)),
        )
    )
    alt = best_alternative(problem, "X")
    assert alt.name == "Y"
    assert alt.tied is True
    alt = best_alternative(problem, "Y")
    assert alt.name == "Z"
    assert alt.tied is False


def test_best_alternative_unknown_name():
    with pytest.raises(KeyError):
        best_alternative(PAIR, "Q")


def test_ccc_mass_and_sign():
    mass, cost = ccc(A, (False, True), 3000.0)
    assert mass == pytest.approx(0.2, abs=1e-15)
    assert cost == pytest.approx(600.0, abs=1e-9)
    # loss domain: signed cost stays negative until the ceu step
    sure_loss = Prospect("A", (Outcome(-750.0, 1.0),))
    mass, cost = ccc(sure_loss, (True,), -750.0)
    assert (mass, cost) == (1.0, -750.0)


def test_ccc_flag_length_mismatch():
    with pytest.raises(ValueError):
        ccc(A, (True,), 3000.0)


def test_ceu_applies_absolute_value():
    assert ceu(3200.0, 600.0) == 2600.0
    assert ceu(-750.0, -750.0) == -1500.0
    assert ceu(-750.0, 750.0) == -1500.0


def test_evaluate_full_rows():
    ev = evaluate(PAIR, PAIR_MARKS)
    assert ev.mode is EvaluationMode.JOINT
    assert ev.warnings == ()
    row_a = ev.row("A")
    assert row_a.prospect == "A"
    assert row_a.ex == pytest.approx(3200.0, abs=1e-9)
    assert row_a.best_alt == "B"
    assert row_a.best_alt_ex == 3000.0
    assert row_a.ccc_prob_mass == pytest.approx(0.2, abs=1e-15)
    assert row_a.ccc == pytest.approx(600.0, abs=1e-9)
    assert row_a.ceu == pytest.approx(2600.0, abs=1e-9)
    assert row_a.best_alt_tied is False
    row_b = ev.row("B")
    assert row_b.ceu == 3000.0
    with pytest.raises(KeyError):
        ev.row("Z")


def test_evaluate_rows_in_problem_order():
    ev = evaluate(TRIPLE, Marking.none(TRIPLE))
    assert tuple(r.prospect for r in ev.rows) == ("A", "B", "C")


def test_pairwise_equals_joint_for_two_prospects():
    joint = evaluate(PAIR, PAIR_MARKS, EvaluationMode.JOINT)
    pairwise = evaluate(PAIR, PAIR_MARKS, EvaluationMode.PAIRWISE)
    for rj, rp in zip(joint.rows, pairwise.rows):
        assert rj.ceu == rp.ceu and rj.ccc == rp.ccc


def test_pairwise_requires_exactly_two():
    with pytest.raises(ValueError, match="exactly 2"):
        evaluate(TRIPLE, Marking.none(TRIPLE), EvaluationMode.PAIRWISE)


def test_evaluate_rejects_invalid_problem():
    bad = DecisionProblem(
        (Prospect("A", (Outcome(1.0, 0.5),)), Prospect("B", (Outcome(1.0, 1.0),)))
    )
    with pytest.raises(ValidationError):
        evaluate(bad, Marking.from_dict({"A": [False], "B": [False]}))


def test_evaluate_rejects_mismatched_marking():
    with pytest.raises(ValueError, match="missing prospect"):
        evaluate(PAIR, Marking.from_dict({"A": [False, True]}))


def test_mixed_domain_warning():
    problem = DecisionProblem(
        (Prospect("G", (Outcome(100.0, 1.0),)), Prospect("L", (Outcome(-100.0, 1.0),)))
    )
    ev = evaluate(problem, Marking.none(problem))
    assert any("mixed-domain" in w for w in ev.warnings)


def test_rank_orders_by_ceu():
    ev = evaluate(PAIR, PAIR_MARKS)
    ranking = rank(ev)
    assert ranking.order == ("B", "A")
    assert ranking.recommended == "B"
    assert ranking.entries[0] == ("B", 3000.0)
    assert ranking.tie_breaks == ()


def test_rank_tie_breaks_by_ex_then_problem_order():
    # X and Y share ceu; Y has the higher ex and wins the tie
    problem = DecisionProblem(
        (
            Prospect("X", (Outcome(10.0, 1.0),)),
            Prospect("Y", (Outcome(20.0, 1.0),)),
            Prospect("Z", (Outcome(10.0, 1.0),)),
        )
    )
    marking = Marking.from_dict({"X": [False], "Y": [True], "Z": [False]})
    # ceu: X=10, Y=20-10=10, Z=10; ex: 10, 20, 10
    ranking = rank(evaluate(problem, marking))
    assert ranking.order == ("Y", "X", "Z")
    assert any("higher ex wins" in t for t in ranking.tie_breaks)
    assert any("problem order wins" in t for t in ranking.tie_breaks)


def test_eut_rank_direct_from_outcomes():
    ranking = eut_rank(TRIPLE)
    assert ranking.order == ("C", "A", "B")
    assert ranking.entries[0] == ("C", pytest.approx(4000.0))


def test_eut_rank_tie_keeps_problem_order():
    problem = DecisionProblem(
        (Prospect("X", (Outcome(5.0, 1.0),)), Prospect("Y", (Outcome(5.0, 1.0),)))
    )
    ranking = eut_rank(problem)
    assert ranking.order == ("X", "Y")
    assert any("problem order wins" in t for t in ranking.tie_breaks)


def test_conventional_oc_rank_scores():
    ranking = conventional_oc_rank(TRIPLE)
    scores = dict(ranking.entries)
    assert scores["A"] == pytest.approx(3200.0 - 4000.0, abs=1e-9)
    assert scores["B"] == pytest.approx(3000.0 - 4000.0, abs=1e-9)
    assert scores["C"] == pytest.approx(4000.0 - 3200.0, abs=1e-9)
    assert ranking.order == eut_rank(TRIPLE).order


def test_evaluation_payload_shape():
    ev = evaluate(PAIR, PAIR_MARKS)
    payload = evaluation_payload(ev, rank(ev))
    assert set(payload) == {"mode", "rows", "ranking", "recommended", "warnings"}
    assert payload["recommended"] == "B"
    assert payload["rows"][0]["prospect"] == "A"
    assert set(payload["rows"][0]) == {
        "prospect", "ex", "best_alt", "best_alt_ex", "ccc_prob_mass", "ccc",
        "ceu", "best_alt_tied",
    }
    assert payload["ranking"]["order"][0] == {"prospect": "B", "score": 3000.0}


@given(problems())
def test_all_false_marking_degenerates_to_expected_value(problem):
    ev = evaluate(problem, Marking.none(problem))
    for row in ev.rows:
        assert row.ceu == row.ex
        assert row.ccc == 0.0
    assert rank(ev).order == eut_rank(problem).order


@given(marked_problems())
def test_ceu_never_exceeds_ex(problem_marking):
    problem, marking = problem_marking
    for row in evaluate(problem, marking).rows:
        assert row.ceu <= row.ex
