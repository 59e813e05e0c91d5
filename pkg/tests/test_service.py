"""HTTP what-if service: sessions, marks, profiles, audits, fixture seeding."""

from __future__ import annotations

import json
import threading
import time

import pytest
from fastapi.testclient import TestClient

from ceut.cli import main
from ceut.corpus import load_fixture
from ceut.evaluator import EvaluationMode, evaluate, evaluation_payload, rank
from ceut.model import Marking, canonical_json, problem_to_dict
from ceut.service import SessionStore, create_app

F1_PROBLEM = {
    "prospects": [
        {"name": "A", "outcomes": [{"value": 4000, "p": 0.8}, {"value": 0, "p": 0.2}]},
        {"name": "B", "outcomes": [{"value": 3000, "p": 1.0}]},
    ]
}


@pytest.fixture()
def client():
    return TestClient(create_app())


def make_session(client, doc=None):
    resp = client.post("/v1/sessions", json=doc or F1_PROBLEM)
    assert resp.status_code == 200, resp.text
    return resp.json()


def rows_by_name(body):
    return {row["prospect"]: row for row in body["evaluation"]["rows"]}


def test_create_session_starts_unmarked(client):
    body = make_session(client)
    session = body["session"]
    assert session["marking"] == {"A": [False, False], "B": [False]}
    assert session["profile"] is None
    assert session["fixture"] is None
    rows = rows_by_name(body)
    assert rows["A"]["ceu"] == rows["A"]["ex"]
    assert body["evaluation"]["recommended"] == "A"


def test_get_session_round_trip(client):
    sid = make_session(client)["session"]["id"]
    resp = client.get(f"/v1/sessions/{sid}")
    assert resp.status_code == 200
    assert resp.json()["session"]["id"] == sid


def test_unknown_session_404(client):
    resp = client.get("/v1/sessions/deadbeef")
    assert resp.status_code == 404
    assert "error" in resp.json()["detail"]


def test_invalid_problem_400_with_all_errors(client):
    doc = {
        "prospects": [
            {"name": "A", "outcomes": [{"value": 1, "p": 0.5}]},
            {"name": "A", "outcomes": [{"value": 2, "p": 3.0}]},
        ]
    }
    resp = client.post("/v1/sessions", json=doc)
    assert resp.status_code == 400
    detail = resp.json()["detail"]
    joined = " ".join(detail["errors"])
    assert "duplicate prospect name" in joined
    assert "outside [0, 1]" in joined
    assert "sum to" in joined


def test_mark_b_collapses_its_ceu(client):
    sid = make_session(client)["session"]["id"]
    resp = client.put(f"/v1/sessions/{sid}/marks/B/0", json={"flag": True})
    assert resp.status_code == 200
    body = resp.json()
    rows = rows_by_name(body)
    assert rows["B"]["ceu"] == pytest.approx(-200.0, abs=1e-9)
    assert rows["B"]["ccc"] == pytest.approx(3200.0, abs=1e-9)
    assert body["session"]["marking"]["B"] == [True]
    resp = client.put(f"/v1/sessions/{sid}/marks/B/0", json={"flag": False})
    assert rows_by_name(resp.json())["B"]["ceu"] == 3000.0


def test_fixture_session_badge_flip_loop(client):
    body = client.post("/v1/fixtures/F1/session").json()
    sid = body["session"]["id"]
    assert body["evaluation"]["recommended"] == "B"
    rows = rows_by_name(body)
    assert rows["A"]["ceu"] == pytest.approx(2600.0, abs=1e-9)
    assert rows["B"]["ceu"] == pytest.approx(3000.0, abs=1e-9)
    flipped = client.put(f"/v1/sessions/{sid}/marks/B/0", json={"flag": True}).json()
    assert flipped["evaluation"]["recommended"] == "A"
    back = client.put(f"/v1/sessions/{sid}/marks/B/0", json={"flag": False}).json()
    assert back["evaluation"]["recommended"] == "B"


@pytest.mark.parametrize(
    "path, body, fragment",
    [
        ("marks/Z/0", {"flag": True}, "unknown prospect"),
        ("marks/A/9", {"flag": True}, "out of range"),
        ("marks/A/0", {"flag": "yes"}, "flag"),
        ("marks/A/0", {}, "flag"),
    ],
)
def test_put_mark_rejects_bad_requests(client, path, body, fragment):
    sid = make_session(client)["session"]["id"]
    resp = client.put(f"/v1/sessions/{sid}/{path}", json=body)
    assert resp.status_code == 422
    assert fragment in resp.json()["detail"]["error"]


def test_profile_strict_marks_service_example(client):
    sid = make_session(client)["session"]["id"]
    resp = client.post(
        f"/v1/sessions/{sid}/profile", json={"policy": "strict_comparison"}
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["session"]["marking"] == {"A": [False, True], "B": [True]}
    assert body["session"]["profile"]["policy"] == "strict_comparison"


def test_profile_tolerant_aspiration_leaves_b_unmarked(client):
    sid = make_session(client)["session"]["id"]
    resp = client.post(
        f"/v1/sessions/{sid}/profile",
        json={"policy": "tolerant", "aspiration_gain": 1000},
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["session"]["marking"]["B"] == [False]
    assert body["evaluation"]["recommended"] == "B"


def test_profile_malformed_400(client):
    sid = make_session(client)["session"]["id"]
    resp = client.post(f"/v1/sessions/{sid}/profile", json={"policy": "optimist"})
    assert resp.status_code == 400


def test_profile_manual_not_applicable_400(client):
    sid = make_session(client)["session"]["id"]
    resp = client.post(f"/v1/sessions/{sid}/profile", json={"policy": "manual"})
    assert resp.status_code == 400
    assert "manual" in resp.json()["detail"]["error"]


def test_audit_transitivity_joint_never_cycles(client):
    sid = make_session(client)["session"]["id"]
    resp = client.post(
        f"/v1/sessions/{sid}/audit/transitivity", json={"mode": "joint"}
    )
    assert resp.status_code == 200
    report = resp.json()["report"]
    assert report["axiom"] == "transitivity"
    assert report["verdict"] == "holds-on-input"


def test_audit_unknown_axiom_422(client):
    sid = make_session(client)["session"]["id"]
    resp = client.post(f"/v1/sessions/{sid}/audit/continuity", json={})
    assert resp.status_code == 422


def test_audit_invariance_needs_offset(client):
    sid = make_session(client)["session"]["id"]
    resp = client.post(f"/v1/sessions/{sid}/audit/invariance", json={})
    assert resp.status_code == 422
    resp = client.post(
        f"/v1/sessions/{sid}/audit/invariance", json={"offset": "big"}
    )
    assert resp.status_code == 422


def test_audit_invariance_use_profile_requires_profile(client):
    sid = make_session(client)["session"]["id"]
    resp = client.post(
        f"/v1/sessions/{sid}/audit/invariance",
        json={"offset": -100, "use_profile": True},
    )
    assert resp.status_code == 422


def test_audit_invariance_f5_holds_at_minus_600(client):
    body = client.post("/v1/fixtures/F5/session").json()
    sid = body["session"]["id"]
    resp = client.post(
        f"/v1/sessions/{sid}/audit/invariance", json={"offset": -600}
    )
    assert resp.status_code == 200
    assert resp.json()["report"]["verdict"] == "holds-on-input"


def test_audit_independence_needs_two_prospect_session(client):
    doc = {
        "prospects": [
            {"name": "A", "outcomes": [{"value": 1, "p": 1.0}]},
            {"name": "B", "outcomes": [{"value": 2, "p": 1.0}]},
            {"name": "C", "outcomes": [{"value": 3, "p": 1.0}]},
        ]
    }
    sid = make_session(client, doc)["session"]["id"]
    resp = client.post(
        f"/v1/sessions/{sid}/audit/independence",
        json={"pair_two": doc, "branch_one": {"value": 1, "p": 0.5},
              "branch_two": {"value": 1, "p": 0.5}},
    )
    assert resp.status_code == 422
    assert "two-prospect" in resp.json()["detail"]["error"]


def test_audit_independence_f4_flow(client):
    fixture = load_fixture("F4")
    body = client.post("/v1/fixtures/F4/session").json()
    sid = body["session"]["id"]
    second = fixture.decisions[1]
    resp = client.post(
        f"/v1/sessions/{sid}/audit/independence",
        json={
            "pair_two": problem_to_dict(second.problem),
            "marking_two": second.marking.to_dict(),
            "branch_one": {"value": 100, "p": 0.89},
            "branch_two": {"value": 0, "p": 0.89},
        },
    )
    assert resp.status_code == 200, resp.text
    report = resp.json()["report"]
    assert report["verdict"] == "violated-on-input"
    assert report["witness"]["pair_one_prefers"] == "s1"
    assert report["witness"]["pair_two_prefers"] == "r2"


def test_fixtures_listing(client):
    resp = client.get("/v1/fixtures")
    assert resp.status_code == 200
    entries = resp.json()["fixtures"]
    assert [e["id"] for e in entries] == ["F1", "F2", "F3", "F4", "F5", "F6", "F7"]
    by_id = {e["id"]: e for e in entries}
    assert by_id["F4"]["has_independence"] is True
    assert by_id["F4"]["unit"] == "million"
    assert by_id["F5"]["invariance_offset"] == -600.0
    assert by_id["F1"]["profile"]["policy"] == "tolerant"
    assert by_id["F3"]["prospects"] == ["A", "B", "C"]
    assert by_id["F4"]["decisions"] == 2


def test_fixture_session_decision_selector(client):
    body = client.post("/v1/fixtures/F4/session", params={"decision": 1}).json()
    assert body["evaluation"]["recommended"] == "r2"
    rows = rows_by_name(body)
    assert rows["r2"]["ceu"] == pytest.approx(1.6, abs=1e-9)
    assert rows["s2"]["ceu"] == pytest.approx(0.765, abs=0.01)


def test_fixture_session_unknown_fixture_404(client):
    assert client.post("/v1/fixtures/F9/session").status_code == 404


def test_fixture_session_decision_out_of_range_422(client):
    resp = client.post("/v1/fixtures/F1/session", params={"decision": 7})
    assert resp.status_code == 422


def test_responses_are_canonical_bytes(client):
    resp = client.post("/v1/fixtures/F2/session")
    assert resp.content == canonical_json(json.loads(resp.content)).encode("utf-8")


def test_service_evaluation_matches_cli_bytes(client, capsys, tmp_path):
    body = make_session(client)
    service_doc = canonical_json(body["evaluation"])

    problem = tmp_path / "p.json"
    marking = tmp_path / "m.json"
    problem.write_text(json.dumps(F1_PROBLEM))
    marking.write_text(json.dumps({"A": [False, False], "B": [False]}))
    code = main(["eval", str(problem), "--marking", str(marking), "--format", "json"])
    assert code == 0
    cli_doc = capsys.readouterr().out.strip()
    assert service_doc == cli_doc

    fixture = load_fixture("F1")
    ev = evaluate(
        fixture.decisions[0].problem, Marking.none(fixture.decisions[0].problem),
        EvaluationMode.JOINT,
    )
    assert service_doc == canonical_json(evaluation_payload(ev, rank(ev)))


def test_session_ttl_expires(tmp_path):
    client = TestClient(create_app(session_ttl=0.25))
    sid = make_session(client)["session"]["id"]
    assert client.get(f"/v1/sessions/{sid}").status_code == 200
    time.sleep(0.4)
    assert client.get(f"/v1/sessions/{sid}").status_code == 404


def test_sessions_persist_across_restarts(tmp_path):
    store_dir = str(tmp_path / "sessions")
    first = TestClient(create_app(persist_dir=store_dir))
    sid = make_session(first)["session"]["id"]
    first.put(f"/v1/sessions/{sid}/marks/A/1", json={"flag": True})

    second = TestClient(create_app(persist_dir=store_dir))
    resp = second.get(f"/v1/sessions/{sid}")
    assert resp.status_code == 200
    assert resp.json()["session"]["marking"] == {"A": [False, True], "B": [False]}


def test_expired_snapshots_dropped_on_load(tmp_path):
    store_dir = tmp_path / "sessions"
    first = TestClient(create_app(persist_dir=str(store_dir)))
    sid = make_session(first)["session"]["id"]
    assert (store_dir / f"{sid}.json").is_file()
    time.sleep(0.05)

    second = TestClient(create_app(persist_dir=str(store_dir), session_ttl=1e-6))
    assert second.get(f"/v1/sessions/{sid}").status_code == 404
    assert not (store_dir / f"{sid}.json").exists()


def test_store_mutations_serialize_per_session():
    from ceut.model import problem_from_dict

    store = SessionStore()
    problem = problem_from_dict(F1_PROBLEM)
    session = store.create(problem, Marking.none(problem))
    events = []

    def slow_identity(s):
        events.append("enter")
        time.sleep(0.05)
        events.append("exit")
        return s

    threads = [
        threading.Thread(target=lambda: store.mutate(session.id, slow_identity))
        for _ in range(2)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert events == ["enter", "exit", "enter", "exit"]


def test_concurrent_marks_on_distinct_indices_all_land(client):
    doc = {
        "prospects": [
            {"name": "P", "outcomes": [{"value": float(i), "p": 0.2} for i in range(5)]},
            {"name": "Q", "outcomes": [{"value": 10.0, "p": 1.0}]},
        ]
    }
    sid = make_session(client, doc)["session"]["id"]

    def toggle(i):
        resp = client.put(f"/v1/sessions/{sid}/marks/P/{i}", json={"flag": True})
        assert resp.status_code == 200

    threads = [threading.Thread(target=toggle, args=(i,)) for i in range(5)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    final = client.get(f"/v1/sessions/{sid}").json()
    assert final["session"]["marking"]["P"] == [True] * 5
