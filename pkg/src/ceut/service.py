"""What-if HTTP service: sessions hold a problem plus a marking, every
mutation re-evaluates synchronously, and audits run against session state.

Sessions live in memory with an idle TTL; an optional persist directory
snapshots them as JSON so a restarted service can pick them up. Responses are
rendered canonically (sorted keys, compact separators), which makes the
evaluation object byte-identical to the CLI's JSON output.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable

from fastapi import Body, FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware

from .audit import audit_independence, audit_invariance, audit_transitivity
from .corpus import Fixture, load_all, load_fixture
from .evaluator import EvaluationMode, evaluate, evaluation_payload, rank
from .model import (
    DecisionProblem,
    Marking,
    Outcome,
    canonical_json,
    check_problem,
    problem_from_dict,
    problem_to_dict,
)
from .policies import Profile, apply_policy, profile_from_dict

AXIOMS = ("transitivity", "independence", "invariance")


class CanonicalJSONResponse(Response):
    media_type = "application/json"

    def render(self, content: Any) -> bytes:
        return canonical_json(content).encode("utf-8")


@dataclass(frozen=True)
class Session:
    id: str
    problem: DecisionProblem
    marking: Marking
    profile: Profile | None
    fixture_id: str | None
    created: float
    updated: float


class SessionStore:
    """In-memory sessions with idle expiry and optional JSON snapshots.

    Mutations to the same session serialize on a per-session lock; distinct
    sessions never contend beyond the map lookup.
    """

    def __init__(self, ttl: float = 3600.0, persist_dir: str | None = None):
        self.ttl = ttl
        self.persist_dir = Path(persist_dir) if persist_dir else None
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._map_lock = threading.Lock()
        if self.persist_dir is not None:
            self.persist_dir.mkdir(parents=True, exist_ok=True)
            self._load_snapshots()

    def _load_snapshots(self) -> None:
        assert self.persist_dir is not None
        now = time.time()
        for path in sorted(self.persist_dir.glob("*.json")):
            try:
                with open(path, encoding="utf-8") as fh:
                    doc = json.load(fh)
                session = Session(
                    id=doc["id"],
                    problem=problem_from_dict(doc["problem"]),
                    marking=Marking.from_dict(doc["marking"]),
                    profile=(
                        profile_from_dict(doc["profile"])
                        if doc.get("profile") is not None
                        else None
                    ),
                    fixture_id=doc.get("fixture"),
                    created=float(doc["created"]),
                    updated=float(doc["updated"]),
                )
            except (ValueError, KeyError, OSError):
                continue
            if now - session.updated > self.ttl:
                path.unlink(missing_ok=True)
                continue
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()

    def _snapshot(self, session: Session) -> None:
        if self.persist_dir is None:
            return
        doc = {
            "id": session.id,
            "problem": problem_to_dict(session.problem),
            "marking": session.marking.to_dict(),
            "profile": session.profile.to_dict() if session.profile else None,
            "fixture": session.fixture_id,
            "created": session.created,
            "updated": session.updated,
        }
        tmp = self.persist_dir / f".{session.id}.tmp"
        tmp.write_text(canonical_json(doc), encoding="utf-8")
        tmp.replace(self.persist_dir / f"{session.id}.json")

    def _drop(self, sid: str) -> None:
        self._sessions.pop(sid, None)
        self._locks.pop(sid, None)
        if self.persist_dir is not None:
            (self.persist_dir / f"{sid}.json").unlink(missing_ok=True)

    def purge_expired(self) -> None:
        now = time.time()
        with self._map_lock:
            stale = [s.id for s in self._sessions.values() if now - s.updated > self.ttl]
            for sid in stale:
                self._drop(sid)

    def create(
        self,
        problem: DecisionProblem,
        marking: Marking,
        profile: Profile | None = None,
        fixture_id: str | None = None,
    ) -> Session:
        self.purge_expired()
        now = time.time()
        session = Session(
            id=uuid.uuid4().hex,
            problem=problem,
            marking=marking,
            profile=profile,
            fixture_id=fixture_id,
            created=now,
            updated=now,
        )
        with self._map_lock:
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()
        self._snapshot(session)
        return session

    def get(self, sid: str) -> Session:
        with self._map_lock:
            session = self._sessions.get(sid)
            if session is not None and time.time() - session.updated > self.ttl:
                self._drop(sid)
                session = None
        if session is None:
            raise KeyError(sid)
        return session

    def mutate(self, sid: str, fn: Callable[[Session], Session]) -> Session:
        with self._map_lock:
            lock = self._locks.get(sid)
        if lock is None:
            raise KeyError(sid)
        with lock:
            session = self.get(sid)
            session = replace(fn(session), updated=time.time())
            with self._map_lock:
                if sid not in self._sessions:
                    raise KeyError(sid)
                self._sessions[sid] = session
        self._snapshot(session)
        return session


def _bad(status: int, message: str, errors: list[str] | None = None):
    detail: dict[str, Any] = {"error": message}
    if errors:
        detail["errors"] = errors
    return HTTPException(status_code=status, detail=detail)


def _parse_problem(doc: Any) -> DecisionProblem:
    try:
        problem = problem_from_dict(doc)
    except ValueError as exc:
        raise _bad(400, str(exc)) from None
    report = check_problem(problem)
    if not report.ok:
        raise _bad(400, "invalid problem", list(report.errors)) from None
    return problem


def _parse_outcome(doc: Any, name: str) -> Outcome:
    if not isinstance(doc, dict) or "value" not in doc or "p" not in doc:
        raise _bad(422, f'{name} must be an object with "value" and "p"')
    try:
        return Outcome(float(doc["value"]), float(doc["p"]))
    except (TypeError, ValueError):
        raise _bad(422, f"{name}: value and p must be numbers") from None


def _session_doc(session: Session) -> dict[str, Any]:
    return {
        "id": session.id,
        "fixture": session.fixture_id,
        "created": session.created,
        "updated": session.updated,
        "problem": problem_to_dict(session.problem),
        "marking": session.marking.to_dict(),
        "profile": session.profile.to_dict() if session.profile else None,
    }


def _session_response(session: Session) -> dict[str, Any]:
    evaluation = evaluate(session.problem, session.marking, EvaluationMode.JOINT)
    return {
        "session": _session_doc(session),
        "evaluation": evaluation_payload(evaluation, rank(evaluation)),
    }


def create_app(
    corpus: str | None = None,
    session_ttl: float = 3600.0,
    persist_dir: str | None = None,
    ui_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(
        title="ceut what-if service",
        version="0.1.0",
        default_response_class=CanonicalJSONResponse,
    )
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(ttl=session_ttl, persist_dir=persist_dir)
    app.state.store = store

    def _get_session(sid: str) -> Session:
        try:
            return store.get(sid)
        except KeyError:
            raise _bad(404, f"unknown session {sid!r}") from None

    @app.post("/v1/sessions")
    def create_session(doc: dict = Body(...)):
        problem = _parse_problem(doc)
        session = store.create(problem, Marking.none(problem))
        return _session_response(session)

    @app.get("/v1/sessions/{sid}")
    def get_session(sid: str):
        return _session_response(_get_session(sid))

    @app.put("/v1/sessions/{sid}/marks/{prospect}/{index}")
    def put_mark(sid: str, prospect: str, index: int, doc: dict = Body(...)):
        if not isinstance(doc, dict) or not isinstance(doc.get("flag"), bool):
            raise _bad(422, 'body must be {"flag": true|false}')
        session = _get_session(sid)
        if prospect not in session.problem.names():
            raise _bad(422, f"unknown prospect {prospect!r}")
        n = len(session.problem.prospect(prospect).outcomes)
        if not 0 <= index < n:
            raise _bad(422, f"outcome index {index} out of range for {prospect!r} (0..{n - 1})")
        try:
            session = store.mutate(
                sid,
                lambda s: replace(s, marking=s.marking.with_flag(prospect, index, doc["flag"])),
            )
        except KeyError:
            raise _bad(404, f"unknown session {sid!r}") from None
        return _session_response(session)

    @app.post("/v1/sessions/{sid}/profile")
    def post_profile(sid: str, doc: dict = Body(...)):
        try:
            profile = profile_from_dict(doc)
        except ValueError as exc:
            raise _bad(400, str(exc)) from None
        session = _get_session(sid)
        try:
            marking = apply_policy(session.problem, profile)
        except ValueError as exc:
            raise _bad(400, str(exc)) from None
        try:
            session = store.mutate(
                sid, lambda s: replace(s, marking=marking, profile=profile)
            )
        except KeyError:
            raise _bad(404, f"unknown session {sid!r}") from None
        return _session_response(session)

    @app.post("/v1/sessions/{sid}/audit/{axiom}")
    def post_audit(sid: str, axiom: str, doc: dict | None = Body(None)):
        session = _get_session(sid)
        params = doc or {}
        if axiom not in AXIOMS:
            raise _bad(422, f"unknown axiom {axiom!r} (known: {', '.join(AXIOMS)})")
        if axiom == "transitivity":
            mode_raw = params.get("mode", "pairwise")
            try:
                mode = EvaluationMode(mode_raw)
            except ValueError:
                raise _bad(422, f"unknown mode {mode_raw!r}") from None
            report = audit_transitivity(session.problem, session.marking, mode)
        elif axiom == "invariance":
            offset = params.get("offset")
            if not isinstance(offset, (int, float)) or isinstance(offset, bool):
                raise _bad(422, 'invariance needs a numeric "offset"')
            if params.get("use_profile"):
                if session.profile is None:
                    raise _bad(422, "session has no profile to re-derive marks from")
                source: Any = session.profile
            else:
                source = session.marking
            try:
                report = audit_invariance(session.problem, float(offset), source)
            except ValueError as exc:
                raise _bad(422, str(exc)) from None
        else:
            if len(session.problem.prospects) != 2:
                raise _bad(422, "independence audits need a two-prospect session")
            pair_two_doc = params.get("pair_two")
            if pair_two_doc is None:
                raise _bad(422, 'independence needs "pair_two", "marking_two", "branch_one", "branch_two"')
            try:
                pair_two = problem_from_dict(pair_two_doc)
            except ValueError as exc:
                raise _bad(422, f"pair_two: {exc}") from None
            report_two = check_problem(pair_two)
            if not report_two.ok:
                raise _bad(422, "pair_two invalid", list(report_two.errors))
            try:
                marking_two = Marking.from_dict(params.get("marking_two") or {})
            except ValueError as exc:
                raise _bad(422, f"marking_two: {exc}") from None
            branch_one = _parse_outcome(params.get("branch_one"), "branch_one")
            branch_two = _parse_outcome(params.get("branch_two"), "branch_two")
            try:
                report = audit_independence(
                    session.problem,
                    pair_two,
                    branch_one,
                    branch_two,
                    (session.marking, marking_two),
                )
            except ValueError as exc:
                raise _bad(422, str(exc)) from None
        return {"session": session.id, "report": report.to_dict()}

    @app.get("/v1/fixtures")
    def list_fixtures():
        fixtures = load_all(corpus)
        return {"fixtures": [_fixture_entry(f) for f in fixtures]}

    @app.post("/v1/fixtures/{fid}/session")
    def fixture_session(fid: str, decision: int = Query(0)):
        try:
            fixture = load_fixture(fid, corpus)
        except KeyError as exc:
            raise _bad(404, str(exc.args[0])) from None
        if not 0 <= decision < len(fixture.decisions):
            raise _bad(
                422,
                f"decision {decision} out of range for {fid} "
                f"(0..{len(fixture.decisions) - 1})",
            )
        d = fixture.decisions[decision]
        session = store.create(
            d.problem, d.marking, profile=fixture.profile, fixture_id=fid
        )
        return _session_response(session)

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _fixture_entry(fixture: Fixture) -> dict[str, Any]:
    return {
        "id": fixture.id,
        "title": fixture.title,
        "source": fixture.source,
        "unit": fixture.unit,
        "decisions": len(fixture.decisions),
        "prospects": list(fixture.prospect_names()),
        "profile": fixture.profile.to_dict() if fixture.profile else None,
        "invariance_offset": fixture.invariance.offset if fixture.invariance else None,
        "has_independence": fixture.independence is not None,
    }
