"""Session lifecycle over HTTP/WebSocket, plus the orchestration core.

``SessionService`` owns the prompt/event flow (generate or parse, apply,
checkpoint, diff, emit) against a file-backed store; the FastAPI app in
``create_app`` is a thin wire layer over it, one resource per surface:
the generated UI, the schema view, the data, and the traceable history.

Writes to one session are serialized behind a per-session lock and each
mutation persists atomically (write-then-rename), so concurrent readers
see either the old or the new snapshot, never a torn one.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Callable

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from starlette.concurrency import run_in_threadpool

from .canonical import canon_compact, canon_dumps
from .errors import (
    FixtureMissError,
    IrreparableResponseError,
    ProviderUnavailableError,
    TaskmoldError,
    UnknownCheckpointError,
    UpdaterError,
)
from .gateway import Gateway
from .history import History, checkpoint, restore
from .session import Session
from .uidoc import compile_card, compile_collection, compile_entity_panel, diff_ui
from .updaters import RepresentationDirective, apply_batch, apply_directive, apply_updater, translate_event


class EventLog:
    """Ordered server->client events for one session."""

    def __init__(self) -> None:
        self.events: list[dict] = []
        self._cv = threading.Condition()

    def emit(self, event: dict) -> None:
        with self._cv:
            event = dict(event)
            event["seq"] = len(self.events)
            self.events.append(event)
            self._cv.notify_all()

    def after(self, index: int, timeout: float = 0.2) -> list[dict]:
        with self._cv:
            if len(self.events) <= index:
                self._cv.wait(timeout)
            return self.events[index:]


class SessionStore:
    """Directory of canonical JSON session files, one writer per session."""

    def __init__(self, root: str | FsPath):
        self.root = FsPath(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock(self, sid: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(sid, threading.Lock())

    def _path(self, sid: str) -> FsPath:
        return self.root / f"{sid}.json"

    def ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("s-*.json"))

    def create(self) -> str:
        with self._locks_guard:
            taken = {p.stem for p in self.root.glob("s-*.json")}
            n = 1
            while f"s-{n}" in taken:
                n += 1
            sid = f"s-{n}"
            self._write(sid, {"session": None, "history": History().to_json()})
            return sid

    def exists(self, sid: str) -> bool:
        return self._path(sid).exists()

    def load(self, sid: str) -> tuple[Session | None, History]:
        raw = json.loads(self._path(sid).read_text(encoding="utf-8"))
        session = Session.from_json(raw["session"]) if raw.get("session") else None
        return session, History.from_json(raw.get("history", {}))

    def save(self, sid: str, session: Session | None, history: History) -> None:
        self._write(sid, {
            "session": session.to_json() if session else None,
            "history": history.to_json(),
        })

    def _write(self, sid: str, payload: dict) -> None:
        path = self._path(sid)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(canon_dumps(payload), encoding="utf-8")
        os.replace(tmp, path)


@dataclass
class PromptOutcome:
    checkpoint_id: str | None
    message: str
    document: dict
    delta: list[dict]


class SessionService:
    """Prompt/event orchestration shared by the HTTP app and the CLI."""

    def __init__(self, store: SessionStore, gateway: Gateway,
                 clock: Callable[[], float] | None = None):
        self.store = store
        self.gateway = gateway
        self.clock = clock or time.time
        self._events: dict[str, EventLog] = {}
        self._events_guard = threading.Lock()

    def events(self, sid: str) -> EventLog:
        with self._events_guard:
            return self._events.setdefault(sid, EventLog())

    def create_session(self) -> str:
        return self.store.create()

    def _emit_mutation(self, sid: str, checkpoint_id: str, label: str,
                       old_doc: dict | None, new_doc: dict) -> list[dict]:
        log = self.events(sid)
        log.emit({"type": "checkpoint-added", "checkpoint": checkpoint_id, "label": label})
        delta = diff_ui(old_doc, new_doc).to_json() if old_doc is not None else []
        log.emit({"type": "ui-delta", "delta": delta, "checkpoint": checkpoint_id})
        return delta

    def _prior_prompts(self, history: History) -> tuple[str, ...]:
        return tuple(cp.label for cp in history.checkpoints if cp.origin == "user-prompt")

    def handle_prompt(self, sid: str, prompt: str) -> PromptOutcome:
        """First prompt generates the model; later ones parse into updaters."""
        with self.store.lock(sid):
            session, history = self.store.load(sid)
            if session is None:
                model = self.gateway.generate_model(prompt)
                new_session = model.to_session()
                history, cp_id = checkpoint(history, new_session, prompt, "user-prompt", self.clock)
                self.store.save(sid, new_session, history)
                document = new_session.compile().to_json()
                delta = self._emit_mutation(sid, cp_id, prompt, None, document)
                return PromptOutcome(cp_id, "", document, delta)

            prior = self._prior_prompts(history)
            updaters, note = self.gateway.parse_followup(prompt, session, prior)
            if not updaters:
                self.events(sid).emit({"type": "provider-status", "status": "no-op",
                                       "message": note or "no model change"})
                return PromptOutcome(None, note or "no model change",
                                     session.compile().to_json(), [])
            old_doc = session.compile().to_json()
            new_session = apply_batch(session, updaters, gateway=self.gateway, actor="system")
            history, cp_id = checkpoint(history, new_session, prompt, "user-prompt", self.clock)
            self.store.save(sid, new_session, history)
            new_doc = new_session.compile().to_json()
            delta = self._emit_mutation(sid, cp_id, prompt, old_doc, new_doc)
            return PromptOutcome(cp_id, note, new_doc, delta)

    def handle_event(self, sid: str, event: dict) -> PromptOutcome:
        """Translate a gesture, apply it, and checkpoint with origin=action."""
        with self.store.lock(sid):
            session, history = self.store.load(sid)
            if session is None:
                raise UpdaterError("unknown-target", "session has no model yet")
            translated = translate_event(session, event)
            old_doc = session.compile().to_json()
            if isinstance(translated, RepresentationDirective):
                new_session = apply_directive(session, translated)
                label = f"switch {translated.entity} to {translated.representation}"
            else:
                new_session = apply_updater(session, translated, gateway=self.gateway, actor="user")
                label = f"{event.get('type')} {translated.target}"
            history, cp_id = checkpoint(history, new_session, label, "action", self.clock)
            self.store.save(sid, new_session, history)
            new_doc = new_session.compile().to_json()
            delta = self._emit_mutation(sid, cp_id, label, old_doc, new_doc)
            return PromptOutcome(cp_id, "", new_doc, delta)

    def restore_checkpoint(self, sid: str, checkpoint_id: str) -> PromptOutcome:
        with self.store.lock(sid):
            session, history = self.store.load(sid)
            if session is None:
                raise UnknownCheckpointError("session has no checkpoints yet")
            old_doc = session.compile().to_json()
            history, restored = restore(history, checkpoint_id)
            self.store.save(sid, restored, history)
            new_doc = restored.compile().to_json()
            delta = diff_ui(old_doc, new_doc).to_json()
            self.events(sid).emit({"type": "ui-delta", "delta": delta, "checkpoint": checkpoint_id})
            return PromptOutcome(checkpoint_id, "", new_doc, delta)

    def emit_violation(self, sid: str, details) -> None:
        self.events(sid).emit({"type": "violation", "violations": details or []})


# ---------------------------------------------------------------------------
# HTTP app


def create_app(store_dir: str | FsPath, gateway: Gateway,
               clock: Callable[[], float] | None = None) -> FastAPI:
    store = SessionStore(store_dir)
    service = SessionService(store, gateway, clock)
    app = FastAPI(title="taskmold")
    app.state.service = service

    def need(sid: str) -> None:
        if not store.exists(sid):
            raise HTTPException(status_code=404, detail=f"no session {sid!r}")

    def outcome_json(outcome: PromptOutcome) -> dict:
        return {
            "checkpoint": outcome.checkpoint_id,
            "message": outcome.message,
            "document": outcome.document,
            "delta": outcome.delta,
        }

    def failure(sid: str, exc: Exception):
        if isinstance(exc, UpdaterError):
            service.emit_violation(sid, exc.details)
            return JSONResponse(status_code=409, content={
                "error": {"type": exc.code, "message": str(exc), "details": exc.details}})
        if isinstance(exc, (ProviderUnavailableError, FixtureMissError)):
            service.events(sid).emit({"type": "provider-status", "status": "error",
                                      "message": str(exc)})
            return JSONResponse(status_code=502, content={
                "error": {"type": type(exc).__name__, "message": str(exc)}})
        if isinstance(exc, IrreparableResponseError):
            service.events(sid).emit({"type": "provider-status", "status": "error",
                                      "message": str(exc)})
            return JSONResponse(status_code=422, content={
                "error": {"type": "irreparable-response", "message": str(exc),
                          "attempts": exc.attempts}})
        if isinstance(exc, TaskmoldError):
            return JSONResponse(status_code=422, content={
                "error": {"type": type(exc).__name__, "message": str(exc)}})
        raise exc

    @app.post("/sessions")
    def create_session():
        return {"id": service.create_session()}

    @app.get("/sessions")
    def list_sessions():
        return {"sessions": store.ids()}

    @app.post("/sessions/{sid}/prompt")
    def post_prompt(sid: str, body: dict):
        need(sid)
        prompt = body.get("prompt", "")
        if not prompt:
            raise HTTPException(status_code=422, detail="prompt must be non-empty")
        try:
            return outcome_json(service.handle_prompt(sid, prompt))
        except Exception as exc:  # structured failure, session unchanged
            return failure(sid, exc)

    @app.post("/sessions/{sid}/events")
    def post_event(sid: str, body: dict):
        need(sid)
        try:
            return outcome_json(service.handle_event(sid, body))
        except Exception as exc:
            return failure(sid, exc)

    @app.get("/sessions/{sid}/ui")
    def get_ui(sid: str, panel: str | None = None, representation: str = "list",
               card: str | None = None, collection: str | None = None):
        """The compiled document, or a read-only ad-hoc compile of one
        panel, card, or expanded collection (no session mutation)."""
        need(sid)
        session, _ = store.load(sid)
        if session is None:
            return {"document": None}
        try:
            if panel:
                node = compile_entity_panel(session.schema, session.annotations,
                                            session.data, panel, representation, session.views)
                return {"panel": node.to_json()}
            if card:
                return {"card": compile_card(session.schema, session.annotations,
                                             session.data, card, views=session.views).to_json()}
            if collection:
                return {"collection": compile_collection(
                    session.schema, session.annotations, session.data, collection,
                    session.views).to_json()}
        except TaskmoldError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"document": session.compile().to_json()}

    @app.get("/sessions/{sid}/schema")
    def get_schema(sid: str):
        need(sid)
        session, _ = store.load(sid)
        if session is None:
            return {"schema": None, "annotations": None, "dependencies": []}
        return {
            "schema": session.schema.to_json(),
            "annotations": session.annotations.to_json(),
            "dependencies": [d.to_json() for d in session.dependencies],
        }

    @app.get("/sessions/{sid}/data")
    def get_data(sid: str):
        need(sid)
        session, _ = store.load(sid)
        return {"data": session.data.to_json() if session else None}

    @app.get("/sessions/{sid}/history")
    def get_history(sid: str):
        need(sid)
        _, history = store.load(sid)
        return {"history": history.manifest()}

    @app.post("/sessions/{sid}/restore/{ckpt}")
    def post_restore(sid: str, ckpt: str):
        need(sid)
        try:
            return outcome_json(service.restore_checkpoint(sid, ckpt))
        except UnknownCheckpointError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.websocket("/sessions/{sid}/stream")
    async def stream(ws: WebSocket, sid: str):
        await ws.accept()
        log = service.events(sid)
        cursor = 0
        try:
            while True:
                fresh = await run_in_threadpool(log.after, cursor, 0.2)
                for event in fresh:
                    await ws.send_text(canon_compact(event))
                    cursor = event["seq"] + 1
        except WebSocketDisconnect:
            return

    return app
