"""HTTP chat service over the dialogue runtime.

Endpoints (JSON over HTTP, UTF-8):

    POST /sessions                  -> 201 {"sessionId", "greeting"}
    POST /sessions/{id}/messages    -> {"replies": [..], "status", "decision"}
    GET  /sessions/{id}             -> session summary
    GET  /agent                     -> decision list and metadata

Unknown session: 404. Closed session: 409. Empty text: 422.
"""

from __future__ import annotations

import threading
import time
import uuid
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .pipeline import CompiledAgent
from .runtime import DialogueEngine, Session

DEFAULT_IDLE_TTL = 30 * 60  # seconds


class MessageIn(BaseModel):
    text: str


class _SessionBox:
    def __init__(self, session: Session):
        self.session = session
        self.lock = threading.Lock()
        self.last_access = time.monotonic()


def create_app(
    compiled: CompiledAgent,
    ui_dir: Optional[str] = None,
    idle_ttl: float = DEFAULT_IDLE_TTL,
    clock=time.monotonic,
) -> FastAPI:
    engine = DialogueEngine(compiled)
    app = FastAPI(title="dmnbot", version=compiled.agent.metadata.get("version", ""))
    boxes: dict[str, _SessionBox] = {}
    registry_lock = threading.Lock()

    def _get_box(session_id: str) -> _SessionBox:
        with registry_lock:
            box = boxes.get(session_id)
            if box is not None and clock() - box.last_access > idle_ttl:
                del boxes[session_id]
                box = None
            if box is None:
                raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
            box.last_access = clock()
            return box

    @app.post("/sessions", status_code=201)
    def create_session():
        session_id = uuid.uuid4().hex
        session = engine.create_session(session_id)
        with registry_lock:
            boxes[session_id] = _SessionBox(session)
        return {"sessionId": session_id, "greeting": engine.greeting()}

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, message: MessageIn):
        if not message.text.strip():
            raise HTTPException(status_code=422, detail="text must be non-empty")
        box = _get_box(session_id)
        with box.lock:
            if box.session.status == "closed":
                raise HTTPException(status_code=409, detail="session is closed")
            reply = engine.step(box.session, message.text)
        return {
            "replies": [reply.text],
            "status": reply.status,
            "decision": reply.decision.render() if reply.decision is not None else None,
        }

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        box = _get_box(session_id)
        with box.lock:
            session = box.session
            return {
                "sessionId": session_id,
                "status": session.status,
                "transcript": [{"speaker": s, "text": t} for s, t in session.transcript],
                "collected": {k: v.render() for k, v in session.collected.items()},
                "decision": session.decision_value.render() if session.decision_value else None,
            }

    @app.get("/agent")
    def get_agent():
        return {
            "decisions": [
                {
                    "slug": unit.slug,
                    "root": unit.root,
                    "label": unit.label,
                    "outputLabel": unit.output_label,
                }
                for unit in compiled.units.values()
            ],
            "metadata": compiled.agent.metadata,
        }

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
