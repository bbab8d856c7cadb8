"""HTTP/SSE surface over the session store.

Documents travel as canonical-serialization strings; discussion turns and
pipeline progress stream as server-sent events (one JSON event per
message, `id:` carrying the log sequence number for cursor replay).
"""

from __future__ import annotations

import json
import queue
from typing import Any

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response, StreamingResponse
from pydantic import BaseModel, Field

from ..canvas import parse_document
from ..discussion import discussion_to_json
from ..errors import (
    DocumentParseError,
    ElementNotFoundError,
    GenerationError,
    InvalidDocumentError,
    KindMismatchError,
    PosterPanelError,
    SchemaError,
    SessionNotFoundError,
    StateError,
)
from ..feedback import unit_to_json
from ..gateway import decode_png
from ..personas import ImagePage, MarketingBrief, TextPage, persona_set_to_json
from ..canvas import serialize_document
from .store import SessionStore

import base64


class BriefPageBody(BaseModel):
    text: str | None = None
    image_base64: str | None = None


class BriefBody(BaseModel):
    source_name: str = "brief"
    pages: list[BriefPageBody]


class CreateSessionBody(BaseModel):
    brief: BriefBody
    draft: Any  # canvas wire JSON, as object or string


class ManualPersonaBody(BaseModel):
    name: str
    summary: str
    background: str
    motivation: str
    pain_point: str
    need: str
    quote: str
    rationale: str


class AcceptBody(BaseModel):
    ref: str
    template_id: str | None = None


class ManualEditBody(BaseModel):
    document: Any


class CommentBody(BaseModel):
    comment: str | None = None


_STATUS_FOR = [
    (SessionNotFoundError, 404),
    (ElementNotFoundError, 404),
    (StateError, 409),
    (KindMismatchError, 400),
    (DocumentParseError, 400),
    (InvalidDocumentError, 400),
    (SchemaError, 400),
    (GenerationError, 502),
]


def _status_code(exc: PosterPanelError) -> int:
    for klass, code in _STATUS_FOR:
        if isinstance(exc, klass):
            return code
    return 500


def _document_body(raw: Any):
    text = raw if isinstance(raw, str) else json.dumps(raw)
    return parse_document(text)


def _brief_from_body(body: BriefBody) -> MarketingBrief:
    pages = []
    for page in body.pages:
        if page.text is not None:
            pages.append(TextPage(page.text))
        elif page.image_base64 is not None:
            pages.append(ImagePage(decode_png(base64.b64decode(page.image_base64))))
        else:
            raise InvalidDocumentError("brief page needs text or image_base64")
    return MarketingBrief(pages=tuple(pages), source_name=body.source_name)


def create_app(store: SessionStore) -> FastAPI:
    app = FastAPI(title="posterpanel", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(PosterPanelError)
    async def handle_domain_error(_request: Request, exc: PosterPanelError):
        return JSONResponse(status_code=_status_code(exc), content={"error": str(exc)})

    @app.get("/assets/{digest}")
    def asset(digest: str):
        data = store.gateway.assets.get_bytes(f"asset://{digest.removesuffix('.png')}")
        if data is None:
            return JSONResponse(status_code=404, content={"error": "no such asset"})
        return Response(content=data, media_type="image/png")

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        brief = _brief_from_body(body.brief)
        draft = _document_body(body.draft)
        session_id = store.create_session(brief, draft)
        return {"session_id": session_id}

    @app.post("/sessions/import", status_code=201)
    def import_session(archive: dict):
        return {"session_id": store.import_archive(archive)}

    @app.get("/sessions/{session_id}/status")
    def status(session_id: str):
        s = store.get(session_id)
        return {
            "session_id": session_id,
            "status": s.status,
            "error": s.error,
            "snapshots": len(s.history),
            "last_seq": s.last_seq,
            "feedback_errors": [list(e) for e in s.feedback_errors],
        }

    @app.get("/sessions/{session_id}/personas")
    def personas(session_id: str):
        s = store.get(session_id)
        if s.personas is None:
            raise StateError("personas are not ready yet")
        return persona_set_to_json(s.personas)

    @app.post("/sessions/{session_id}/personas")
    def add_persona(session_id: str, body: ManualPersonaBody):
        store.add_persona(session_id, body.model_dump())
        return persona_set_to_json(store.get(session_id).personas)

    @app.get("/sessions/{session_id}/units")
    def units(session_id: str):
        s = store.get(session_id)
        return {"units": [unit_to_json(u) for u in s.units]}

    @app.get("/sessions/{session_id}/document")
    def document(session_id: str):
        s = store.get(session_id)
        return {
            "snapshot": len(s.history) - 1,
            "document": serialize_document(s.document),
        }

    @app.post("/sessions/{session_id}/accept")
    def accept(session_id: str, body: AcceptBody):
        snapshot = store.accept(session_id, body.ref, template_id=body.template_id)
        return {
            "snapshot": snapshot.index,
            "provenance": snapshot.provenance,
            "document": serialize_document(snapshot.document),
        }

    @app.get("/sessions/{session_id}/theme-options/{ref}")
    def theme_options(session_id: str, ref: str):
        return store.theme_options(session_id, ref)

    @app.post("/sessions/{session_id}/manual-edit")
    def manual_edit(session_id: str, body: ManualEditBody):
        snapshot = store.manual_edit(session_id, _document_body(body.document))
        return {"snapshot": snapshot.index, "document": serialize_document(snapshot.document)}

    @app.post("/sessions/{session_id}/units/{unit_id}/discussion", status_code=201)
    def open_discussion(session_id: str, unit_id: str):
        return discussion_to_json(store.open_unit_discussion(session_id, unit_id))

    @app.post("/sessions/{session_id}/units/{unit_id}/comment")
    def comment(session_id: str, unit_id: str, body: CommentBody):
        return discussion_to_json(store.submit_unit_comment(session_id, unit_id, body.comment))

    @app.post("/sessions/{session_id}/units/{unit_id}/advance")
    def advance(session_id: str, unit_id: str):
        return discussion_to_json(store.advance_discussion(session_id, unit_id))

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str):
        return store.export_archive(session_id)

    @app.get("/sessions/{session_id}/events")
    def events(
        session_id: str,
        cursor: int = Query(default=0, ge=0),
        follow: bool = Query(default=True),
        timeout: float = Query(default=30.0, gt=0),
    ):
        store.get(session_id)

        def stream():
            sub = store.subscribe(session_id) if follow else None
            try:
                last = cursor
                for event in store.events_after(session_id, cursor):
                    last = event.seq
                    yield f"id: {event.seq}\ndata: {json.dumps(event.to_json(), ensure_ascii=False)}\n\n"
                if sub is None:
                    return
                while True:
                    try:
                        event = sub.get(timeout=timeout)
                    except queue.Empty:
                        yield ": keep-alive\n\n"
                        continue
                    if event.seq <= last:
                        continue
                    last = event.seq
                    yield f"id: {event.seq}\ndata: {json.dumps(event.to_json(), ensure_ascii=False)}\n\n"
            finally:
                if sub is not None:
                    store.unsubscribe(session_id, sub)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app
