"""Event-sourced session state.

Every state change is one appended event (fsynced JSONL per session);
folding the log with :func:`apply_event` is the only way state mutates, so
replaying a log after a crash reconstructs the session exactly. Events that
depend on generative output carry that output in their payload, which keeps
replay pure (no gateway calls).
"""

from __future__ import annotations

import json
import os
import queue
import threading
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..canvas import CanvasDocument, parse_document, serialize_document
from ..discussion import (
    CONCLUDED,
    Discussion,
    ask_questions,
    collect_answers,
    conclude,
    detect_conflict,
    discussion_from_json,
    discussion_to_json,
    open_discussion,
    resolve_unit,
    submit_comment,
    turn_to_json,
)
from ..errors import (
    InvalidDocumentError,
    PosterPanelError,
    SessionNotFoundError,
    StateError,
)
from ..feedback import (
    FeedbackItem,
    FeedbackUnit,
    ThemeDescriptor,
    apply_image_feedback,
    apply_text_feedback,
    generate_feedback,
    group_units,
    guardrail_check,
    item_from_json,
    item_to_json,
    unit_from_json,
    unit_to_json,
)
from ..gateway.core import Gateway
from ..personas import (
    BriefExtract,
    ImagePage,
    MarketingBrief,
    PersonaSet,
    TextPage,
    add_manual_persona,
    build_personas,
    derive_dimensions,
    extract_brief,
    persona_set_from_json,
    persona_set_to_json,
)
from ..themes import TemplateIndex, apply_theme, ingest_templates, query_templates
from .. import discussion as discussion_mod

EVENT_KINDS = (
    "created", "personas_ready", "feedback_ready", "turn",
    "accepted", "manual_edit", "theme_applied", "failed",
)

CONCLUSION_REF_PREFIX = "conclusion:"


@dataclass(frozen=True)
class EventRecord:
    seq: int
    session_id: str
    kind: str
    payload: dict

    def to_json(self) -> dict:
        return {"seq": self.seq, "session_id": self.session_id,
                "kind": self.kind, "payload": self.payload}

    @classmethod
    def from_json(cls, raw: dict) -> "EventRecord":
        return cls(seq=raw["seq"], session_id=raw["session_id"],
                   kind=raw["kind"], payload=raw["payload"])


@dataclass(frozen=True)
class Snapshot:
    index: int
    provenance: dict
    document: CanvasDocument


@dataclass
class Session:
    session_id: str
    brief: MarketingBrief | None = None
    extract: BriefExtract | None = None
    personas: PersonaSet | None = None
    document: CanvasDocument | None = None
    history: list[Snapshot] = field(default_factory=list)
    units: list[FeedbackUnit] = field(default_factory=list)
    reports: dict[str, "discussion_mod.ConflictReport"] = field(default_factory=dict)
    discussions: dict[str, Discussion] = field(default_factory=dict)
    feedback_errors: list[tuple[str, str]] = field(default_factory=list)
    accepted_refs: dict[str, int] = field(default_factory=dict)
    status: str = "created"
    error: str | None = None
    last_seq: int = 0

    def unit(self, unit_id: str) -> FeedbackUnit:
        for u in self.units:
            if u.unit_id == unit_id:
                return u
        raise InvalidDocumentError(f"no unit {unit_id!r}")

    def find_item(self, item_id: str) -> tuple[FeedbackUnit, FeedbackItem]:
        for u in self.units:
            for i in u.items:
                if i.item_id == item_id:
                    return u, i
        raise InvalidDocumentError(f"no feedback item {item_id!r}")


def _brief_to_json(brief: MarketingBrief, assets) -> dict:
    pages = []
    for page in brief.pages:
        if isinstance(page, TextPage):
            pages.append({"text": page.text})
        else:
            pages.append({"image_ref": assets.put_image(page.image)})
    return {"source_name": brief.source_name, "pages": pages}


def _brief_from_json(raw: dict, assets) -> MarketingBrief:
    pages = []
    for page in raw["pages"]:
        if "text" in page:
            pages.append(TextPage(page["text"]))
        else:
            pages.append(ImagePage(assets.open_image(page["image_ref"])))
    return MarketingBrief(pages=tuple(pages), source_name=raw["source_name"])


def _extract_to_json(extract: BriefExtract) -> dict:
    return {"goal": extract.goal, "audience_summary": extract.audience_summary,
            "constraints": list(extract.constraints), "raw_text": extract.raw_text}


def _extract_from_json(raw: dict) -> BriefExtract:
    return BriefExtract(goal=raw["goal"], audience_summary=raw["audience_summary"],
                        constraints=tuple(raw["constraints"]), raw_text=raw["raw_text"])


def apply_event(session: Session, event: EventRecord, assets) -> None:
    """Fold one event into session state (the only state mutation path)."""
    p = event.payload
    if event.kind == "created":
        session.brief = _brief_from_json(p["brief"], assets)
        doc = parse_document(p["document"])
        session.document = doc
        session.history = [Snapshot(0, {"kind": "draft"}, doc)]
        session.status = "created"
    elif event.kind == "personas_ready":
        if p.get("extract") is not None:
            session.extract = _extract_from_json(p["extract"])
        session.personas = persona_set_from_json(p["personas"])
        if session.status == "created":
            session.status = "personas_ready"
    elif event.kind == "feedback_ready":
        session.units = [unit_from_json(u) for u in p["units"]]
        session.reports = {
            uid: discussion_mod.report_from_json(r) for uid, r in p["reports"].items()
        }
        session.feedback_errors = [tuple(e) for e in p["errors"]]
        session.status = "feedback_ready"
    elif event.kind == "turn":
        d = discussion_from_json(p["discussion"])
        session.discussions[d.unit_id] = d
        if d.state == CONCLUDED and d.conclusion is not None:
            session.units = [
                resolve_unit(u, d.conclusion) if u.unit_id == d.unit_id else u
                for u in session.units
            ]
    elif event.kind in ("accepted", "theme_applied"):
        doc = parse_document(p["document"])
        session.document = doc
        session.history.append(Snapshot(len(session.history), p["provenance"], doc))
        session.accepted_refs[p["ref"]] = len(session.history) - 1
        uid = p.get("unit_id")
        if uid:
            session.units = [
                replace(u, status="resolved") if u.unit_id == uid else u
                for u in session.units
            ]
    elif event.kind == "manual_edit":
        doc = parse_document(p["document"])
        session.document = doc
        session.history.append(Snapshot(len(session.history), {"kind": "manual_edit"}, doc))
    elif event.kind == "failed":
        session.status = "failed"
        session.error = p["message"]
    else:
        raise InvalidDocumentError(f"unknown event kind {event.kind!r}")
    session.last_seq = event.seq


class SessionStore:
    """Owns session state, the per-session event logs, and the pipeline."""

    def __init__(
        self,
        data_dir: str | Path,
        gateway: Gateway,
        k: int = 12,
        max_rounds_discussion: int = 5,
        max_rounds_overlap: int = 3,
        template_corpus: str | Path | None = None,
    ):
        self.data_dir = Path(data_dir)
        self.sessions_dir = self.data_dir / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.gateway = gateway
        self.k = k
        self.max_rounds_discussion = max_rounds_discussion
        self.max_rounds_overlap = max_rounds_overlap
        self.template_index: TemplateIndex | None = None
        if template_corpus is not None:
            self.template_index = ingest_templates(gateway, template_corpus).index
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._subscribers: dict[str, list[queue.Queue]] = {}
        self._global_lock = threading.Lock()
        self._reload()

    # -- persistence ------------------------------------------------------

    def _log_path(self, session_id: str) -> Path:
        return self.sessions_dir / session_id / "events.jsonl"

    def _reload(self) -> None:
        for log in sorted(self.sessions_dir.glob("*/events.jsonl")):
            session_id = log.parent.name
            session = Session(session_id=session_id)
            for event in self._read_log(log):
                apply_event(session, event, self.gateway.assets)
            self._sessions[session_id] = session
            self._locks[session_id] = threading.Lock()

    @staticmethod
    def _read_log(path: Path) -> list[EventRecord]:
        events = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            try:
                events.append(EventRecord.from_json(json.loads(line)))
            except json.JSONDecodeError:
                break  # torn tail from a crash mid-write; ignore it
        return events

    def _append(self, session: Session, kind: str, payload: dict) -> EventRecord:
        event = EventRecord(
            seq=session.last_seq + 1, session_id=session.session_id,
            kind=kind, payload=payload,
        )
        path = self._log_path(session.session_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event.to_json(), ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        apply_event(session, event, self.gateway.assets)
        self._notify(session.session_id, event)
        return event

    # -- streaming --------------------------------------------------------

    def subscribe(self, session_id: str) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._global_lock:
            self._subscribers.setdefault(session_id, []).append(q)
        return q

    def unsubscribe(self, session_id: str, q: queue.Queue) -> None:
        with self._global_lock:
            subs = self._subscribers.get(session_id, [])
            if q in subs:
                subs.remove(q)

    def _notify(self, session_id: str, event: EventRecord) -> None:
        with self._global_lock:
            subs = list(self._subscribers.get(session_id, []))
        for q in subs:
            q.put(event)

    def events_after(self, session_id: str, cursor: int) -> list[EventRecord]:
        self.get(session_id)
        log = self._log_path(session_id)
        if not log.exists():
            return []
        return [e for e in self._read_log(log) if e.seq > cursor]

    # -- session access ---------------------------------------------------

    def get(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise SessionNotFoundError(session_id)
        return session

    def lock(self, session_id: str) -> threading.Lock:
        lock = self._locks.get(session_id)
        if lock is None:
            raise SessionNotFoundError(session_id)
        return lock

    def list_ids(self) -> list[str]:
        return sorted(self._sessions)

    # -- commands ---------------------------------------------------------

    def create_session(
        self, brief: MarketingBrief, draft: CanvasDocument, run_async: bool = True
    ) -> str:
        session_id = uuid.uuid4().hex[:12]
        session = Session(session_id=session_id)
        with self._global_lock:
            self._sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
        with self._locks[session_id]:
            self._append(session, "created", {
                "brief": _brief_to_json(brief, self.gateway.assets),
                "document": serialize_document(draft),
            })
        if run_async:
            thread = threading.Thread(
                target=self._run_pipeline, args=(session_id,), daemon=True)
            thread.start()
        else:
            self._run_pipeline(session_id)
        return session_id

    def _run_pipeline(self, session_id: str) -> None:
        session = self.get(session_id)
        try:
            extract = extract_brief(self.gateway, session.brief)
            dims = derive_dimensions(self.gateway, extract)
            personas = build_personas(self.gateway, extract, dims)
            with self.lock(session_id):
                self._append(session, "personas_ready", {
                    "extract": _extract_to_json(extract),
                    "personas": persona_set_to_json(personas),
                })
            batch = generate_feedback(self.gateway, session.document, personas, extract)
            units = group_units(batch.items, session.document)
            reports = {}
            resolved_units = []
            for unit in units:
                report = detect_conflict(self.gateway, unit)
                if report is None:
                    resolved_units.append(
                        replace(unit, status="resolved", conflict_summary=None))
                else:
                    reports[unit.unit_id] = report
                    resolved_units.append(replace(unit, conflict_summary=report.summary))
            with self.lock(session_id):
                self._append(session, "feedback_ready", {
                    "units": [unit_to_json(u) for u in resolved_units],
                    "reports": {uid: discussion_mod.report_to_json(r)
                                for uid, r in reports.items()},
                    "errors": [list(e) for e in batch.errors],
                })
        except PosterPanelError as exc:
            with self.lock(session_id):
                self._append(session, "failed", {
                    "stage": session.status, "message": str(exc)})

    def add_persona(self, session_id: str, details: dict[str, str]) -> None:
        session = self.get(session_id)
        with self.lock(session_id):
            if session.personas is None:
                raise StateError("personas are not ready yet")
            updated = add_manual_persona(self.gateway, session.personas, details)
            self._append(session, "personas_ready", {
                "extract": None,
                "personas": persona_set_to_json(updated),
            })

    def _resolve_ref(self, session: Session, ref: str) -> tuple[FeedbackUnit, str, str | ThemeDescriptor]:
        """(unit, kind, preview) for an item or conclusion reference."""
        if ref.startswith(CONCLUSION_REF_PREFIX):
            unit = session.unit(ref[len(CONCLUSION_REF_PREFIX):])
            if unit.conclusion is None:
                raise StateError(f"unit {unit.unit_id} has no conclusion to accept")
            return unit, unit.kind, unit.conclusion.preview
        unit, item = session.find_item(ref)
        return unit, item.kind, item.preview

    def accept(self, session_id: str, ref: str, template_id: str | None = None) -> Snapshot:
        session = self.get(session_id)
        with self.lock(session_id):
            if ref in session.accepted_refs:  # double-click safety
                return session.history[session.accepted_refs[ref]]
            unit, kind, preview = self._resolve_ref(session, ref)
            probe = FeedbackItem(
                item_id="probe", persona_id="probe", target=unit.target, kind=kind,
                opinion="acceptance", preview=preview, rationale="acceptance")
            violation = guardrail_check(probe, session.document)
            if violation is not None:
                raise InvalidDocumentError(
                    f"ref {ref!r} is not applicable: {violation.rule}")
            if kind == "text":
                doc = apply_text_feedback(session.document, replace(probe, item_id=ref))
                event_kind = "accepted"
                provenance = {"kind": "accepted", "ref": ref, "target": unit.target}
            elif kind == "image":
                doc = apply_image_feedback(
                    self.gateway, session.document, replace(probe, item_id=ref))
                event_kind = "accepted"
                provenance = {"kind": "accepted", "ref": ref, "target": unit.target}
            else:
                if self.template_index is None:
                    raise StateError("no template corpus configured for theme acceptance")
                if template_id is None:
                    raise InvalidDocumentError("theme acceptance needs a template_id")
                template = self.template_index.get(template_id).document
                doc = apply_theme(self.gateway, session.document, template,
                                  max_rounds=self.max_rounds_overlap)
                event_kind = "theme_applied"
                provenance = {"kind": "theme_applied", "ref": ref,
                              "template_id": template_id}
            event = self._append(session, event_kind, {
                "ref": ref, "document": serialize_document(doc),
                "provenance": provenance, "unit_id": unit.unit_id,
            })
            return session.history[-1]

    def theme_options(self, session_id: str, ref: str) -> dict:
        session = self.get(session_id)
        unit, kind, preview = self._resolve_ref(session, ref)
        if kind != "theme":
            raise InvalidDocumentError(f"ref {ref!r} is not theme feedback")
        if self.template_index is None:
            raise StateError("no template corpus configured")
        ranked = query_templates(self.gateway, self.template_index, preview, k=self.k)
        previews = {t.template_id: t.preview_image for t in self.template_index.entries}
        return {
            "query": {"tone": preview.tone, "color": preview.color},
            "ranked": [
                {"template_id": tid, "similarity": sim, "preview": previews.get(tid, "")}
                for tid, sim in ranked.ranked
            ],
        }

    def manual_edit(self, session_id: str, document: CanvasDocument) -> Snapshot:
        session = self.get(session_id)
        with self.lock(session_id):
            self._append(session, "manual_edit", {
                "document": serialize_document(document)})
            return session.history[-1]

    # -- discussion -------------------------------------------------------

    def open_unit_discussion(self, session_id: str, unit_id: str) -> Discussion:
        session = self.get(session_id)
        with self.lock(session_id):
            unit = session.unit(unit_id)
            report = session.reports.get(unit_id)
            if report is None:
                raise StateError(f"unit {unit_id} has no detected conflict to discuss")
            if unit_id in session.discussions:
                raise StateError(f"unit {unit_id} already has a discussion")
            d = open_discussion(unit, report, max_rounds=self.max_rounds_discussion)
            self._append(session, "turn", {
                "discussion": discussion_to_json(d),
                "turn": turn_to_json(d.transcript[-1]),
            })
            return session.discussions[unit_id]

    def submit_unit_comment(self, session_id: str, unit_id: str, comment: str | None) -> Discussion:
        session = self.get(session_id)
        with self.lock(session_id):
            d = self._discussion(session, unit_id)
            submit_comment(d, comment)
            new_turn = d.transcript[-1] if comment and comment.strip() else None
            self._append(session, "turn", {
                "discussion": discussion_to_json(d),
                "turn": turn_to_json(new_turn) if new_turn else None,
            })
            return session.discussions[unit_id]

    def advance_discussion(self, session_id: str, unit_id: str) -> Discussion:
        """Drive questioning -> answering -> concluding -> concluded, one
        logged event per completed turn."""
        session = self.get(session_id)
        with self.lock(session_id):
            d = self._discussion(session, unit_id)
            unit = session.unit(unit_id)
            if d.state not in ("questioning", "answering", "concluding"):
                raise StateError(f"nothing to advance, discussion is {d.state!r}")

            def emit_stage(stage_fn):
                before = len(d.transcript)
                stage_fn()
                for turn in d.transcript[before:]:
                    self._append(session, "turn", {
                        "discussion": discussion_to_json(d),
                        "turn": turn_to_json(turn),
                    })

            if d.state == "questioning":
                emit_stage(lambda: ask_questions(
                    self.gateway, d, unit, session.personas, session.extract))
            if d.state == "answering":
                emit_stage(lambda: collect_answers(
                    self.gateway, d, session.personas, session.extract))
            if d.state == "concluding":
                emit_stage(lambda: conclude(
                    self.gateway, d, unit, session.extract, session.document))
            return session.discussions[unit_id]

    def _discussion(self, session: Session, unit_id: str) -> Discussion:
        d = session.discussions.get(unit_id)
        if d is None:
            raise StateError(f"unit {unit_id} has no open discussion")
        return d

    # -- export / import --------------------------------------------------

    def export_archive(self, session_id: str) -> dict:
        session = self.get(session_id)
        events = self.events_after(session_id, 0)
        return {
            "session_id": session_id,
            "status": session.status,
            "events": [e.to_json() for e in events],
            "rendered": {
                "document": serialize_document(session.document) if session.document else None,
                "personas": persona_set_to_json(session.personas) if session.personas else None,
                "units": [unit_to_json(u) for u in session.units],
                "history": [
                    {"index": s.index, "provenance": s.provenance,
                     "document": serialize_document(s.document)}
                    for s in session.history
                ],
                "transcripts": {
                    uid: [turn_to_json(t) for t in d.transcript]
                    for uid, d in sorted(session.discussions.items())
                },
            },
        }

    def import_archive(self, archive: dict) -> str:
        session_id = archive["session_id"]
        if session_id in self._sessions:
            raise StateError(f"session {session_id} already exists")
        log = self._log_path(session_id)
        log.parent.mkdir(parents=True, exist_ok=True)
        with open(log, "w", encoding="utf-8") as fh:
            for raw in archive["events"]:
                fh.write(json.dumps(raw, ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        session = Session(session_id=session_id)
        for raw in archive["events"]:
            apply_event(session, EventRecord.from_json(raw), self.gateway.assets)
        with self._global_lock:
            self._sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
        return session_id
