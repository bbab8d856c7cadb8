"""Moderated panel discussion over one feedback unit.

State machine: awaiting_comment -> questioning -> answering -> concluding
-> concluded, with concluded -> questioning when the user iterates with a
follow-up comment. The transcript is append-only; rounds are bounded.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field, replace

from . import prompts
from .canvas import CanvasDocument
from .errors import GenerationError, InvalidDocumentError, PosterPanelError, SchemaError, StateError
from .feedback import (
    FeedbackItem,
    FeedbackUnit,
    ThemeDescriptor,
    guardrail_check,
    item_to_json,
    preview_from_json,
    preview_to_json,
)
from .gateway.core import Gateway
from .personas import BriefExtract, PersonaSet

AWAITING_COMMENT = "awaiting_comment"
QUESTIONING = "questioning"
ANSWERING = "answering"
CONCLUDING = "concluding"
CONCLUDED = "concluded"

STATES = (AWAITING_COMMENT, QUESTIONING, ANSWERING, CONCLUDING, CONCLUDED)

DEFAULT_MAX_ROUNDS = 5


@dataclass(frozen=True)
class ConflictReport:
    unit_id: str
    summary: str
    conflicting_item_ids: tuple[str, ...]

    def __post_init__(self):
        if not self.summary:
            raise InvalidDocumentError("conflict summary must be non-empty")
        if len(self.conflicting_item_ids) < 2:
            raise InvalidDocumentError("a conflict involves at least two items")


@dataclass(frozen=True)
class Turn:
    speaker: str  # "moderator" | "user" | "persona"
    text: str
    round: int
    role_tag: str  # comment_request | user_comment | question | answer | conclusion_statement
    persona_id: str | None = None  # speaking persona for answers
    addressee: str | None = None  # questioned persona on moderator questions

    def __post_init__(self):
        if not self.text:
            raise InvalidDocumentError("turn text must be non-empty")
        if self.round < 1:
            raise InvalidDocumentError("turn round must be >= 1")


@dataclass(frozen=True)
class Conclusion:
    target: str
    summary: str
    preview: str | ThemeDescriptor
    omitted_personas: tuple[str, ...] = ()


@dataclass
class Discussion:
    """Single-writer conversation state; snapshots are cheap to export."""

    discussion_id: str
    unit_id: str
    report: ConflictReport
    transcript: list[Turn] = field(default_factory=list)
    state: str = AWAITING_COMMENT
    rounds_used: int = 1
    max_rounds: int = DEFAULT_MAX_ROUNDS
    conclusion: Conclusion | None = None
    user_comment: str | None = None
    pending_questions: dict[str, str] = field(default_factory=dict)
    omitted_personas: list[str] = field(default_factory=list)

    def append(self, turn: Turn) -> None:
        if self.transcript and turn.round < self.transcript[-1].round:
            raise InvalidDocumentError("turn rounds must be monotone")
        self.transcript.append(turn)

    def require_state(self, *allowed: str) -> None:
        if self.state not in allowed:
            raise StateError(
                f"operation requires state in {allowed}, discussion is {self.state!r}"
            )


def _previews_identical(items: tuple[FeedbackItem, ...]) -> bool:
    first = preview_to_json(items[0].preview)
    return all(preview_to_json(i.preview) == first for i in items[1:])


def detect_conflict(gw: Gateway, unit: FeedbackUnit) -> ConflictReport | None:
    """Conflict report for a unit, or None when there is nothing to reconcile.

    Fallback mode is deliberately over-sensitive: any two non-identical
    previews count as a conflict.
    """
    if not unit.items:
        raise InvalidDocumentError("unit has no items")
    if len(unit.items) < 2:
        return None
    if gw.mode == "fallback":
        if _previews_identical(unit.items):
            return None
        label = "the poster theme" if unit.kind == "theme" else f"component {unit.target}"
        return ConflictReport(
            unit_id=unit.unit_id,
            summary=f"Personas disagree on how to change {label}.",
            conflicting_item_ids=tuple(i.item_id for i in unit.items),
        )
    unit_json = json.dumps([item_to_json(i) for i in unit.items], ensure_ascii=False)
    resp = gw.complete_structured(prompts.conflict_request(unit_json))
    if not resp.payload.conflict:
        return None
    known = {i.item_id for i in unit.items}
    bogus = [i for i in resp.payload.item_ids if i not in known]
    if bogus:
        raise SchemaError(f"conflict references unknown item ids {bogus}")
    return ConflictReport(
        unit_id=unit.unit_id,
        summary=resp.payload.summary,
        conflicting_item_ids=tuple(resp.payload.item_ids),
    )


def open_discussion(
    unit: FeedbackUnit,
    report: ConflictReport,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    discussion_id: str | None = None,
) -> Discussion:
    if report.unit_id != unit.unit_id:
        raise InvalidDocumentError(
            f"report is for unit {report.unit_id!r}, not {unit.unit_id!r}"
        )
    known = {i.item_id for i in unit.items}
    if not set(report.conflicting_item_ids) <= known:
        raise InvalidDocumentError("report references items outside the unit")
    d = Discussion(
        discussion_id=discussion_id or f"d-{uuid.uuid4().hex[:10]}",
        unit_id=unit.unit_id,
        report=report,
        max_rounds=max_rounds,
    )
    d.append(Turn(
        speaker="moderator",
        text=f"Before the panel discusses, do you have any thoughts on this conflict? "
             f"{report.summary}",
        round=1,
        role_tag="comment_request",
    ))
    return d


def submit_comment(d: Discussion, comment: str | None) -> Discussion:
    """Optional user comment; from concluded this opens the next round."""
    d.require_state(AWAITING_COMMENT, CONCLUDED)
    if d.state == CONCLUDED:
        if d.rounds_used >= d.max_rounds:
            raise StateError(
                f"discussion exhausted its {d.max_rounds} rounds; no further iteration"
            )
        d.rounds_used += 1
    if comment is not None and comment.strip():
        d.user_comment = comment.strip()
        d.append(Turn(
            speaker="user", text=comment.strip(), round=d.rounds_used,
            role_tag="user_comment",
        ))
    d.state = QUESTIONING
    return d


def _conflicting_personas(d: Discussion, unit: FeedbackUnit, pset: PersonaSet) -> list[str]:
    involved = {
        i.persona_id for i in unit.items if i.item_id in d.report.conflicting_item_ids
    }
    return [p.id for p in pset.personas if p.id in involved]


def ask_questions(
    gw: Gateway, d: Discussion, unit: FeedbackUnit, pset: PersonaSet, extract: BriefExtract
) -> Discussion:
    """One moderator question per conflicting persona; transactional on failure."""
    d.require_state(QUESTIONING)
    persona_ids = _conflicting_personas(d, unit, pset)
    if not persona_ids:
        raise InvalidDocumentError("no conflicting personas to question")
    questions: list[tuple[str, str]] = []
    for pid in persona_ids:  # state mutates only after every question generates
        persona = pset.by_id(pid)
        resp = gw.complete_structured(
            prompts.question_request(extract, persona, d.report.summary, d.user_comment)
        )
        questions.append((pid, resp.payload.question))
    d.pending_questions = {}
    for pid, question in questions:
        d.append(Turn(
            speaker="moderator", text=question, round=d.rounds_used,
            role_tag="question", addressee=pid,
        ))
        d.pending_questions[pid] = question
    d.state = ANSWERING
    return d


def collect_answers(gw: Gateway, d: Discussion, pset: PersonaSet, extract: BriefExtract) -> Discussion:
    """Answers fan out in parallel and join in persona order; a failed persona
    is marked omitted rather than sinking the discussion."""
    d.require_state(ANSWERING)
    persona_ids = list(d.pending_questions)
    requests = [
        prompts.answer_request(extract, pset.by_id(pid), d.pending_questions[pid])
        for pid in persona_ids
    ]
    results = gw.map_structured(requests, collect_errors=True)
    answered = []
    for pid, result in zip(persona_ids, results):
        if isinstance(result, PosterPanelError):
            if pid not in d.omitted_personas:
                d.omitted_personas.append(pid)
            continue
        answered.append((pid, result.payload.answer))
    if not answered:
        raise GenerationError("discuss.answer", "every persona failed to answer")
    for pid, answer in answered:
        d.append(Turn(
            speaker="persona", text=answer, round=d.rounds_used,
            role_tag="answer", persona_id=pid,
        ))
    d.state = CONCLUDING
    return d


def conclude(
    gw: Gateway,
    d: Discussion,
    unit: FeedbackUnit,
    extract: BriefExtract,
    doc: CanvasDocument,
) -> Discussion:
    """Moderator synthesis with the same shape (and guardrails) as feedback."""
    d.require_state(CONCLUDING)
    unit_json = json.dumps([item_to_json(i) for i in unit.items], ensure_ascii=False)
    transcript_json = json.dumps(
        [turn_to_json(t) for t in d.transcript], ensure_ascii=False
    )
    resp = gw.complete_structured(
        prompts.conclusion_request(extract, unit_json, transcript_json, d.user_comment)
    )
    payload = resp.payload
    if payload.target != unit.target:
        raise SchemaError(
            f"conclusion targets {payload.target!r}, unit is {unit.target!r}"
        )
    preview = preview_from_json(
        payload.preview if isinstance(payload.preview, str)
        else {"tone": payload.preview.tone, "color": payload.preview.color}
    )
    probe = FeedbackItem(
        item_id="conclusion", persona_id="moderator", target=payload.target,
        kind=unit.kind, opinion=payload.summary, preview=preview,
        rationale=payload.summary,
    )
    violation = guardrail_check(probe, doc)
    if violation is not None:
        raise SchemaError(f"conclusion fails guardrail {violation.rule}: {violation.detail}")
    omitted = list(dict.fromkeys([*payload.omitted_personas, *d.omitted_personas]))
    d.conclusion = Conclusion(
        target=payload.target,
        summary=payload.summary,
        preview=preview,
        omitted_personas=tuple(omitted),
    )
    d.append(Turn(
        speaker="moderator", text=payload.summary, round=d.rounds_used,
        role_tag="conclusion_statement",
    ))
    d.state = CONCLUDED
    return d


def resolve_unit(unit: FeedbackUnit, conclusion: Conclusion) -> FeedbackUnit:
    """Unit as updated by a concluded discussion (session layer owns storage)."""
    return replace(unit, status="resolved", conclusion=conclusion, conflict_summary=None)


def turn_to_json(t: Turn) -> dict:
    return {
        "speaker": t.speaker,
        "persona_id": t.persona_id,
        "addressee": t.addressee,
        "text": t.text,
        "round": t.round,
        "role_tag": t.role_tag,
    }


def turn_from_json(raw: dict) -> Turn:
    return Turn(
        speaker=raw["speaker"],
        text=raw["text"],
        round=raw["round"],
        role_tag=raw["role_tag"],
        persona_id=raw.get("persona_id"),
        addressee=raw.get("addressee"),
    )


def conclusion_to_json(c: Conclusion) -> dict:
    return {
        "target": c.target,
        "summary": c.summary,
        "preview": preview_to_json(c.preview),
        "omitted_personas": list(c.omitted_personas),
    }


def conclusion_from_json(raw: dict) -> Conclusion:
    return Conclusion(
        target=raw["target"],
        summary=raw["summary"],
        preview=preview_from_json(raw["preview"]),
        omitted_personas=tuple(raw.get("omitted_personas", ())),
    )


def report_to_json(r: ConflictReport) -> dict:
    return {
        "unit_id": r.unit_id,
        "summary": r.summary,
        "conflicting_item_ids": list(r.conflicting_item_ids),
    }


def report_from_json(raw: dict) -> ConflictReport:
    return ConflictReport(
        unit_id=raw["unit_id"],
        summary=raw["summary"],
        conflicting_item_ids=tuple(raw["conflicting_item_ids"]),
    )


def discussion_to_json(d: Discussion) -> dict:
    return {
        "discussion_id": d.discussion_id,
        "unit_id": d.unit_id,
        "report": report_to_json(d.report),
        "transcript": [turn_to_json(t) for t in d.transcript],
        "state": d.state,
        "rounds_used": d.rounds_used,
        "max_rounds": d.max_rounds,
        "conclusion": conclusion_to_json(d.conclusion) if d.conclusion else None,
        "user_comment": d.user_comment,
        "pending_questions": dict(d.pending_questions),
        "omitted_personas": list(d.omitted_personas),
    }


def discussion_from_json(raw: dict) -> Discussion:
    d = Discussion(
        discussion_id=raw["discussion_id"],
        unit_id=raw["unit_id"],
        report=report_from_json(raw["report"]),
        state=raw["state"],
        rounds_used=raw["rounds_used"],
        max_rounds=raw.get("max_rounds", DEFAULT_MAX_ROUNDS),
        conclusion=conclusion_from_json(raw["conclusion"]) if raw.get("conclusion") else None,
        user_comment=raw.get("user_comment"),
        pending_questions=dict(raw.get("pending_questions", {})),
        omitted_personas=list(raw.get("omitted_personas", [])),
    )
    for t in raw["transcript"]:
        d.append(turn_from_json(t))
    return d
