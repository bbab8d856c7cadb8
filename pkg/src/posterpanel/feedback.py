"""Per-persona structured feedback on poster components, and its application.

Each persona may suggest at most one change per text element, at most one
per image element, and gives exactly one poster-level theme judgment. A
structural guardrail pass rejects items that do not line up with the
document before anything reaches the user; semantic alignment with the
brief lives in the prompts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

from . import prompts
from .canvas import CanvasDocument, find_element, rasterize, serialize_document, set_image_source, set_text
from .errors import ElementNotFoundError, KindMismatchError, PosterPanelError
from .gateway.core import Gateway
from .gateway.schemas import THEME_TARGET, ThemePreviewPayload
from .personas import BriefExtract, PersonaSet

if TYPE_CHECKING:
    from .discussion import Conclusion


@dataclass(frozen=True)
class ThemeDescriptor:
    tone: str
    color: str


@dataclass(frozen=True)
class FeedbackItem:
    item_id: str
    persona_id: str
    target: str  # element id, or THEME_TARGET for theme feedback
    kind: str  # "text" | "image" | "theme"
    opinion: str
    preview: str | ThemeDescriptor
    rationale: str


@dataclass(frozen=True)
class Violation:
    rule: str
    detail: str = ""


@dataclass(frozen=True)
class FeedbackUnit:
    """All feedback aimed at one component (or the theme)."""

    unit_id: str
    target: str
    kind: str
    items: tuple[FeedbackItem, ...]
    status: str = "conflict"  # "conflict" | "resolved"
    conflict_summary: str | None = None
    conclusion: "Conclusion | None" = None


@dataclass(frozen=True)
class FeedbackBatch:
    items: tuple[FeedbackItem, ...]
    errors: tuple[tuple[str, str], ...] = ()  # (persona_id, message)


def guardrail_check(item: FeedbackItem, doc: CanvasDocument) -> Violation | None:
    """Structural guardrails; None means the item is applicable as-is."""
    if not item.opinion.strip():
        return Violation("empty-opinion")
    if not item.rationale.strip():
        return Violation("empty-rationale")
    if item.kind == "theme":
        if item.target != THEME_TARGET:
            return Violation("bad-theme-target", item.target)
        if not isinstance(item.preview, ThemeDescriptor):
            return Violation("empty-preview-field", "theme preview needs tone and color")
        if not item.preview.tone.strip() or not item.preview.color.strip():
            return Violation("empty-preview-field", "tone and color must be non-empty")
        return None
    if item.kind not in ("text", "image"):
        return Violation("unknown-kind", item.kind)
    if not isinstance(item.preview, str) or not item.preview.strip():
        return Violation("empty-preview-field")
    try:
        element = find_element(doc, item.target)
    except ElementNotFoundError:
        return Violation("unknown-target", item.target)
    if element.kind != item.kind:
        return Violation("kind-mismatch", f"{item.target} is {element.kind}")
    return None


def _payload_preview(payload) -> str | ThemeDescriptor:
    if isinstance(payload, ThemePreviewPayload):
        return ThemeDescriptor(tone=payload.tone, color=payload.color)
    return payload


def generate_feedback(
    gw: Gateway, doc: CanvasDocument, pset: PersonaSet, extract: BriefExtract
) -> FeedbackBatch:
    """One gateway call per persona; failures surface per persona, not globally."""
    doc_json = serialize_document(doc)
    pixels = rasterize(doc, assets=gw.assets)
    requests = [
        prompts.feedback_request(extract, persona, doc_json, pixels)
        for persona in pset.personas
    ]
    results = gw.map_structured(requests, collect_errors=True)

    items: list[FeedbackItem] = []
    errors: list[tuple[str, str]] = []
    counter = 0
    for persona, result in zip(pset.personas, results):
        if isinstance(result, PosterPanelError):
            errors.append((persona.id, str(result)))
            continue
        seen_targets: set[tuple[str, str]] = set()
        theme_count = 0
        for raw in result.payload.items:
            key = (raw.kind, raw.target)
            if key in seen_targets:
                errors.append((persona.id, f"duplicate suggestion for {raw.target} dropped"))
                continue
            if raw.kind == "theme":
                if theme_count:
                    errors.append((persona.id, "extra theme suggestion dropped"))
                    continue
                theme_count += 1
            counter += 1
            item = FeedbackItem(
                item_id=f"f{counter}",
                persona_id=persona.id,
                target=raw.target,
                kind=raw.kind,
                opinion=raw.opinion,
                preview=_payload_preview(raw.preview),
                rationale=raw.rationale,
            )
            violation = guardrail_check(item, doc)
            if violation is not None:
                counter -= 1
                errors.append((persona.id, f"guardrail {violation.rule}: {violation.detail}"))
                continue
            seen_targets.add(key)
            items.append(item)
        if theme_count == 0:
            errors.append((persona.id, "no theme suggestion produced"))
    return FeedbackBatch(items=tuple(items), errors=tuple(errors))


def group_units(items: list[FeedbackItem] | tuple[FeedbackItem, ...],
                doc: CanvasDocument | None = None) -> list[FeedbackUnit]:
    """Partition items into per-component units.

    Unit order follows document element order (theme last); multi-item units
    start in "conflict" pending detection, single-item units start resolved.
    """
    groups: dict[tuple[str, str], list[FeedbackItem]] = {}
    for item in items:
        groups.setdefault((item.target, item.kind), []).append(item)

    if doc is not None:
        position = {e.id: i for i, e in enumerate(doc.elements)}
    else:
        position = {}

    def sort_key(key: tuple[str, str]):
        target, kind = key
        if kind == "theme":
            return (1, 0, target)
        return (0, position.get(target, len(position)), target)

    units = []
    for n, key in enumerate(sorted(groups, key=sort_key), start=1):
        target, kind = key
        members = tuple(groups[key])
        multi = len(members) >= 2
        units.append(FeedbackUnit(
            unit_id=f"u{n}",
            target=target,
            kind=kind,
            items=members,
            status="conflict" if multi else "resolved",
            conflict_summary="Multiple personas suggest different changes; conflict review pending."
            if multi else None,
        ))
    return units


def apply_text_feedback(doc: CanvasDocument, item: FeedbackItem) -> CanvasDocument:
    if item.kind != "text":
        raise KindMismatchError(item.target, "text", item.kind)
    return set_text(doc, item.target, item.preview)


def apply_image_feedback(gw: Gateway, doc: CanvasDocument, item: FeedbackItem) -> CanvasDocument:
    """Generate the suggested image, then swap the element's source.

    Generation happens only here, on acceptance; a backend failure leaves
    the document untouched.
    """
    if item.kind != "image":
        raise KindMismatchError(item.target, "image", item.kind)
    find_element(doc, item.target)  # fail before paying for generation
    asset_ref = gw.generate_image(item.preview, tag="feedback.image")
    return set_image_source(doc, item.target, asset_ref)


def preview_to_json(preview: str | ThemeDescriptor):
    if isinstance(preview, ThemeDescriptor):
        return {"tone": preview.tone, "color": preview.color}
    return preview


def preview_from_json(raw) -> str | ThemeDescriptor:
    if isinstance(raw, dict):
        return ThemeDescriptor(tone=raw["tone"], color=raw["color"])
    return raw


def item_to_json(item: FeedbackItem) -> dict:
    return {
        "item_id": item.item_id,
        "persona_id": item.persona_id,
        "target": item.target,
        "kind": item.kind,
        "opinion": item.opinion,
        "preview": preview_to_json(item.preview),
        "rationale": item.rationale,
    }


def item_from_json(raw: dict) -> FeedbackItem:
    return FeedbackItem(
        item_id=raw["item_id"],
        persona_id=raw["persona_id"],
        target=raw["target"],
        kind=raw["kind"],
        opinion=raw["opinion"],
        preview=preview_from_json(raw["preview"]),
        rationale=raw["rationale"],
    )


def unit_to_json(unit: FeedbackUnit) -> dict:
    from .discussion import conclusion_to_json

    return {
        "unit_id": unit.unit_id,
        "target": unit.target,
        "kind": unit.kind,
        "items": [item_to_json(i) for i in unit.items],
        "status": unit.status,
        "conflict_summary": unit.conflict_summary,
        "conclusion": conclusion_to_json(unit.conclusion) if unit.conclusion else None,
    }


def unit_from_json(raw: dict) -> FeedbackUnit:
    from .discussion import conclusion_from_json

    return FeedbackUnit(
        unit_id=raw["unit_id"],
        target=raw["target"],
        kind=raw["kind"],
        items=tuple(item_from_json(i) for i in raw["items"]),
        status=raw["status"],
        conflict_summary=raw.get("conflict_summary"),
        conclusion=conclusion_from_json(raw["conclusion"]) if raw.get("conclusion") else None,
    )
