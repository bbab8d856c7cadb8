"""Theme templates: embedding index, cosine-ranked retrieval, application.

Templates are canvas documents rendered by the approximate rasterizer and
embedded through the gateway. Retrieval generates a probe image from the
tone/color descriptor, embeds it with the same embedder, and ranks the
whole index by cosine similarity (exhaustive scan; exactness over speed).

Applying a template maps the original text/image content onto the
template's slots, preserves the template's vector embellishments at their
original depths, and finishes with a bounded overlap-resolution loop.
Original content is never dropped: unmatched originals are appended with
template-median styling.

Index file format (UTF-8 text, bit-exact for determinism tests):

    poster-theme-index v1
    embedder_id=<id>
    dimension=<D>
    <template_id>\\t<repr floats, space-separated>      (rows sorted by id)
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import prompts
from .canvas import (
    IMAGE,
    TEXT,
    VECTOR,
    Adjustment,
    CanvasDocument,
    Element,
    apply_adjustment,
    bounding_box,
    detect_overlaps,
    intersect,
    parse_document,
    rasterize,
    serialize_document,
    total_overlap_area,
)
from .errors import InvalidDocumentError, SchemaError
from .feedback import ThemeDescriptor
from .gateway.core import Gateway
from .gateway.types import EmbeddingVector

DEFAULT_K = 12
DEFAULT_OVERLAP_ROUNDS = 3
DEFAULT_MIN_FRACTION = 0.02

_INDEX_MAGIC = "poster-theme-index v1"


@dataclass(frozen=True)
class ThemeTemplate:
    template_id: str
    embedding: EmbeddingVector
    document: CanvasDocument | None = None
    preview_image: str = ""


@dataclass(frozen=True)
class TemplateIndex:
    entries: tuple[ThemeTemplate, ...]
    embedder_id: str
    dimension: int

    def __post_init__(self):
        ids = [t.template_id for t in self.entries]
        if len(set(ids)) != len(ids):
            raise InvalidDocumentError("template ids must be unique")
        for t in self.entries:
            if t.embedding.dimension != self.dimension:
                raise InvalidDocumentError(
                    f"template {t.template_id!r} has dimension "
                    f"{t.embedding.dimension}, index is {self.dimension}"
                )

    def get(self, template_id: str) -> ThemeTemplate:
        for t in self.entries:
            if t.template_id == template_id:
                return t
        raise InvalidDocumentError(f"no template {template_id!r} in index")


@dataclass(frozen=True)
class RankedTemplates:
    query: ThemeDescriptor
    ranked: tuple[tuple[str, float], ...]  # similarity desc, ties by id asc


@dataclass(frozen=True)
class IngestResult:
    index: TemplateIndex
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class OverlapResolution:
    document: CanvasDocument
    adjustments: tuple[Adjustment, ...]
    complete: bool


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if a.dimension != b.dimension:
        raise InvalidDocumentError(
            f"embedding dimensions differ: {a.dimension} vs {b.dimension}"
        )
    return float(np.clip(np.dot(a.values, b.values), -1.0, 1.0))


def ingest_templates(gw: Gateway, corpus_dir: str | Path) -> IngestResult:
    """Embed every parseable template document under *corpus_dir*."""
    corpus = Path(corpus_dir)
    files = sorted(corpus.glob("*.json"))
    entries: list[ThemeTemplate] = []
    warnings: list[str] = []
    for path in files:
        try:
            doc = parse_document(path.read_text(encoding="utf-8"))
        except Exception as exc:  # noqa: BLE001 - any bad template is a warning, not a stop
            warnings.append(f"{path.name}: {exc}")
            continue
        pixels = rasterize(doc, assets=gw.assets)
        entries.append(ThemeTemplate(
            template_id=path.stem,
            embedding=gw.embed_image(pixels),
            document=doc,
            preview_image=gw.assets.put_image(pixels),
        ))
    if not entries:
        raise InvalidDocumentError(f"no usable templates under {corpus}")
    index = TemplateIndex(
        entries=tuple(entries),
        embedder_id=gw.embedder_id,
        dimension=entries[0].embedding.dimension,
    )
    return IngestResult(index=index, warnings=tuple(warnings))


def save_index(index: TemplateIndex, path: str | Path) -> None:
    lines = [_INDEX_MAGIC, f"embedder_id={index.embedder_id}", f"dimension={index.dimension}"]
    for entry in sorted(index.entries, key=lambda t: t.template_id):
        values = " ".join(repr(v) for v in entry.embedding.values.tolist())
        lines.append(f"{entry.template_id}\t{values}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_index(
    path: str | Path, corpus_dir: str | Path | None = None, gw: Gateway | None = None
) -> TemplateIndex:
    """Read a persisted index; with *corpus_dir* the template documents are
    reloaded (and previews recomputed when a gateway is supplied)."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if len(lines) < 3 or lines[0] != _INDEX_MAGIC:
        raise InvalidDocumentError(f"{path}: not a theme index file")
    embedder_id = lines[1].removeprefix("embedder_id=")
    dimension = int(lines[2].removeprefix("dimension="))
    entries = []
    for line in lines[3:]:
        if not line:
            continue
        template_id, _, values = line.partition("\t")
        vector = EmbeddingVector(np.array([float(v) for v in values.split()]))
        document = None
        preview = ""
        if corpus_dir is not None:
            doc_path = Path(corpus_dir) / f"{template_id}.json"
            document = parse_document(doc_path.read_text(encoding="utf-8"))
            if gw is not None:
                preview = gw.assets.put_image(rasterize(document, assets=gw.assets))
        entries.append(ThemeTemplate(
            template_id=template_id, embedding=vector,
            document=document, preview_image=preview,
        ))
    return TemplateIndex(entries=tuple(entries), embedder_id=embedder_id, dimension=dimension)


def rank_entries(index: TemplateIndex, probe: EmbeddingVector) -> list[tuple[str, float]]:
    scored = [(t.template_id, cosine_similarity(t.embedding, probe)) for t in index.entries]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored


def query_templates(
    gw: Gateway, index: TemplateIndex, descriptor: ThemeDescriptor, k: int = DEFAULT_K
) -> RankedTemplates:
    """Top-k templates for a tone/color descriptor (all of them when k exceeds
    the index size)."""
    if k < 1:
        raise InvalidDocumentError("k must be >= 1")
    if not index.entries:
        raise InvalidDocumentError("cannot query an empty index")
    prompt = prompts.THEME_PROBE_PROMPT.format(tone=descriptor.tone, color=descriptor.color)
    probe_ref = gw.generate_image(prompt, tag="theme.probe")
    probe = gw.embed_image(gw.load_asset(probe_ref))
    ranked = rank_entries(index, probe)[:k]
    return RankedTemplates(query=descriptor, ranked=tuple(ranked))


def extract_embellishments(
    template: CanvasDocument,
) -> tuple[CanvasDocument, list[tuple[Element, int]]]:
    """Pull vector elements out, remembering their list positions as depths."""
    kept = []
    pulled: list[tuple[Element, int]] = []
    for i, e in enumerate(template.elements):
        if e.kind == VECTOR:
            pulled.append((replace(e, payload=replace(e.payload, z_hint=i)), i))
        else:
            kept.append(e)
    return replace(template, elements=tuple(kept)), pulled


def reinsert_embellishments(
    doc: CanvasDocument, embellishments: list[tuple[Element, int]]
) -> CanvasDocument:
    """Reinsert extracted vectors at their recorded depths (clamped)."""
    elements = list(doc.elements)
    used = {e.id for e in elements}
    for element, z_hint in sorted(embellishments, key=lambda pair: pair[1]):
        if element.id in used:  # template/original id clash; keep both
            element = replace(element, id=f"{element.id}-emb{z_hint}")
        used.add(element.id)
        elements.insert(min(z_hint, len(elements)), element)
    return replace(doc, elements=tuple(elements))


def _median_or(values: list[float], default: float) -> float:
    return float(statistics.median(values)) if values else default


def _merge_slot(slot: Element, original: Element) -> Element:
    """Template slot geometry/styles with the original's id and content."""
    if slot.kind == TEXT:
        payload = replace(slot.payload, content=original.payload.content)
    else:
        payload = replace(slot.payload, source=original.payload.source)
    return replace(slot, id=original.id, payload=payload)


def _append_unmatched(
    elements: list[Element], leftovers: list[Element], slots: list[Element], page: CanvasDocument
) -> None:
    pad = 16.0
    bottom = max((bounding_box(e).bottom for e in elements), default=0.0)
    for original in leftovers:
        same_kind = [s for s in slots if s.kind == original.kind]
        width = _median_or([s.width for s in same_kind], original.width)
        height = _median_or([s.height for s in same_kind], original.height)
        x = _median_or([s.x for s in same_kind], max(0.0, (page.width - width) / 2))
        styled = replace(original, x=x, y=bottom + pad, width=width, height=height, rotation=0.0)
        if original.kind == TEXT and same_kind:
            font = _median_or([s.payload.font_size for s in same_kind],
                              original.payload.font_size)
            styled = replace(styled, payload=replace(styled.payload, font_size=font))
        elements.append(styled)
        bottom = bounding_box(styled).bottom


def _greedy_assignments(original: CanvasDocument, template: CanvasDocument) -> dict[str, str]:
    """Fallback mapping: pair originals and slots of the same kind in order."""
    assignments: dict[str, str] = {}
    for kind in (TEXT, IMAGE):
        originals = [e for e in original.elements if e.kind == kind]
        slots = [e for e in template.elements if e.kind == kind]
        for o, s in zip(originals, slots):
            assignments[o.id] = s.id
    return assignments


def map_components(
    gw: Gateway, original: CanvasDocument, template: CanvasDocument
) -> CanvasDocument:
    """Place the original's text/image content into the template's slots.

    Model-assigned in scripted/live mode, order-greedy in fallback mode.
    Unmatched slots are removed; unmatched original content is appended
    below with template-median styling.
    """
    originals = {e.id: e for e in original.elements if e.kind in (TEXT, IMAGE)}
    slots = [e for e in template.elements if e.kind in (TEXT, IMAGE)]
    slot_by_id = {e.id: e for e in slots}

    if gw.mode == "fallback":
        assignments = _greedy_assignments(original, template)
    else:
        resp = gw.complete_structured(prompts.mapping_request(
            serialize_document(original), serialize_document(template)))
        assignments = {}
        for pair in resp.payload.assignments:
            if pair.original_id not in originals:
                raise SchemaError(f"mapping names unknown original {pair.original_id!r}")
            if pair.slot_id not in slot_by_id:
                raise SchemaError(f"mapping names unknown slot {pair.slot_id!r}")
            if originals[pair.original_id].kind != slot_by_id[pair.slot_id].kind:
                raise SchemaError(
                    f"mapping pairs {pair.original_id!r} with a different-kind slot")
            if pair.original_id in assignments or pair.slot_id in assignments.values():
                raise SchemaError("mapping assigns an element twice")
            assignments[pair.original_id] = pair.slot_id

    slot_to_original = {s: o for o, s in assignments.items()}
    merged: list[Element] = []
    for slot in slots:
        original_id = slot_to_original.get(slot.id)
        if original_id is not None:
            merged.append(_merge_slot(slot, originals[original_id]))
    leftovers = [originals[oid] for oid in originals if oid not in assignments]
    out = replace(template, elements=())
    elements = list(merged)
    _append_unmatched(elements, leftovers, slots, out)
    return replace(out, elements=tuple(elements))


def _push_apart(doc: CanvasDocument, a_id: str, b_id: str) -> Adjustment | None:
    """Reposition the later-in-z element down/right by the overlap extent."""
    order = {e.id: i for i, e in enumerate(doc.elements)}
    first, later = sorted((a_id, b_id), key=lambda i: order[i])
    boxes = {e.id: bounding_box(e) for e in doc.elements if e.id in (first, later)}
    inter = intersect(boxes[first], boxes[later])
    if inter is None:
        return None
    target = next(e for e in doc.elements if e.id == later)
    return Adjustment(
        element_id=later,
        kind="reposition",
        new_x=target.x + inter.width,
        new_y=target.y + inter.height,
        note=f"moved {later} down/right off {first}",
    )


def resolve_overlaps(
    gw: Gateway,
    doc: CanvasDocument,
    max_rounds: int = DEFAULT_OVERLAP_ROUNDS,
    min_fraction: float = DEFAULT_MIN_FRACTION,
) -> OverlapResolution:
    """Iterate model-guided (or fallback heuristic) layout fixes until clean.

    Round count is bounded; exhausting it flags the result incomplete
    rather than failing. In fallback mode the total pairwise overlap area
    is guaranteed non-increasing round over round (a round that does not
    improve is rolled back and the loop stops).
    """
    if max_rounds < 1:
        raise InvalidDocumentError("max_rounds must be >= 1")
    applied: list[Adjustment] = []
    current = doc
    if gw.mode == "fallback":
        for _ in range(max_rounds):
            pairs = detect_overlaps(current, min_fraction)
            if not pairs:
                return OverlapResolution(current, tuple(applied), complete=True)
            before_area = total_overlap_area(current)
            candidate = current
            round_adjustments = []
            for a_id, b_id, _ in pairs:
                adj = _push_apart(candidate, a_id, b_id)
                if adj is not None:
                    candidate = apply_adjustment(candidate, adj)
                    round_adjustments.append(adj)
            if total_overlap_area(candidate) > before_area or not round_adjustments:
                break  # no monotone progress possible; keep the better layout
            current = candidate
            applied.extend(round_adjustments)
        complete = not detect_overlaps(current, min_fraction)
        return OverlapResolution(current, tuple(applied), complete=complete)

    for _ in range(max_rounds):
        pixels = rasterize(current, assets=gw.assets)
        resp = gw.complete_structured(
            prompts.overlap_request(serialize_document(current), pixels))
        if not resp.payload.adjustments:
            return OverlapResolution(current, tuple(applied), complete=True)
        known = {e.id for e in current.elements}
        for raw in resp.payload.adjustments:
            if raw.element_id not in known:
                raise SchemaError(f"adjustment names unknown element {raw.element_id!r}")
            adj = Adjustment(
                element_id=raw.element_id, kind=raw.kind,
                new_x=raw.new_x, new_y=raw.new_y,
                new_width=raw.new_width, new_height=raw.new_height,
                new_font_size=raw.new_font_size, note=raw.note,
            )
            current = apply_adjustment(current, adj)
            applied.append(adj)
    return OverlapResolution(current, tuple(applied), complete=False)


def apply_theme(
    gw: Gateway,
    doc: CanvasDocument,
    template: CanvasDocument,
    max_rounds: int = DEFAULT_OVERLAP_ROUNDS,
) -> CanvasDocument:
    """Full theme application: strip embellishments, map content, reinsert,
    resolve overlaps. Pure: any stage failure leaves the caller's document
    as it was."""
    stripped, embellishments = extract_embellishments(template)
    mapped = map_components(gw, doc, stripped)
    with_embellishments = reinsert_embellishments(mapped, embellishments)
    return resolve_overlaps(gw, with_embellishments, max_rounds=max_rounds).document


def content_multisets(doc: CanvasDocument) -> tuple[dict[str, int], dict[str, int]]:
    """Multisets of text contents and image sources (conservation checks)."""
    texts: dict[str, int] = {}
    images: dict[str, int] = {}
    for e in doc.elements:
        if e.kind == TEXT:
            texts[e.payload.content] = texts.get(e.payload.content, 0) + 1
        elif e.kind == IMAGE:
            images[e.payload.source] = images.get(e.payload.source, 0) + 1
    return texts, images
