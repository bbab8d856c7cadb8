"""Persona construction: brief extraction, steerable dimensions, the 2x2 grid.

Exactly four personas are generated, one per combination of the two
dimension extremes; the user may append manually described personas, which
sit outside the grid (coords None).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import prompts
from .errors import InvalidDocumentError
from .gateway.core import Gateway
from .gateway.types import ImagePart, TextPart

GRID_ORDER = (("low", "low"), ("low", "high"), ("high", "low"), ("high", "high"))

PERSONA_FIELDS = (
    "name", "summary", "background", "motivation",
    "pain_point", "need", "quote", "rationale",
)


@dataclass(frozen=True)
class TextPage:
    text: str


@dataclass(frozen=True)
class ImagePage:
    image: np.ndarray

    def __eq__(self, other):
        return isinstance(other, ImagePage) and np.array_equal(self.image, other.image)


@dataclass(frozen=True)
class MarketingBrief:
    pages: tuple[TextPage | ImagePage, ...]
    source_name: str = "brief"

    def __post_init__(self):
        if not self.pages:
            raise InvalidDocumentError("a brief needs at least one page")
        for i, page in enumerate(self.pages):
            if isinstance(page, TextPage) and not page.text.strip():
                raise InvalidDocumentError(f"brief page {i} is empty")
            if isinstance(page, ImagePage) and page.image.size == 0:
                raise InvalidDocumentError(f"brief page {i} is an empty image")

    def raw_text(self) -> str:
        chunks = []
        for i, page in enumerate(self.pages):
            if isinstance(page, TextPage):
                chunks.append(page.text)
            else:
                chunks.append(f"[image page {i + 1}]")
        return "\n\n".join(chunks)


@dataclass(frozen=True)
class BriefExtract:
    goal: str
    audience_summary: str
    constraints: tuple[str, ...]
    raw_text: str

    def __post_init__(self):
        if not self.goal:
            raise InvalidDocumentError("extract goal must be non-empty")
        if not self.raw_text:
            raise InvalidDocumentError("extract raw_text must be non-empty")


@dataclass(frozen=True)
class SteerableDimension:
    name: str
    low_label: str
    high_label: str
    source: str = "generated"  # "from_brief" | "generated"


@dataclass(frozen=True)
class Persona:
    id: str
    name: str
    summary: str
    background: str
    motivation: str
    pain_point: str
    need: str
    quote: str
    rationale: str
    coords: tuple[str, str] | None  # (level on dim1, level on dim2); None for manual
    avatar: str = ""
    origin: str = "generated"  # "generated" | "manual"


@dataclass(frozen=True)
class PersonaSet:
    personas: tuple[Persona, ...]
    dimensions: tuple[SteerableDimension, SteerableDimension]

    def generated(self) -> list[Persona]:
        return [p for p in self.personas if p.origin == "generated"]

    def by_id(self, persona_id: str) -> Persona:
        for p in self.personas:
            if p.id == persona_id:
                return p
        raise InvalidDocumentError(f"no persona {persona_id!r}")

    def check_grid(self) -> None:
        gen = self.generated()
        coords = {p.coords for p in gen}
        if len(gen) != 4 or coords != set(GRID_ORDER):
            raise InvalidDocumentError("persona set must cover the 2x2 dimension grid")


def brief_from_path(path: str | Path) -> MarketingBrief:
    """Load a brief from a text/PNG file or a directory of page files."""
    from .gateway.assets import decode_png

    p = Path(path)
    if p.is_dir():
        pages: list[TextPage | ImagePage] = []
        for child in sorted(p.iterdir()):
            if child.suffix == ".txt":
                pages.append(TextPage(child.read_text(encoding="utf-8")))
            elif child.suffix == ".png":
                pages.append(ImagePage(decode_png(child.read_bytes())))
        if not pages:
            raise InvalidDocumentError(f"no .txt or .png pages under {p}")
        return MarketingBrief(pages=tuple(pages), source_name=p.name)
    if p.suffix == ".png":
        return MarketingBrief(pages=(ImagePage(decode_png(p.read_bytes())),), source_name=p.name)
    return MarketingBrief(pages=(TextPage(p.read_text(encoding="utf-8")),), source_name=p.name)


def extract_brief(gw: Gateway, brief: MarketingBrief) -> BriefExtract:
    parts: list = [TextPart("Marketing brief follows.")]
    for page in brief.pages:
        if isinstance(page, TextPage):
            parts.append(TextPart(page.text))
        else:
            parts.append(ImagePart(page.image))
    resp = gw.complete_structured(prompts.brief_extract_request(parts))
    return BriefExtract(
        goal=resp.payload.goal,
        audience_summary=resp.payload.audience_summary,
        constraints=tuple(resp.payload.constraints),
        raw_text=brief.raw_text(),
    )


def derive_dimensions(
    gw: Gateway, extract: BriefExtract
) -> tuple[SteerableDimension, SteerableDimension]:
    resp = gw.complete_structured(prompts.dimensions_request(extract))
    dims = tuple(
        SteerableDimension(
            name=d.name,
            low_label=d.low_label,
            high_label=d.high_label,
            source="from_brief" if d.from_brief else "generated",
        )
        for d in resp.payload.dimensions
    )
    return dims  # type: ignore[return-value]


def generate_avatar(gw: Gateway, persona: Persona) -> str:
    """Avatar asset for a persona; deterministic per name under the scripted backend."""
    if not persona.name:
        raise InvalidDocumentError("persona needs a name before avatar generation")
    return gw.generate_image(
        prompts.AVATAR_PROMPT.format(name=persona.name), tag="persona.avatar"
    )


def build_personas(
    gw: Gateway,
    extract: BriefExtract,
    dims: tuple[SteerableDimension, SteerableDimension],
) -> PersonaSet:
    resp = gw.complete_structured(prompts.personas_request(extract, dims))
    by_coords = {(p.level_1, p.level_2): p for p in resp.payload.personas}
    personas = []
    for i, coords in enumerate(GRID_ORDER):
        raw = by_coords[coords]
        persona = Persona(
            id=f"p{i + 1}",
            name=raw.name,
            summary=raw.summary,
            background=raw.background,
            motivation=raw.motivation,
            pain_point=raw.pain_point,
            need=raw.need,
            quote=raw.quote,
            rationale=raw.rationale,
            coords=coords,
        )
        personas.append(replace(persona, avatar=generate_avatar(gw, persona)))
    built = PersonaSet(personas=tuple(personas), dimensions=dims)
    built.check_grid()
    return built


def add_manual_persona(gw: Gateway, pset: PersonaSet, details: dict[str, str]) -> PersonaSet:
    """Append a user-described persona (origin=manual, no grid coords)."""
    for name in PERSONA_FIELDS:
        if not details.get(name, "").strip():
            raise InvalidDocumentError(f"manual persona field {name!r} must be non-empty")
    manual_count = sum(1 for p in pset.personas if p.origin == "manual")
    persona = Persona(
        id=f"m{manual_count + 1}",
        coords=None,
        origin="manual",
        **{name: details[name] for name in PERSONA_FIELDS},
    )
    persona = replace(persona, avatar=generate_avatar(gw, persona))
    return PersonaSet(personas=pset.personas + (persona,), dimensions=pset.dimensions)


def persona_to_json(p: Persona) -> dict:
    return {
        "id": p.id,
        "name": p.name,
        "summary": p.summary,
        "background": p.background,
        "motivation": p.motivation,
        "pain_point": p.pain_point,
        "need": p.need,
        "quote": p.quote,
        "rationale": p.rationale,
        "coords": list(p.coords) if p.coords else None,
        "avatar": p.avatar,
        "origin": p.origin,
    }


def persona_from_json(raw: dict) -> Persona:
    return Persona(
        id=raw["id"],
        coords=tuple(raw["coords"]) if raw.get("coords") else None,
        avatar=raw.get("avatar", ""),
        origin=raw.get("origin", "generated"),
        **{name: raw[name] for name in PERSONA_FIELDS},
    )


def persona_set_to_json(pset: PersonaSet) -> dict:
    return {
        "dimensions": [
            {"name": d.name, "low_label": d.low_label, "high_label": d.high_label,
             "source": d.source}
            for d in pset.dimensions
        ],
        "personas": [persona_to_json(p) for p in pset.personas],
    }


def persona_set_from_json(raw: dict) -> PersonaSet:
    dims = tuple(
        SteerableDimension(
            name=d["name"], low_label=d["low_label"], high_label=d["high_label"],
            source=d.get("source", "generated"),
        )
        for d in raw["dimensions"]
    )
    return PersonaSet(
        personas=tuple(persona_from_json(p) for p in raw["personas"]),
        dimensions=dims,  # type: ignore[arg-type]
    )
