"""Poster document model and its canonical JSON serialization.

The wire format mirrors the canvas-tool export: a top-level object with
``width``, ``height``, ``schemaVersion`` and a ``children`` array, where list
order is render order (later children draw on top). Unknown keys at either
level survive a parse/serialize round trip untouched.

Canonical form emitted by :func:`serialize_document`, bit-exactly:

* top-level keys sorted alphabetically (extras merged in),
* children keep a fixed field order: ``id``, ``type``, ``x``, ``y``,
  ``width``, ``height``, ``rotation``, the kind-specific fields
  (``text``/``fontSize``/``fontFamily``/``fill``, ``src``, or
  ``svgData``/``zHint``), then unknown keys sorted,
* numbers with integral values are written as integers (no trailing ``.0``),
* two-space indent, UTF-8, single trailing newline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any

from ..errors import (
    DocumentParseError,
    ElementNotFoundError,
    InvalidDocumentError,
    KindMismatchError,
)

TEXT = "text"
IMAGE = "image"
VECTOR = "vector"

# wire "type" value <-> model kind
_WIRE_KIND = {"text": TEXT, "image": IMAGE, "svg": VECTOR}
_KIND_WIRE = {v: k for k, v in _WIRE_KIND.items()}


@dataclass(frozen=True)
class TextPayload:
    content: str = ""
    font_size: float = 16.0
    font_family: str = "Arial"
    fill: str = "#000000"


@dataclass(frozen=True)
class ImagePayload:
    source: str = ""


@dataclass(frozen=True)
class VectorPayload:
    data: str = ""
    z_hint: int = 0


Payload = TextPayload | ImagePayload | VectorPayload

_PAYLOAD_KIND = {TextPayload: TEXT, ImagePayload: IMAGE, VectorPayload: VECTOR}


@dataclass(frozen=True)
class Element:
    id: str
    kind: str
    x: float = 0.0
    y: float = 0.0
    width: float = 0.0
    height: float = 0.0
    rotation: float = 0.0
    payload: Payload = field(default_factory=TextPayload)
    extras: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise InvalidDocumentError("element id must be a non-empty string")
        if self.kind not in (TEXT, IMAGE, VECTOR):
            raise InvalidDocumentError(f"unknown element kind {self.kind!r}")
        if _PAYLOAD_KIND[type(self.payload)] != self.kind:
            raise InvalidDocumentError(
                f"element {self.id!r}: payload does not match kind {self.kind!r}"
            )
        if self.width < 0 or self.height < 0:
            raise InvalidDocumentError(
                f"element {self.id!r}: width/height must be >= 0"
            )


@dataclass(frozen=True)
class CanvasDocument:
    width: int
    height: int
    elements: tuple[Element, ...] = ()
    schema_version: int = 1
    extras: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise InvalidDocumentError("document width/height must be > 0")
        seen: set[str] = set()
        dupes: list[str] = []
        for e in self.elements:
            if e.id in seen:
                dupes.append(e.id)
            seen.add(e.id)
        if dupes:
            raise InvalidDocumentError(f"duplicate element ids: {sorted(set(dupes))}")

    def element_ids(self) -> list[str]:
        return [e.id for e in self.elements]


@dataclass(frozen=True)
class Adjustment:
    """A reposition or resize applied to one element."""

    element_id: str
    kind: str  # "reposition" | "resize"
    new_x: float | None = None
    new_y: float | None = None
    new_width: float | None = None
    new_height: float | None = None
    new_font_size: float | None = None
    note: str = ""

    def validate(self) -> None:
        if self.kind == "reposition":
            if self.new_x is None or self.new_y is None:
                raise InvalidDocumentError("reposition requires new_x and new_y")
            if any(v is not None for v in (self.new_width, self.new_height, self.new_font_size)):
                raise InvalidDocumentError("reposition carries only new_x/new_y")
        elif self.kind == "resize":
            if all(v is None for v in (self.new_width, self.new_height, self.new_font_size)):
                raise InvalidDocumentError(
                    "resize requires at least one of new_width/new_height/new_font_size"
                )
            if self.new_x is not None or self.new_y is not None:
                raise InvalidDocumentError("resize does not carry new_x/new_y")
        else:
            raise InvalidDocumentError(f"unknown adjustment kind {self.kind!r}")


def _as_number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DocumentParseError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _as_int(value: Any, where: str) -> int:
    n = _as_number(value, where)
    if n != int(n):
        raise DocumentParseError(f"{where}: expected an integer, got {value!r}")
    return int(n)


_CHILD_KNOWN = {"id", "type", "x", "y", "width", "height", "rotation"}
_KIND_FIELDS = {
    TEXT: ("text", "fontSize", "fontFamily", "fill"),
    IMAGE: ("src",),
    VECTOR: ("svgData", "zHint"),
}


def _parse_child(raw: Any, index: int) -> Element:
    where = f"children[{index}]"
    if not isinstance(raw, dict):
        raise DocumentParseError(f"{where}: expected an object")
    elem_id = raw.get("id")
    if not isinstance(elem_id, str) or not elem_id:
        raise DocumentParseError(f"{where}: missing or empty id")
    wire_type = raw.get("type")
    if wire_type not in _WIRE_KIND:
        raise DocumentParseError(f"{where}: unknown type {wire_type!r}")
    kind = _WIRE_KIND[wire_type]

    if kind == TEXT:
        payload: Payload = TextPayload(
            content=str(raw.get("text", "")),
            font_size=_as_number(raw.get("fontSize", 16), f"{where}.fontSize"),
            font_family=str(raw.get("fontFamily", "Arial")),
            fill=str(raw.get("fill", "#000000")),
        )
    elif kind == IMAGE:
        payload = ImagePayload(source=str(raw.get("src", "")))
    else:
        payload = VectorPayload(
            data=str(raw.get("svgData", "")),
            z_hint=_as_int(raw.get("zHint", index), f"{where}.zHint"),
        )

    known = _CHILD_KNOWN | set(_KIND_FIELDS[kind])
    extras = {k: v for k, v in raw.items() if k not in known}
    try:
        return Element(
            id=elem_id,
            kind=kind,
            x=_as_number(raw.get("x", 0), f"{where}.x"),
            y=_as_number(raw.get("y", 0), f"{where}.y"),
            width=_as_number(raw.get("width", 0), f"{where}.width"),
            height=_as_number(raw.get("height", 0), f"{where}.height"),
            rotation=_as_number(raw.get("rotation", 0), f"{where}.rotation"),
            payload=payload,
            extras=extras,
        )
    except InvalidDocumentError as exc:
        raise DocumentParseError(f"{where}: {exc}") from exc


def parse_document(serialized: str) -> CanvasDocument:
    """Parse wire-format JSON into a validated document.

    Raises :class:`DocumentParseError` (with the byte offset for malformed
    JSON) or :class:`InvalidDocumentError` for invariant violations such as
    duplicate ids.
    """
    try:
        raw = json.loads(serialized)
    except json.JSONDecodeError as exc:
        offset = len(serialized[: exc.pos].encode("utf-8"))
        raise DocumentParseError(
            f"malformed document JSON at byte {offset}: {exc.msg}", byte_offset=offset
        ) from exc
    if not isinstance(raw, dict):
        raise DocumentParseError("document must be a JSON object")

    children = raw.get("children", [])
    if not isinstance(children, list):
        raise DocumentParseError("children must be an array")
    elements = tuple(_parse_child(c, i) for i, c in enumerate(children))

    extras = {
        k: v
        for k, v in raw.items()
        if k not in ("width", "height", "schemaVersion", "children")
    }
    return CanvasDocument(
        width=_as_int(raw.get("width"), "width"),
        height=_as_int(raw.get("height"), "height"),
        elements=elements,
        schema_version=_as_int(raw.get("schemaVersion", 1), "schemaVersion"),
        extras=extras,
    )


def _num(value: float) -> int | float:
    f = float(value)
    return int(f) if f.is_integer() else f


def _child_dict(e: Element) -> dict[str, Any]:
    out: dict[str, Any] = {
        "id": e.id,
        "type": _KIND_WIRE[e.kind],
        "x": _num(e.x),
        "y": _num(e.y),
        "width": _num(e.width),
        "height": _num(e.height),
        "rotation": _num(e.rotation),
    }
    p = e.payload
    if isinstance(p, TextPayload):
        out["text"] = p.content
        out["fontSize"] = _num(p.font_size)
        out["fontFamily"] = p.font_family
        out["fill"] = p.fill
    elif isinstance(p, ImagePayload):
        out["src"] = p.source
    else:
        out["svgData"] = p.data
        out["zHint"] = p.z_hint
    for k in sorted(e.extras):
        out[k] = e.extras[k]
    return out


def serialize_document(doc: CanvasDocument) -> str:
    """Emit the canonical wire form; ``parse(serialize(doc)) == doc``."""
    top: dict[str, Any] = {
        "width": doc.width,
        "height": doc.height,
        "schemaVersion": doc.schema_version,
        "children": [_child_dict(e) for e in doc.elements],
    }
    top.update(doc.extras)
    ordered = {k: top[k] for k in sorted(top)}
    return json.dumps(ordered, indent=2, ensure_ascii=False) + "\n"


def find_element(doc: CanvasDocument, element_id: str) -> Element:
    for e in doc.elements:
        if e.id == element_id:
            return e
    raise ElementNotFoundError(element_id)


def _replace_element(doc: CanvasDocument, updated: Element) -> CanvasDocument:
    elements = tuple(updated if e.id == updated.id else e for e in doc.elements)
    return replace(doc, elements=elements)


def set_text(doc: CanvasDocument, element_id: str, content: str) -> CanvasDocument:
    """Return a copy of *doc* with one text element's content replaced."""
    e = find_element(doc, element_id)
    if e.kind != TEXT:
        raise KindMismatchError(element_id, TEXT, e.kind)
    payload = replace(e.payload, content=content)
    return _replace_element(doc, replace(e, payload=payload))


def set_image_source(doc: CanvasDocument, element_id: str, source: str) -> CanvasDocument:
    """Return a copy of *doc* with one image element's source replaced."""
    e = find_element(doc, element_id)
    if e.kind != IMAGE:
        raise KindMismatchError(element_id, IMAGE, e.kind)
    payload = replace(e.payload, source=source)
    return _replace_element(doc, replace(e, payload=payload))


def apply_adjustment(doc: CanvasDocument, adj: Adjustment) -> CanvasDocument:
    """Apply a reposition/resize to one element, leaving *doc* untouched."""
    adj.validate()
    e = find_element(doc, adj.element_id)
    if adj.kind == "reposition":
        updated = replace(e, x=float(adj.new_x), y=float(adj.new_y))
    else:
        updated = e
        if adj.new_width is not None:
            if adj.new_width < 0:
                raise InvalidDocumentError("new_width must be >= 0")
            updated = replace(updated, width=float(adj.new_width))
        if adj.new_height is not None:
            if adj.new_height < 0:
                raise InvalidDocumentError("new_height must be >= 0")
            updated = replace(updated, height=float(adj.new_height))
        if adj.new_font_size is not None:
            if updated.kind != TEXT:
                raise InvalidDocumentError(
                    f"font size adjustment targets non-text element {e.id!r}"
                )
            updated = replace(
                updated, payload=replace(updated.payload, font_size=float(adj.new_font_size))
            )
    return _replace_element(doc, updated)
