"""Deterministic approximate rasterizer.

Renders a document to an RGB numpy buffer at page resolution: solid white
page, text as a tinted box with fill-colored line bars sized by font size,
images from resolvable assets (nearest-neighbor scaled) or a gray
placeholder, vectors as thin outlines. Boxes, not glyphs: the output feeds
vision models and pixel-level tests, not production rendering.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidDocumentError
from .geometry import bounding_box
from .model import IMAGE, TEXT, CanvasDocument, Element

PAGE_COLOR = (255, 255, 255)
PLACEHOLDER_FILL = (204, 204, 204)
PLACEHOLDER_EDGE = (120, 120, 120)
VECTOR_EDGE = (90, 90, 90)

_NAMED_COLORS = {
    "black": (0, 0, 0),
    "white": (255, 255, 255),
    "red": (220, 40, 40),
    "green": (40, 160, 60),
    "blue": (40, 80, 220),
    "yellow": (240, 200, 40),
    "gray": (128, 128, 128),
    "grey": (128, 128, 128),
}
_FALLBACK_COLOR = (102, 102, 102)


def parse_color(value: str) -> tuple[int, int, int]:
    """Best-effort color parse: #rgb / #rrggbb(aa) / a few names."""
    s = value.strip().lower()
    if s.startswith("#"):
        hexpart = s[1:]
        try:
            if len(hexpart) == 3:
                return tuple(int(c * 2, 16) for c in hexpart)  # type: ignore[return-value]
            if len(hexpart) in (6, 8):
                return tuple(int(hexpart[i : i + 2], 16) for i in (0, 2, 4))  # type: ignore[return-value]
        except ValueError:
            return _FALLBACK_COLOR
    return _NAMED_COLORS.get(s, _FALLBACK_COLOR)


def _clip_box(e: Element, width: int, height: int) -> tuple[int, int, int, int] | None:
    box = bounding_box(e)
    x0 = max(0, int(np.floor(box.x)))
    y0 = max(0, int(np.floor(box.y)))
    x1 = min(width, int(np.ceil(box.x + box.width)))
    y1 = min(height, int(np.ceil(box.y + box.height)))
    if x1 <= x0 or y1 <= y0:
        return None
    return x0, y0, x1, y1


def _draw_text(buf: np.ndarray, e: Element, box: tuple[int, int, int, int]) -> None:
    x0, y0, x1, y1 = box
    fill = np.array(parse_color(e.payload.fill), dtype=np.float64)
    region = buf[y0:y1, x0:x1].astype(np.float64)
    buf[y0:y1, x0:x1] = np.clip(region * 0.75 + fill * 0.25, 0, 255).astype(np.uint8)
    bar = max(1, int(round(e.payload.font_size)))
    gap = max(2, bar // 2)
    y = y0
    solid = fill.astype(np.uint8)
    while y < y1:
        buf[y : min(y + bar, y1), x0:x1] = solid
        y += bar + gap


def _draw_image(
    buf: np.ndarray, box: tuple[int, int, int, int], pixels: np.ndarray | None
) -> None:
    x0, y0, x1, y1 = box
    h, w = y1 - y0, x1 - x0
    if pixels is None:
        buf[y0:y1, x0:x1] = PLACEHOLDER_FILL
        edge = min(1, h - 1, w - 1)
        if edge >= 0:
            buf[y0, x0:x1] = PLACEHOLDER_EDGE
            buf[y1 - 1, x0:x1] = PLACEHOLDER_EDGE
            buf[y0:y1, x0] = PLACEHOLDER_EDGE
            buf[y0:y1, x1 - 1] = PLACEHOLDER_EDGE
        return
    # nearest-neighbor resample keeps the render bit-deterministic
    src_h, src_w = pixels.shape[:2]
    rows = (np.arange(h) * src_h // h).clip(0, src_h - 1)
    cols = (np.arange(w) * src_w // w).clip(0, src_w - 1)
    buf[y0:y1, x0:x1] = pixels[rows][:, cols, :3]


def _draw_vector(buf: np.ndarray, box: tuple[int, int, int, int]) -> None:
    x0, y0, x1, y1 = box
    t = 2 if (y1 - y0) > 4 and (x1 - x0) > 4 else 1
    buf[y0 : y0 + t, x0:x1] = VECTOR_EDGE
    buf[y1 - t : y1, x0:x1] = VECTOR_EDGE
    buf[y0:y1, x0 : x0 + t] = VECTOR_EDGE
    buf[y0:y1, x1 - t : x1] = VECTOR_EDGE


def rasterize(doc: CanvasDocument, assets=None) -> np.ndarray:
    """Render *doc* to an (height, width, 3) uint8 buffer.

    *assets* is an optional object with an ``open_image(ref) -> ndarray | None``
    method (see :class:`posterpanel.gateway.assets.AssetStore`) used to
    resolve image sources; unresolvable sources draw as placeholders.
    """
    if doc.width <= 0 or doc.height <= 0:
        raise InvalidDocumentError("cannot rasterize a document with non-positive size")
    buf = np.empty((doc.height, doc.width, 3), dtype=np.uint8)
    buf[:, :] = PAGE_COLOR
    for e in doc.elements:
        box = _clip_box(e, doc.width, doc.height)
        if box is None:
            continue
        if e.kind == TEXT:
            _draw_text(buf, e, box)
        elif e.kind == IMAGE:
            pixels = assets.open_image(e.payload.source) if assets is not None else None
            _draw_image(buf, box, pixels)
        else:
            _draw_vector(buf, box)
    return buf
