"""Axis-aligned layout geometry: bounding boxes and overlap detection.

Rotated elements are reduced to the AABB of their four rotated corners;
exact rotated-polygon intersection is deliberately out of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import InvalidDocumentError
from .model import VECTOR, CanvasDocument, Element


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    width: float
    height: float

    def __post_init__(self):
        if self.width < 0 or self.height < 0:
            raise InvalidDocumentError("Rect width/height must be >= 0")

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def right(self) -> float:
        return self.x + self.width

    @property
    def bottom(self) -> float:
        return self.y + self.height


def intersect(a: Rect, b: Rect) -> Rect | None:
    """Intersection of two rects, or None when they are disjoint."""
    x0 = max(a.x, b.x)
    y0 = max(a.y, b.y)
    x1 = min(a.right, b.right)
    y1 = min(a.bottom, b.bottom)
    if x1 <= x0 or y1 <= y0:
        return None
    return Rect(x0, y0, x1 - x0, y1 - y0)


# exact (cos, sin) for quarter turns so 0/90/180/270 stay float-error free
_QUARTER = {0: (1.0, 0.0), 90: (0.0, 1.0), 180: (-1.0, 0.0), 270: (0.0, -1.0)}


def bounding_box(e: Element) -> Rect:
    """AABB of the element after rotating it about its center."""
    deg = e.rotation % 360.0
    if deg == 0.0:
        return Rect(e.x, e.y, e.width, e.height)
    if deg in _QUARTER:
        cos, sin = _QUARTER[int(deg)]
    else:
        rad = math.radians(deg)
        cos, sin = math.cos(rad), math.sin(rad)
    cx = e.x + e.width / 2.0
    cy = e.y + e.height / 2.0
    xs, ys = [], []
    for dx, dy in ((-e.width / 2, -e.height / 2), (e.width / 2, -e.height / 2),
                   (e.width / 2, e.height / 2), (-e.width / 2, e.height / 2)):
        xs.append(cx + dx * cos - dy * sin)
        ys.append(cy + dx * sin + dy * cos)
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    return Rect(x0, y0, x1 - x0, y1 - y0)


def detect_overlaps(
    doc: CanvasDocument, min_fraction: float = 0.02
) -> list[tuple[str, str, float]]:
    """All element pairs whose boxes overlap by more than *min_fraction*
    of the smaller box's area.

    Vector elements are theme embellishments (decoration) and are skipped.
    Pairs are id-normalized (idA < idB) and sorted by (idA, idB).
    """
    if not 0.0 <= min_fraction <= 1.0:
        raise InvalidDocumentError("min_fraction must be within [0, 1]")
    boxed = [(e.id, bounding_box(e)) for e in doc.elements if e.kind != VECTOR]
    hits: list[tuple[str, str, float]] = []
    for i in range(len(boxed)):
        id_i, box_i = boxed[i]
        for j in range(i + 1, len(boxed)):
            id_j, box_j = boxed[j]
            inter = intersect(box_i, box_j)
            if inter is None:
                continue
            smaller = min(box_i.area, box_j.area)
            if inter.area > min_fraction * smaller:
                a, b = sorted((id_i, id_j))
                hits.append((a, b, inter.area))
    hits.sort(key=lambda t: (t[0], t[1]))
    return hits


def total_overlap_area(doc: CanvasDocument) -> float:
    """Sum of pairwise box intersection areas over non-vector elements."""
    boxed = [bounding_box(e) for e in doc.elements if e.kind != VECTOR]
    total = 0.0
    for i in range(len(boxed)):
        for j in range(i + 1, len(boxed)):
            inter = intersect(boxed[i], boxed[j])
            if inter is not None:
                total += inter.area
    return total
