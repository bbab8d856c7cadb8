from .geometry import Rect, bounding_box, detect_overlaps, intersect, total_overlap_area
from .model import (
    IMAGE,
    TEXT,
    VECTOR,
    Adjustment,
    CanvasDocument,
    Element,
    ImagePayload,
    TextPayload,
    VectorPayload,
    apply_adjustment,
    find_element,
    parse_document,
    serialize_document,
    set_image_source,
    set_text,
)
from .raster import parse_color, rasterize

__all__ = [
    "Adjustment",
    "CanvasDocument",
    "Element",
    "IMAGE",
    "ImagePayload",
    "Rect",
    "TEXT",
    "TextPayload",
    "VECTOR",
    "VectorPayload",
    "apply_adjustment",
    "bounding_box",
    "detect_overlaps",
    "find_element",
    "intersect",
    "parse_color",
    "parse_document",
    "rasterize",
    "serialize_document",
    "set_image_source",
    "set_text",
    "total_overlap_area",
]
