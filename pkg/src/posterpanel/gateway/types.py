"""Request/response carriers shared by all generative backends."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import InvalidDocumentError


@dataclass(frozen=True)
class TextPart:
    text: str


@dataclass(frozen=True)
class ImagePart:
    image: np.ndarray  # (H, W, 3) uint8

    def __eq__(self, other):
        return isinstance(other, ImagePart) and np.array_equal(self.image, other.image)


@dataclass(frozen=True)
class ModelRequest:
    """One structured-completion request, tagged by pipeline step."""

    tag: str
    system_text: str
    user_parts: tuple[TextPart | ImagePart, ...]
    schema_id: str
    temperature_hint: float = 0.7

    def __post_init__(self):
        if not self.tag:
            raise InvalidDocumentError("request tag must be non-empty")
        if not 0.0 <= self.temperature_hint <= 2.0:
            raise InvalidDocumentError("temperature_hint must be within [0, 2]")

    def text_content(self) -> str:
        """All prompt text, for request-log assertions."""
        parts = [p.text for p in self.user_parts if isinstance(p, TextPart)]
        return "\n".join([self.system_text, *parts])

    def with_extra_text(self, text: str) -> "ModelRequest":
        return ModelRequest(
            tag=self.tag,
            system_text=self.system_text,
            user_parts=self.user_parts + (TextPart(text),),
            schema_id=self.schema_id,
            temperature_hint=self.temperature_hint,
        )


@dataclass(frozen=True)
class StructuredResponse:
    payload: Any  # validated model instance for the request's schema_id
    raw_text: str
    attempts: int


class EmbeddingVector:
    """Unit-norm float vector; cosine similarity reduces to a dot product."""

    __slots__ = ("values",)

    def __init__(self, values: np.ndarray):
        v = np.asarray(values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise InvalidDocumentError("embedding must be a non-empty 1-d vector")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > 1e-6:
            raise InvalidDocumentError(f"embedding norm {norm} is not 1.0 +/- 1e-6")
        self.values = v
        self.values.setflags(write=False)

    @classmethod
    def from_raw(cls, values) -> "EmbeddingVector":
        v = np.asarray(values, dtype=np.float64)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise InvalidDocumentError("cannot normalize a zero vector")
        return cls(v / norm)

    @property
    def dimension(self) -> int:
        return int(self.values.size)

    def __repr__(self):
        return f"EmbeddingVector(dim={self.dimension})"
