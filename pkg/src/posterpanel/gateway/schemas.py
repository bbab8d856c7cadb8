"""Registry of expected response structures, one schema per pipeline step.

Model output is parsed as JSON and validated against the registered pydantic
model; validation failures feed the gateway's re-prompt loop.
"""

from __future__ import annotations

from typing import Literal, Union

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from ..errors import SchemaError

THEME_TARGET = "THEME"


class NonEmptyModel(BaseModel):
    model_config = {"extra": "forbid"}


class BriefExtractPayload(NonEmptyModel):
    goal: str = Field(min_length=1)
    audience_summary: str = ""
    constraints: list[str] = Field(default_factory=list)


class DimensionPayload(NonEmptyModel):
    name: str = Field(min_length=1)
    low_label: str = Field(min_length=1)
    high_label: str = Field(min_length=1)
    from_brief: bool = False

    @model_validator(mode="after")
    def _distinct_extremes(self):
        if self.low_label == self.high_label:
            raise ValueError("dimension extremes must differ")
        return self


class DimensionsPayload(NonEmptyModel):
    dimensions: list[DimensionPayload]

    @model_validator(mode="after")
    def _exactly_two_distinct(self):
        if len(self.dimensions) != 2:
            raise ValueError("exactly two dimensions required")
        labels = [lab for d in self.dimensions for lab in (d.low_label, d.high_label)]
        if len(set(labels)) != 4:
            raise ValueError("dimension labels must be pairwise distinct")
        if self.dimensions[0].name == self.dimensions[1].name:
            raise ValueError("dimension names must differ")
        return self


_LEVELS = Literal["low", "high"]


class PersonaPayload(NonEmptyModel):
    name: str = Field(min_length=1)
    summary: str = Field(min_length=1)
    background: str = Field(min_length=1)
    motivation: str = Field(min_length=1)
    pain_point: str = Field(min_length=1)
    need: str = Field(min_length=1)
    quote: str = Field(min_length=1)
    rationale: str = Field(min_length=1)
    level_1: _LEVELS
    level_2: _LEVELS

    @field_validator("name")
    @classmethod
    def _two_words(cls, v: str) -> str:
        if len(v.split()) != 2:
            raise ValueError("persona name must be exactly two words")
        return v


class PersonasPayload(NonEmptyModel):
    personas: list[PersonaPayload]

    @model_validator(mode="after")
    def _full_grid(self):
        coords = {(p.level_1, p.level_2) for p in self.personas}
        if len(self.personas) != 4 or len(coords) != 4:
            raise ValueError("need four personas covering all four dimension combinations")
        return self


class ThemePreviewPayload(NonEmptyModel):
    tone: str = Field(min_length=1)
    color: str = Field(min_length=1)


class FeedbackItemPayload(NonEmptyModel):
    target: str = Field(min_length=1)
    kind: Literal["text", "image", "theme"]
    opinion: str = Field(min_length=1)
    preview: Union[str, ThemePreviewPayload]
    rationale: str = Field(min_length=1)

    @model_validator(mode="after")
    def _preview_shape(self):
        if self.kind == "theme":
            if not isinstance(self.preview, ThemePreviewPayload):
                raise ValueError("theme preview must carry tone and color")
            if self.target != THEME_TARGET:
                raise ValueError(f"theme feedback must target {THEME_TARGET}")
        else:
            if not isinstance(self.preview, str) or not self.preview:
                raise ValueError("text/image preview must be a non-empty string")
        return self


class FeedbackPayload(NonEmptyModel):
    items: list[FeedbackItemPayload] = Field(default_factory=list)


class ConflictPayload(NonEmptyModel):
    conflict: bool
    summary: str = ""
    item_ids: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _conflict_shape(self):
        if self.conflict:
            if not self.summary:
                raise ValueError("conflict requires a one-line summary")
            if len(self.item_ids) < 2:
                raise ValueError("conflict requires at least two item ids")
        return self


class QuestionPayload(NonEmptyModel):
    question: str = Field(min_length=1)


class AnswerPayload(NonEmptyModel):
    answer: str = Field(min_length=1)


class ConclusionPayload(NonEmptyModel):
    target: str = Field(min_length=1)
    summary: str = Field(min_length=1)
    preview: Union[str, ThemePreviewPayload]
    omitted_personas: list[str] = Field(default_factory=list)


class MappingAssignment(NonEmptyModel):
    original_id: str = Field(min_length=1)
    slot_id: str = Field(min_length=1)


class MappingPayload(NonEmptyModel):
    assignments: list[MappingAssignment] = Field(default_factory=list)


class AdjustmentPayload(NonEmptyModel):
    element_id: str = Field(min_length=1)
    kind: Literal["reposition", "resize"]
    new_x: float | None = None
    new_y: float | None = None
    new_width: float | None = None
    new_height: float | None = None
    new_font_size: float | None = None
    note: str = Field(min_length=1)

    @model_validator(mode="after")
    def _consistent(self):
        if self.kind == "reposition":
            if self.new_x is None or self.new_y is None:
                raise ValueError("reposition requires new_x and new_y")
            if any(v is not None for v in (self.new_width, self.new_height, self.new_font_size)):
                raise ValueError("reposition carries only new_x/new_y")
        else:
            if all(v is None for v in (self.new_width, self.new_height, self.new_font_size)):
                raise ValueError("resize requires a width/height/font size")
            if self.new_x is not None or self.new_y is not None:
                raise ValueError("resize does not carry new_x/new_y")
        return self


class AdjustmentsPayload(NonEmptyModel):
    adjustments: list[AdjustmentPayload] = Field(default_factory=list)


SCHEMAS: dict[str, type[BaseModel]] = {
    "brief.extract": BriefExtractPayload,
    "persona.dimensions": DimensionsPayload,
    "persona.personas": PersonasPayload,
    "feedback.items": FeedbackPayload,
    "discuss.detect": ConflictPayload,
    "discuss.question": QuestionPayload,
    "discuss.answer": AnswerPayload,
    "discuss.conclude": ConclusionPayload,
    "theme.mapping": MappingPayload,
    "theme.adjustments": AdjustmentsPayload,
}


def validate_payload(schema_id: str, data) -> BaseModel:
    """Validate parsed JSON against a registered schema.

    Raises :class:`SchemaError` for unknown ids; pydantic's ValidationError
    propagates for invalid payloads (the gateway catches it to re-prompt).
    """
    model = SCHEMAS.get(schema_id)
    if model is None:
        raise SchemaError(f"unknown schema id {schema_id!r}")
    return model.model_validate(data)


__all__ = [
    "SCHEMAS",
    "THEME_TARGET",
    "ValidationError",
    "validate_payload",
    "BriefExtractPayload",
    "DimensionPayload",
    "DimensionsPayload",
    "PersonaPayload",
    "PersonasPayload",
    "ThemePreviewPayload",
    "FeedbackItemPayload",
    "FeedbackPayload",
    "ConflictPayload",
    "QuestionPayload",
    "AnswerPayload",
    "ConclusionPayload",
    "MappingAssignment",
    "MappingPayload",
    "AdjustmentPayload",
    "AdjustmentsPayload",
]
