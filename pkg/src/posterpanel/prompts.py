"""Prompt construction for every pipeline step.

Every step is identified by a stable tag, and every step that produces
feedback, questions, answers, or conclusions embeds the campaign goal and
the raw brief text, so suggestions cannot drift from the brief. The theme
probe prompt is fixed verbatim for reproducibility of the retrieval path:

    poster design, tone: <tone>, colors: <color>
"""

from __future__ import annotations

import json

from .gateway.types import ImagePart, ModelRequest, TextPart

THEME_PROBE_PROMPT = "poster design, tone: {tone}, colors: {color}"
AVATAR_PROMPT = "cartoon style avatar portrait of {name}, flat colors, friendly, circular headshot"


def _grounding(extract) -> str:
    lines = [f"Campaign goal: {extract.goal}"]
    if extract.audience_summary:
        lines.append(f"Audience overview: {extract.audience_summary}")
    if extract.constraints:
        lines.append("Constraints: " + "; ".join(extract.constraints))
    lines.append("Marketing brief (raw):\n" + extract.raw_text)
    return "\n".join(lines)


def _persona_card(persona) -> str:
    return json.dumps({
        "id": persona.id,
        "name": persona.name,
        "summary": persona.summary,
        "background": persona.background,
        "motivation": persona.motivation,
        "pain_point": persona.pain_point,
        "need": persona.need,
        "quote": persona.quote,
        "rationale": persona.rationale,
    }, ensure_ascii=False)


def brief_extract_request(brief_parts) -> ModelRequest:
    return ModelRequest(
        tag="brief.extract",
        system_text=(
            "You analyze marketing briefs. Extract the campaign's high-level goal, "
            "a broad description of the target audience, and any constraints. "
            "Reply with JSON: {goal, audience_summary, constraints: [..]}."
        ),
        user_parts=tuple(brief_parts),
        schema_id="brief.extract",
        temperature_hint=0.2,
    )


def dimensions_request(extract) -> ModelRequest:
    return ModelRequest(
        tag="persona.dimensions",
        system_text=(
            "Identify two audience dimensions that can be steered low or high "
            "without contradicting the brief. Prefer dimensions already present in "
            "the brief and mark those with from_brief=true. Reply with JSON: "
            "{dimensions: [{name, low_label, high_label, from_brief}, ...]} (exactly two, "
            "all four extreme labels distinct)."
        ),
        user_parts=(TextPart(_grounding(extract)),),
        schema_id="persona.dimensions",
        temperature_hint=0.5,
    )


def personas_request(extract, dims) -> ModelRequest:
    d1, d2 = dims
    return ModelRequest(
        tag="persona.personas",
        system_text=(
            "Construct four audience personas, one per combination of the two "
            "dimension extremes. Each persona needs: name (exactly two words), "
            "summary, background, motivation, pain_point, need, quote, rationale, "
            "and its levels on both dimensions. Reply with JSON: {personas: [...]}, "
            "each persona carrying level_1 and level_2 in {low, high}."
        ),
        user_parts=(
            TextPart(_grounding(extract)),
            TextPart(
                f"Dimension 1: {d1.name} (low: {d1.low_label}, high: {d1.high_label})\n"
                f"Dimension 2: {d2.name} (low: {d2.low_label}, high: {d2.high_label})"
            ),
        ),
        schema_id="persona.personas",
        temperature_hint=0.8,
    )


def feedback_request(extract, persona, doc_json: str, doc_pixels) -> ModelRequest:
    return ModelRequest(
        tag="feedback.persona",
        system_text=(
            "You are the audience persona described below, critiquing an advertisement "
            "poster. Give at most one suggestion per text element, at most one per image "
            "element, and exactly one poster-level theme suggestion. Each item: "
            "{target, kind: text|image|theme, opinion, preview, rationale}. For text the "
            "preview is the full replacement string; for image a one-line description of "
            "the image to generate; for theme use target \"THEME\" and preview "
            "{tone, color}. Ground every suggestion in the brief and the goal. "
            "Reply with JSON: {items: [...]}."
        ),
        user_parts=(
            TextPart(_grounding(extract)),
            TextPart("Persona:\n" + _persona_card(persona)),
            TextPart("Poster document JSON:\n" + doc_json),
            ImagePart(doc_pixels),
        ),
        schema_id="feedback.items",
        temperature_hint=0.8,
    )


def conflict_request(unit_json: str) -> ModelRequest:
    return ModelRequest(
        tag="discuss.detect",
        system_text=(
            "Decide whether the feedback items below pull the same component in "
            "genuinely different directions. Reply with JSON: {conflict: bool, "
            "summary: one line, item_ids: [ids involved]} (summary and ids required "
            "only when conflict is true)."
        ),
        user_parts=(TextPart(unit_json),),
        schema_id="discuss.detect",
        temperature_hint=0.3,
    )


def question_request(extract, persona, conflict_summary: str, user_comment: str | None) -> ModelRequest:
    comment = f"User comment to honor: {user_comment}" if user_comment else "No user comment."
    return ModelRequest(
        tag="discuss.question",
        system_text=(
            "You moderate a panel of audience personas resolving a design conflict. "
            "Write one thought-provoking, open-ended question for the persona below, "
            "asking them to articulate their motivation and ways to narrow the "
            "conflict. Reply with JSON: {question}."
        ),
        user_parts=(
            TextPart(_grounding(extract)),
            TextPart(f"Conflict: {conflict_summary}\n{comment}"),
            TextPart("Persona:\n" + _persona_card(persona)),
        ),
        schema_id="discuss.question",
        temperature_hint=0.7,
    )


def answer_request(extract, persona, question: str) -> ModelRequest:
    return ModelRequest(
        tag="discuss.answer",
        system_text=(
            "Answer as the persona below, in an open-minded way that works toward a "
            "compromise. Reply with JSON: {answer}."
        ),
        user_parts=(
            TextPart(_grounding(extract)),
            TextPart("Persona:\n" + _persona_card(persona)),
            TextPart("Moderator's question: " + question),
        ),
        schema_id="discuss.answer",
        temperature_hint=0.8,
    )


def conclusion_request(extract, unit_json: str, transcript_json: str, user_comment: str | None) -> ModelRequest:
    comment = f"User comment to satisfy: {user_comment}" if user_comment else "No user comment."
    return ModelRequest(
        tag="discuss.conclude",
        system_text=(
            "You moderate a panel of audience personas. Draw a conclusion from the "
            "discussion: final feedback with the same shape as an individual item. "
            "Accommodate the answers; if differences remain, you may omit minority "
            "views and list those persona ids in omitted_personas. Reply with JSON: "
            "{target, summary, preview, omitted_personas}."
        ),
        user_parts=(
            TextPart(_grounding(extract)),
            TextPart("Feedback unit:\n" + unit_json),
            TextPart("Discussion transcript:\n" + transcript_json),
            TextPart(comment),
        ),
        schema_id="discuss.conclude",
        temperature_hint=0.5,
    )


def mapping_request(original_json: str, template_json: str) -> ModelRequest:
    return ModelRequest(
        tag="theme.map",
        system_text=(
            "Map each text/image element of the original poster onto a slot of the "
            "template with the same kind. Reply with JSON: {assignments: "
            "[{original_id, slot_id}, ...]}. Leave unmatched elements out."
        ),
        user_parts=(
            TextPart("Original poster JSON:\n" + original_json),
            TextPart("Template JSON:\n" + template_json),
        ),
        schema_id="theme.mapping",
        temperature_hint=0.2,
    )


def overlap_request(doc_json: str, doc_pixels) -> ModelRequest:
    return ModelRequest(
        tag="theme.overlap",
        system_text=(
            "Inspect the rendered poster and its JSON. If any components visually "
            "overlap, return the repositioning (new_x/new_y) or resizing "
            "(new_width/new_height/new_font_size) needed, with a one-line note per "
            "change. Reply with JSON: {adjustments: [...]}; an empty list means the "
            "layout is clean."
        ),
        user_parts=(TextPart(doc_json), ImagePart(doc_pixels)),
        schema_id="theme.adjustments",
        temperature_hint=0.2,
    )
