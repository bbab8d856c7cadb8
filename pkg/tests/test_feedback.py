import pytest

from posterpanel.canvas import CanvasDocument, serialize_document
from posterpanel.errors import BackendError, KindMismatchError
from posterpanel.feedback import (
    FeedbackBatch,
    FeedbackItem,
    ThemeDescriptor,
    apply_image_feedback,
    apply_text_feedback,
    generate_feedback,
    group_units,
    guardrail_check,
    item_from_json,
    item_to_json,
)
from posterpanel.gateway import AssetStore, Gateway, ScriptedBackend
from posterpanel.personas import BriefExtract, Persona, PersonaSet, SteerableDimension

import fixture_factory as ff
from conftest import image_element, text_element
from oracles import doc_diff


def make_pset(n=4):
    grid = [("low", "low"), ("low", "high"), ("high", "low"), ("high", "high")]
    personas = tuple(
        Persona(
            id=f"p{i + 1}", name=f"Persona {'ABCD'[i]}", summary="s", background="b",
            motivation="m", pain_point="pp", need="n", quote="q", rationale="r",
            coords=grid[i],
        )
        for i in range(n)
    )
    dims = (SteerableDimension("d1", "lo1", "hi1"), SteerableDimension("d2", "lo2", "hi2"))
    return PersonaSet(personas=personas, dimensions=dims)


def make_extract():
    return BriefExtract(
        goal="Attract new customers with the Mother's Day promotion",
        audience_summary="local adults",
        constraints=(),
        raw_text="Brew&Bloom cafe brief: bring in new customers in May.",
    )


def make_item(item_id="f1", persona_id="p1", target="t1", kind="text",
              preview="New headline", opinion="op", rationale="ra"):
    return FeedbackItem(item_id=item_id, persona_id=persona_id, target=target,
                        kind=kind, opinion=opinion, preview=preview, rationale=rationale)


@pytest.fixture
def gw(tmp_path):
    fixtures = tmp_path / "fixtures"
    fixtures.mkdir()
    return Gateway(ScriptedBackend(fixtures), AssetStore(tmp_path / "assets")), fixtures


class TestGuardrails:
    def test_unknown_target(self, poster_doc):
        assert guardrail_check(make_item(target="ghost"), poster_doc).rule == "unknown-target"

    def test_theme_with_empty_color(self, poster_doc):
        item = make_item(target="THEME", kind="theme",
                         preview=ThemeDescriptor(tone="warm", color=" "))
        assert guardrail_check(item, poster_doc).rule == "empty-preview-field"

    def test_valid_text_item(self, poster_doc):
        assert guardrail_check(make_item(), poster_doc) is None

    def test_kind_mismatch(self, poster_doc):
        item = make_item(target="img1", kind="text")
        assert guardrail_check(item, poster_doc).rule == "kind-mismatch"

    def test_theme_must_use_sentinel_target(self, poster_doc):
        item = make_item(target="t1", kind="theme",
                         preview=ThemeDescriptor(tone="warm", color="red"))
        assert guardrail_check(item, poster_doc).rule == "bad-theme-target"

    def test_empty_preview(self, poster_doc):
        assert guardrail_check(make_item(preview="  "), poster_doc).rule == "empty-preview-field"


class TestGenerateFeedback:
    def seed(self, fixtures, n_personas=4):
        for i in range(n_personas):
            ff.write_fixture(fixtures, "feedback.persona", i, ff.feedback_items_payload([
                ff.text_item("t1", f"Headline from persona {i + 1}"),
                ff.image_item("img1", f"image idea {i + 1}"),
                ff.theme_item(tone=f"tone {i + 1}"),
            ]))

    def test_cardinality_contract(self, gw, poster_doc):
        gateway, fixtures = gw
        self.seed(fixtures)
        batch = generate_feedback(gateway, poster_doc, make_pset(), make_extract())
        assert len(batch.items) == 12
        assert sum(1 for i in batch.items if i.kind == "theme") == 4
        assert batch.errors == ()
        # one per (persona, target)
        keys = {(i.persona_id, i.target) for i in batch.items}
        assert len(keys) == 12

    def test_items_echo_fixtures(self, gw, poster_doc):
        gateway, fixtures = gw
        self.seed(fixtures)
        batch = generate_feedback(gateway, poster_doc, make_pset(), make_extract())
        first = [i for i in batch.items if i.persona_id == "p1" and i.kind == "text"][0]
        assert first.preview == "Headline from persona 1"
        assert first.item_id.startswith("f")

    def test_mothers_day_style_preview_survives(self, gw, poster_doc):
        gateway, fixtures = gw
        ff.write_fixture(fixtures, "feedback.persona", 0, ff.feedback_items_payload([
            ff.text_item("t1", "Enjoy a coffee on us",
                         opinion="Subtly reference 'Mother's Day' in the text"),
            ff.theme_item(),
        ]))
        batch = generate_feedback(
            gateway, poster_doc,
            PersonaSet(personas=(make_pset().personas[0],), dimensions=make_pset().dimensions),
            make_extract(),
        )
        assert any("Mother's Day" in i.opinion for i in batch.items)

    def test_partial_persona_failure(self, gw, poster_doc):
        gateway, fixtures = gw
        self.seed(fixtures, n_personas=3)  # fourth persona has no fixture
        batch = generate_feedback(gateway, poster_doc, make_pset(), make_extract())
        assert len(batch.items) == 9
        assert len(batch.errors) == 1
        assert batch.errors[0][0] == "p4"

    def test_guardrail_violations_filtered_with_report(self, gw, poster_doc):
        gateway, fixtures = gw
        ff.write_fixture(fixtures, "feedback.persona", 0, ff.feedback_items_payload([
            ff.text_item("missing-element", "x"),
            ff.text_item("t1", "kept"),
            ff.theme_item(),
        ]))
        pset = PersonaSet(personas=(make_pset().personas[0],), dimensions=make_pset().dimensions)
        batch = generate_feedback(gateway, poster_doc, pset, make_extract())
        assert [i.preview for i in batch.items if i.kind == "text"] == ["kept"]
        assert any("unknown-target" in msg for _, msg in batch.errors)

    def test_duplicate_target_dropped(self, gw, poster_doc):
        gateway, fixtures = gw
        ff.write_fixture(fixtures, "feedback.persona", 0, ff.feedback_items_payload([
            ff.text_item("t1", "first"),
            ff.text_item("t1", "second"),
            ff.theme_item(),
        ]))
        pset = PersonaSet(personas=(make_pset().personas[0],), dimensions=make_pset().dimensions)
        batch = generate_feedback(gateway, poster_doc, pset, make_extract())
        texts = [i for i in batch.items if i.kind == "text"]
        assert [i.preview for i in texts] == ["first"]

    def test_all_requests_carry_brief_and_goal(self, gw, poster_doc):
        gateway, fixtures = gw
        self.seed(fixtures)
        extract = make_extract()
        generate_feedback(gateway, poster_doc, make_pset(), extract)
        reqs = [r for r in gateway.backend.request_log if r.tag == "feedback.persona"]
        assert len(reqs) == 4
        for req in reqs:
            text = req.text_content()
            assert extract.raw_text in text
            assert extract.goal in text


class TestGroupUnits:
    def test_theme_items_form_single_unit(self, poster_doc):
        items = [make_item(item_id=f"f{i}", persona_id=f"p{i}", target="THEME", kind="theme",
                           preview=ThemeDescriptor("warm", "red")) for i in range(1, 5)]
        units = group_units(items, poster_doc)
        assert len(units) == 1
        assert units[0].target == "THEME"
        assert len(units[0].items) == 4

    def test_groups_by_target(self, poster_doc):
        items = [
            make_item(item_id="f1", persona_id="p1", target="t1"),
            make_item(item_id="f2", persona_id="p2", target="t1", preview="other"),
            make_item(item_id="f3", persona_id="p1", target="img1", kind="image", preview="pic"),
        ]
        units = group_units(items, poster_doc)
        assert [len(u.items) for u in units] == [2, 1]
        assert units[0].status == "conflict"
        assert units[0].conflict_summary
        assert units[1].status == "resolved"

    def test_empty_input(self):
        assert group_units([]) == []

    def test_partition_property(self, poster_doc):
        items = [
            make_item(item_id=f"f{i}", persona_id=f"p{(i % 4) + 1}",
                      target="t1" if i % 3 == 0 else ("t2" if i % 3 == 1 else "img1"),
                      kind="image" if i % 3 == 2 else "text",
                      preview=f"prev {i}")
            for i in range(9)
        ]
        units = group_units(items, poster_doc)
        flattened = [i.item_id for u in units for i in u.items]
        assert sorted(flattened) == sorted(i.item_id for i in items)
        for u in units:
            assert all((i.target, i.kind) == (u.target, u.kind) for i in u.items)

    def test_unit_order_follows_document(self, poster_doc):
        items = [
            make_item(item_id="f1", target="THEME", kind="theme",
                      preview=ThemeDescriptor("a", "b")),
            make_item(item_id="f2", target="img1", kind="image", preview="p"),
            make_item(item_id="f3", target="t1"),
        ]
        units = group_units(items, poster_doc)
        assert [u.target for u in units] == ["t1", "img1", "THEME"]
        assert [u.unit_id for u in units] == ["u1", "u2", "u3"]


class TestApplyFeedback:
    def test_text_noop_equal(self, poster_doc):
        item = make_item(preview="Spring Sale")
        assert apply_text_feedback(poster_doc, item) == poster_doc

    def test_exact_preview_stored(self, poster_doc):
        item = make_item(preview="Celebrate Mother's Day with Brew&Bloom!")
        out = apply_text_feedback(poster_doc, item)
        assert out.elements[0].payload.content == "Celebrate Mother's Day with Brew&Bloom!"
        assert doc_diff(poster_doc, out) == [("children", 0, "text")]

    def test_kind_mismatch_rejected(self, poster_doc):
        with pytest.raises(KindMismatchError):
            apply_text_feedback(poster_doc, make_item(kind="image", target="img1", preview="p"))

    def test_image_feedback_deterministic(self, gw, poster_doc):
        gateway, _ = gw
        item = make_item(kind="image", target="img1", preview="a mother enjoying coffee")
        out1 = apply_image_feedback(gateway, poster_doc, item)
        out2 = apply_image_feedback(gateway, poster_doc, item)
        assert out1 == out2
        assert out1.elements[2].payload.source.startswith("asset://")
        assert doc_diff(poster_doc, out1) == [("children", 2, "src")]

    def test_backend_failure_leaves_document_unchanged(self, poster_doc, tmp_path):
        class ExplodingBackend(ScriptedBackend):
            def generate_image(self, prompt, tag=None):
                raise BackendError("image backend down")

        gateway = Gateway(ExplodingBackend(None), AssetStore(tmp_path / "assets"))
        before = serialize_document(poster_doc)
        with pytest.raises(BackendError):
            apply_image_feedback(gateway, poster_doc,
                                 make_item(kind="image", target="img1", preview="p"))
        assert serialize_document(poster_doc) == before


def test_item_json_round_trip():
    for item in (make_item(), make_item(kind="theme", target="THEME",
                                        preview=ThemeDescriptor("warm", "red"))):
        assert item_from_json(item_to_json(item)) == item
