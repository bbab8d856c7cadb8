import numpy as np
import pytest

from posterpanel.errors import GenerationError, InvalidDocumentError
from posterpanel.gateway import AssetStore, Gateway, ScriptedBackend
from posterpanel.personas import (
    GRID_ORDER,
    ImagePage,
    MarketingBrief,
    TextPage,
    add_manual_persona,
    brief_from_path,
    build_personas,
    derive_dimensions,
    extract_brief,
    generate_avatar,
    persona_set_from_json,
    persona_set_to_json,
)

import fixture_factory as ff

CAFE_BRIEF = (
    "Brew&Bloom is a neighborhood cafe running a Mother's Day promotion in May. "
    "Goal: bring in new customers while keeping regulars engaged. "
    "Target audience: local adults who enjoy a relaxed coffee break."
)


@pytest.fixture
def gw(tmp_path):
    fixtures = tmp_path / "fixtures"
    fixtures.mkdir()
    gateway = Gateway(ScriptedBackend(fixtures), AssetStore(tmp_path / "assets"))
    return gateway, fixtures


def seed_standard_fixtures(fixtures):
    ff.write_fixture(fixtures, "brief.extract", 0,
                     ff.extract_payload(goal="Attract new customers with the Mother's Day promotion"))
    ff.write_fixture(fixtures, "persona.dimensions", 0, ff.dimensions_payload())
    ff.write_fixture(fixtures, "persona.personas", 0, ff.personas_payload())


class TestBrief:
    def test_requires_a_page(self):
        with pytest.raises(InvalidDocumentError):
            MarketingBrief(pages=())

    def test_rejects_blank_page(self):
        with pytest.raises(InvalidDocumentError):
            MarketingBrief(pages=(TextPage("   "),))

    def test_raw_text_single_page(self):
        brief = MarketingBrief(pages=(TextPage(CAFE_BRIEF),))
        assert brief.raw_text() == CAFE_BRIEF

    def test_raw_text_marks_image_pages(self):
        brief = MarketingBrief(pages=(
            TextPage("page one"), ImagePage(np.zeros((4, 4, 3), dtype=np.uint8))))
        assert brief.raw_text() == "page one\n\n[image page 2]"

    def test_brief_from_text_file(self, tmp_path):
        path = tmp_path / "brief.txt"
        path.write_text(CAFE_BRIEF, encoding="utf-8")
        brief = brief_from_path(path)
        assert brief.pages == (TextPage(CAFE_BRIEF),)
        assert brief.source_name == "brief.txt"

    def test_brief_from_directory(self, tmp_path):
        from posterpanel.gateway import encode_png
        d = tmp_path / "brief"
        d.mkdir()
        (d / "01.txt").write_text("first page", encoding="utf-8")
        (d / "02.png").write_bytes(encode_png(np.zeros((4, 4, 3), dtype=np.uint8)))
        brief = brief_from_path(d)
        assert isinstance(brief.pages[0], TextPage)
        assert isinstance(brief.pages[1], ImagePage)


class TestExtractBrief:
    def test_extract_carries_raw_text_and_fixture_goal(self, gw):
        gateway, fixtures = gw
        seed_standard_fixtures(fixtures)
        brief = MarketingBrief(pages=(TextPage(CAFE_BRIEF),))
        extract = extract_brief(gateway, brief)
        assert "Mother's Day" in extract.goal
        assert extract.raw_text == CAFE_BRIEF

    def test_generation_error_propagates(self, gw):
        gateway, _ = gw
        brief = MarketingBrief(pages=(TextPage(CAFE_BRIEF),))
        with pytest.raises(GenerationError):
            extract_brief(gateway, brief)


class TestDeriveDimensions:
    def test_two_dimensions_in_order(self, gw):
        gateway, fixtures = gw
        seed_standard_fixtures(fixtures)
        extract = extract_brief(gateway, MarketingBrief(pages=(TextPage(CAFE_BRIEF),)))
        d1, d2 = derive_dimensions(gateway, extract)
        assert (d1.name, d2.name) == ("frequency of visits", "engagement level")
        assert d1.source == "from_brief"
        assert d2.source == "generated"

    def test_duplicate_labels_rejected_via_schema(self, gw):
        gateway, fixtures = gw
        seed_standard_fixtures(fixtures)
        ff.write_fixture(fixtures, "persona.dimensions", 0,
                         ff.dimensions_payload(low1="same", high1="x", low2="same", high2="y"))
        extract = extract_brief(gateway, MarketingBrief(pages=(TextPage(CAFE_BRIEF),)))
        with pytest.raises(GenerationError):
            derive_dimensions(gateway, extract)

    def test_three_dimensions_rejected(self, gw):
        gateway, fixtures = gw
        seed_standard_fixtures(fixtures)
        payload = ff.dimensions_payload()
        payload["dimensions"].append(
            {"name": "third", "low_label": "a", "high_label": "b", "from_brief": False})
        ff.write_fixture(fixtures, "persona.dimensions", 0, payload)
        extract = extract_brief(gateway, MarketingBrief(pages=(TextPage(CAFE_BRIEF),)))
        with pytest.raises(GenerationError):
            derive_dimensions(gateway, extract)


def build_standard_set(gateway, fixtures):
    seed_standard_fixtures(fixtures)
    extract = extract_brief(gateway, MarketingBrief(pages=(TextPage(CAFE_BRIEF),)))
    dims = derive_dimensions(gateway, extract)
    return extract, build_personas(gateway, extract, dims)


class TestBuildPersonas:
    def test_four_personas_cover_grid(self, gw):
        gateway, fixtures = gw
        _, pset = build_standard_set(gateway, fixtures)
        assert [p.id for p in pset.personas] == ["p1", "p2", "p3", "p4"]
        assert [p.coords for p in pset.personas] == list(GRID_ORDER)
        pset.check_grid()

    def test_names_are_two_words(self, gw):
        gateway, fixtures = gw
        _, pset = build_standard_set(gateway, fixtures)
        for p in pset.personas:
            assert len(p.name.split()) == 2

    def test_every_persona_gets_an_avatar(self, gw):
        gateway, fixtures = gw
        _, pset = build_standard_set(gateway, fixtures)
        assert all(p.avatar.startswith("asset://") for p in pset.personas)

    def test_coords_collision_rejected(self, gw):
        gateway, fixtures = gw
        seed_standard_fixtures(fixtures)
        bad = ff.personas_payload()
        bad["personas"][1]["level_1"] = "low"
        bad["personas"][1]["level_2"] = "low"
        ff.write_fixture(fixtures, "persona.personas", 0, bad)
        extract = extract_brief(gateway, MarketingBrief(pages=(TextPage(CAFE_BRIEF),)))
        dims = derive_dimensions(gateway, extract)
        with pytest.raises(GenerationError):
            build_personas(gateway, extract, dims)

    def test_determinism_under_scripted_backend(self, tmp_path):
        def run(subdir):
            fixtures = tmp_path / subdir
            fixtures.mkdir()
            gateway = Gateway(ScriptedBackend(fixtures), AssetStore(tmp_path / "assets"))
            _, pset = build_standard_set(gateway, fixtures)
            return persona_set_to_json(pset)

        assert run("a") == run("b")


class TestManualPersona:
    def manual_details(self, quote="Keep it simple"):
        return {
            "name": "Retired Teacher",
            "summary": "calm weekday visitor",
            "background": "taught for 30 years",
            "motivation": "quiet moments",
            "pain_point": "noisy venues",
            "need": "a calm corner",
            "quote": quote,
            "rationale": "represents daytime regulars",
        }

    def test_appended_after_grid(self, gw):
        gateway, fixtures = gw
        _, pset = build_standard_set(gateway, fixtures)
        bigger = add_manual_persona(gateway, pset, self.manual_details())
        assert len(bigger.personas) == 5
        added = bigger.personas[-1]
        assert added.origin == "manual"
        assert added.coords is None
        assert added.id == "m1"

    def test_two_additions_distinct_ids(self, gw):
        gateway, fixtures = gw
        _, pset = build_standard_set(gateway, fixtures)
        pset = add_manual_persona(gateway, pset, self.manual_details())
        pset = add_manual_persona(gateway, pset, self.manual_details(quote="Another voice"))
        assert len(pset.personas) == 6
        assert pset.personas[-2].id != pset.personas[-1].id

    def test_empty_field_names_the_field(self, gw):
        gateway, fixtures = gw
        _, pset = build_standard_set(gateway, fixtures)
        details = self.manual_details(quote="")
        with pytest.raises(InvalidDocumentError, match="quote"):
            add_manual_persona(gateway, pset, details)


class TestAvatars:
    def test_same_name_same_asset(self, gw):
        gateway, fixtures = gw
        _, pset = build_standard_set(gateway, fixtures)
        p = pset.personas[0]
        assert generate_avatar(gateway, p) == generate_avatar(gateway, p)

    def test_distinct_names_distinct_assets(self, gw):
        gateway, fixtures = gw
        _, pset = build_standard_set(gateway, fixtures)
        avatars = {p.avatar for p in pset.personas}
        assert len(avatars) == 4


def test_persona_set_json_round_trip(gw):
    gateway, fixtures = gw[0], gw[1]
    _, pset = build_standard_set(gateway, fixtures)
    assert persona_set_from_json(persona_set_to_json(pset)) == pset


def test_downstream_prompts_embed_brief_and_goal(gw):
    gateway, fixtures = gw
    extract, _ = build_standard_set(gateway, fixtures)
    log = gateway.backend.request_log
    persona_steps = [r for r in log if r.tag in ("persona.dimensions", "persona.personas")]
    assert persona_steps
    for req in persona_steps:
        text = req.text_content()
        assert extract.raw_text in text
        assert extract.goal in text
