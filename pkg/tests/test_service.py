import json
import random
import shutil
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from posterpanel.canvas import parse_document, serialize_document
from posterpanel.gateway import AssetStore, Gateway, ScriptedBackend
from posterpanel.personas import MarketingBrief, TextPage, brief_from_path
from posterpanel.service import SessionStore, create_app
from posterpanel.themes import content_multisets

import fixture_factory as ff
from oracles import doc_diff

FIXTURES = Path(__file__).parent / "fixtures"
CAFE = FIXTURES / "cafe"
TEMPLATES = FIXTURES / "templates"


def make_store(tmp_path, fixtures_dir, data_name="data", template_corpus=TEMPLATES):
    gateway = Gateway(
        ScriptedBackend(fixtures_dir), AssetStore(tmp_path / data_name / "assets"))
    return SessionStore(tmp_path / data_name, gateway, template_corpus=template_corpus)


def cafe_fixture_copy(tmp_path, extra_theme=False):
    fixtures = tmp_path / "scripted"
    shutil.copytree(CAFE / "scripted", fixtures)
    if extra_theme:
        ff.write_fixture(fixtures, "theme.map", 0, ff.mapping_payload([
            ("t1", "title"), ("t2", "body"), ("img1", "photo")]))
        ff.write_fixture(fixtures, "theme.overlap", 0, ff.adjustments_payload())
    return fixtures


def cafe_payload():
    return {
        "brief": {
            "source_name": "cafe-brief",
            "pages": [{"text": (CAFE / "brief.txt").read_text(encoding="utf-8")}],
        },
        "draft": (CAFE / "draft.json").read_text(encoding="utf-8"),
    }


def wait_for(client, session_id, status, timeout=10.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        body = client.get(f"/sessions/{session_id}/status").json()
        if body["status"] == status:
            return body
        if body["status"] == "failed":
            raise AssertionError(f"pipeline failed: {body['error']}")
        time.sleep(0.02)
    raise AssertionError(f"timed out waiting for {status}")


@pytest.fixture
def client(tmp_path):
    store = make_store(tmp_path, cafe_fixture_copy(tmp_path, extra_theme=True))
    return TestClient(create_app(store)), store


def ready_session(client):
    api, _ = client
    session_id = api.post("/sessions", json=cafe_payload()).json()["session_id"]
    wait_for(api, session_id, "feedback_ready")
    return session_id


class TestLifecycle:
    def test_create_reaches_feedback_ready(self, client):
        api, _ = client
        resp = api.post("/sessions", json=cafe_payload())
        assert resp.status_code == 201
        session_id = resp.json()["session_id"]
        body = wait_for(api, session_id, "feedback_ready")
        assert body["snapshots"] == 1

    def test_corrupt_draft_rejected_without_session(self, client):
        api, store = client
        payload = cafe_payload()
        payload["draft"] = "{broken"
        resp = api.post("/sessions", json=payload)
        assert resp.status_code == 400
        assert store.list_ids() == []

    def test_two_creates_distinct_ids(self, client):
        api, _ = client
        a = api.post("/sessions", json=cafe_payload()).json()["session_id"]
        b = api.post("/sessions", json=cafe_payload()).json()["session_id"]
        assert a != b

    def test_unknown_session_404(self, client):
        api, _ = client
        assert api.get("/sessions/nope/status").status_code == 404


class TestPersonas:
    def test_personas_listed_after_ready(self, client):
        api, _ = client
        session_id = ready_session(client)
        body = api.get(f"/sessions/{session_id}/personas").json()
        assert len(body["personas"]) == 4
        assert body["personas"][0]["name"] == "Quiet Taster"
        assert [d["name"] for d in body["dimensions"]] == [
            "frequency of visits", "engagement level"]

    def test_manual_persona_appended(self, client):
        api, _ = client
        session_id = ready_session(client)
        details = {
            "name": "Retired Teacher", "summary": "s", "background": "b",
            "motivation": "m", "pain_point": "p", "need": "n",
            "quote": "q", "rationale": "r",
        }
        body = api.post(f"/sessions/{session_id}/personas", json=details).json()
        assert len(body["personas"]) == 5
        assert body["personas"][-1]["origin"] == "manual"


class TestUnitsAndDocument:
    def test_units_grouped_with_conflict_state(self, client):
        api, _ = client
        session_id = ready_session(client)
        units = api.get(f"/sessions/{session_id}/units").json()["units"]
        by_target = {u["target"]: u for u in units}
        assert set(by_target) == {"t1", "t2", "img1", "THEME"}
        assert by_target["t1"]["status"] == "conflict"
        assert "Mother's Day" in by_target["t1"]["conflict_summary"]
        assert by_target["t2"]["status"] == "resolved"
        assert by_target["THEME"]["status"] == "conflict"

    def test_document_is_canonical(self, client):
        api, _ = client
        session_id = ready_session(client)
        body = api.get(f"/sessions/{session_id}/document").json()
        doc = parse_document(body["document"])
        assert serialize_document(doc) == body["document"]


class TestAccept:
    def test_accept_text_diff_confined(self, client):
        api, _ = client
        session_id = ready_session(client)
        before = parse_document(api.get(f"/sessions/{session_id}/document").json()["document"])
        resp = api.post(f"/sessions/{session_id}/accept", json={"ref": "f1"})
        assert resp.status_code == 200
        after = parse_document(resp.json()["document"])
        assert doc_diff(before, after) == [("children", 0, "text")]
        units = api.get(f"/sessions/{session_id}/units").json()["units"]
        assert next(u for u in units if u["target"] == "t1")["status"] == "resolved"

    def test_accept_is_idempotent(self, client):
        api, _ = client
        session_id = ready_session(client)
        first = api.post(f"/sessions/{session_id}/accept", json={"ref": "f1"}).json()
        second = api.post(f"/sessions/{session_id}/accept", json={"ref": "f1"}).json()
        assert first["snapshot"] == second["snapshot"]
        assert api.get(f"/sessions/{session_id}/status").json()["snapshots"] == 2

    def test_accept_image_generates_asset(self, client):
        api, _ = client
        session_id = ready_session(client)
        resp = api.post(f"/sessions/{session_id}/accept", json={"ref": "f2"})
        doc = parse_document(resp.json()["document"])
        img = next(e for e in doc.elements if e.id == "img1")
        assert img.payload.source.startswith("asset://")

    def test_unknown_ref_400(self, client):
        api, _ = client
        session_id = ready_session(client)
        assert api.post(f"/sessions/{session_id}/accept",
                        json={"ref": "zz"}).status_code == 400

    def test_theme_options_then_accept(self, client):
        api, _ = client
        session_id = ready_session(client)
        options = api.get(f"/sessions/{session_id}/theme-options/f3").json()
        assert options["query"] == {"tone": "calm and cozy", "color": "soft pastels"}
        assert len(options["ranked"]) == 3
        assert all(o["preview"].startswith("asset://") for o in options["ranked"])
        before = parse_document(api.get(f"/sessions/{session_id}/document").json()["document"])
        resp = api.post(f"/sessions/{session_id}/accept",
                        json={"ref": "f3", "template_id": "warm-welcome"})
        assert resp.status_code == 200
        after = parse_document(resp.json()["document"])
        assert content_multisets(after) == content_multisets(before)
        assert resp.json()["provenance"]["template_id"] == "warm-welcome"

    def test_theme_accept_without_template_400(self, client):
        api, _ = client
        session_id = ready_session(client)
        assert api.post(f"/sessions/{session_id}/accept",
                        json={"ref": "f3"}).status_code == 400


class TestAssets:
    def test_avatar_asset_served_as_png(self, client):
        api, _ = client
        session_id = ready_session(client)
        avatar = api.get(f"/sessions/{session_id}/personas").json()["personas"][0]["avatar"]
        digest = avatar.removeprefix("asset://")
        resp = api.get(f"/assets/{digest}")
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "image/png"
        assert resp.content[:4] == b"\x89PNG"

    def test_unknown_asset_404(self, client):
        api, _ = client
        assert api.get("/assets/" + "0" * 64).status_code == 404


class TestManualEdit:
    def test_resubmit_current_appends_equal_snapshot(self, client):
        api, _ = client
        session_id = ready_session(client)
        doc = api.get(f"/sessions/{session_id}/document").json()["document"]
        resp = api.post(f"/sessions/{session_id}/manual-edit", json={"document": doc})
        assert resp.json()["snapshot"] == 1
        assert resp.json()["document"] == doc

    def test_edited_text_diff_confined(self, client):
        api, _ = client
        session_id = ready_session(client)
        raw = api.get(f"/sessions/{session_id}/document").json()["document"]
        edited = json.loads(raw)
        edited["children"][0]["text"] = "A quieter welcome"
        before = parse_document(raw)
        resp = api.post(f"/sessions/{session_id}/manual-edit", json={"document": edited})
        after = parse_document(resp.json()["document"])
        assert doc_diff(before, after) == [("children", 0, "text")]

    def test_duplicate_ids_rejected(self, client):
        api, _ = client
        session_id = ready_session(client)
        raw = json.loads(api.get(f"/sessions/{session_id}/document").json()["document"])
        raw["children"].append(dict(raw["children"][0]))
        resp = api.post(f"/sessions/{session_id}/manual-edit", json={"document": raw})
        assert resp.status_code == 400


class TestDiscussionEndpoints:
    def test_open_without_conflict_409(self, client):
        api, _ = client
        session_id = ready_session(client)
        units = api.get(f"/sessions/{session_id}/units").json()["units"]
        calm = next(u for u in units if u["target"] == "t2")
        resp = api.post(f"/sessions/{session_id}/units/{calm['unit_id']}/discussion")
        assert resp.status_code == 409

    def unit_for(self, api, session_id, target):
        units = api.get(f"/sessions/{session_id}/units").json()["units"]
        return next(u for u in units if u["target"] == target)["unit_id"]

    def test_full_flow_streams_six_turn_events(self, client):
        api, _ = client
        session_id = ready_session(client)
        uid = self.unit_for(api, session_id, "t1")
        start_seq = api.get(f"/sessions/{session_id}/status").json()["last_seq"]
        assert api.post(f"/sessions/{session_id}/units/{uid}/discussion").status_code == 201
        api.post(f"/sessions/{session_id}/units/{uid}/comment", json={"comment": None})
        done = api.post(f"/sessions/{session_id}/units/{uid}/advance").json()
        assert done["state"] == "concluded"
        assert len(done["transcript"]) == 6
        with api.stream(
            "GET",
            f"/sessions/{session_id}/events",
            params={"cursor": start_seq, "follow": False},
        ) as resp:
            lines = [l for l in resp.iter_lines() if l.startswith("data: ")]
        events = [json.loads(l[len("data: "):]) for l in lines]
        turn_events = [e for e in events if e["kind"] == "turn"]
        # open(1) + comment(1, no turn) + questions(2) + answers(2) + conclusion(1)
        assert len(turn_events) == 7
        turns = [e["payload"]["turn"] for e in turn_events if e["payload"]["turn"]]
        assert [t["role_tag"] for t in turns] == [
            "comment_request", "question", "question", "answer", "answer",
            "conclusion_statement"]
        assert turn_events[-1]["payload"]["discussion"]["state"] == "concluded"

    def test_conclusion_resolves_unit_and_is_acceptable(self, client):
        api, _ = client
        session_id = ready_session(client)
        uid = self.unit_for(api, session_id, "t1")
        api.post(f"/sessions/{session_id}/units/{uid}/discussion")
        api.post(f"/sessions/{session_id}/units/{uid}/comment", json={"comment": None})
        api.post(f"/sessions/{session_id}/units/{uid}/advance")
        units = api.get(f"/sessions/{session_id}/units").json()["units"]
        unit = next(u for u in units if u["unit_id"] == uid)
        assert unit["status"] == "resolved"
        assert "Mother's Day" in unit["conclusion"]["summary"]
        resp = api.post(f"/sessions/{session_id}/accept",
                        json={"ref": f"conclusion:{uid}"})
        assert resp.status_code == 200
        doc = parse_document(resp.json()["document"])
        headline = next(e for e in doc.elements if e.id == "t1")
        assert headline.payload.content.startswith("Celebrate Mother's Day")

    def test_comment_in_wrong_state_409(self, client):
        api, _ = client
        session_id = ready_session(client)
        uid = self.unit_for(api, session_id, "t1")
        api.post(f"/sessions/{session_id}/units/{uid}/discussion")
        api.post(f"/sessions/{session_id}/units/{uid}/comment", json={"comment": None})
        resp = api.post(f"/sessions/{session_id}/units/{uid}/comment",
                        json={"comment": "too late"})
        assert resp.status_code == 409

    def test_advance_before_comment_409(self, client):
        api, _ = client
        session_id = ready_session(client)
        uid = self.unit_for(api, session_id, "t1")
        api.post(f"/sessions/{session_id}/units/{uid}/discussion")
        resp = api.post(f"/sessions/{session_id}/units/{uid}/advance")
        assert resp.status_code == 409


class TestEventStream:
    def test_cursor_replay_no_gaps(self, client):
        api, _ = client
        session_id = ready_session(client)
        api.post(f"/sessions/{session_id}/accept", json={"ref": "f1"})
        with api.stream("GET", f"/sessions/{session_id}/events",
                        params={"cursor": 0, "follow": False}) as resp:
            all_lines = [l for l in resp.iter_lines() if l.startswith("data: ")]
        all_events = [json.loads(l[6:]) for l in all_lines]
        seqs = [e["seq"] for e in all_events]
        assert seqs == list(range(1, len(seqs) + 1))
        mid = seqs[len(seqs) // 2]
        with api.stream("GET", f"/sessions/{session_id}/events",
                        params={"cursor": mid, "follow": False}) as resp:
            tail = [json.loads(l[6:]) for l in resp.iter_lines() if l.startswith("data: ")]
        assert [e["seq"] for e in tail] == [s for s in seqs if s > mid]


class TestExportImport:
    def test_fresh_session_archive_has_one_snapshot(self, client):
        api, _ = client
        session_id = ready_session(client)
        archive = api.get(f"/sessions/{session_id}/export").json()
        assert len(archive["rendered"]["history"]) == 1

    def test_snapshot_count_matches_operations(self, client):
        api, _ = client
        session_id = ready_session(client)
        api.post(f"/sessions/{session_id}/accept", json={"ref": "f1"})
        doc = api.get(f"/sessions/{session_id}/document").json()["document"]
        api.post(f"/sessions/{session_id}/manual-edit", json={"document": doc})
        archive = api.get(f"/sessions/{session_id}/export").json()
        assert len(archive["rendered"]["history"]) == 3

    def test_import_reconstructs_identical_state(self, client, tmp_path):
        api, _ = client
        session_id = ready_session(client)
        api.post(f"/sessions/{session_id}/accept", json={"ref": "f1"})
        archive = api.get(f"/sessions/{session_id}/export").json()

        other_store = make_store(tmp_path, None, data_name="data2", template_corpus=None)
        other_api = TestClient(create_app(other_store))
        resp = other_api.post("/sessions/import", json=archive)
        assert resp.status_code == 201
        reimported = other_api.get(f"/sessions/{session_id}/export").json()
        assert reimported == archive

    def test_import_existing_id_conflicts(self, client):
        api, _ = client
        session_id = ready_session(client)
        archive = api.get(f"/sessions/{session_id}/export").json()
        assert api.post("/sessions/import", json=archive).status_code == 409


class TestCrashSafety:
    def drive_random_session(self, store, rng):
        brief = brief_from_path(CAFE / "brief.txt")
        draft = parse_document((CAFE / "draft.json").read_text(encoding="utf-8"))
        session_id = store.create_session(brief, draft, run_async=False)
        session = store.get(session_id)
        assert session.status == "feedback_ready"
        ops = rng.sample(["accept_text", "manual_edit", "discussion", "accept_image"],
                         k=rng.randint(1, 4))
        for op in ops:
            if op == "accept_text":
                store.accept(session_id, "f1")
            elif op == "accept_image":
                store.accept(session_id, "f2")
            elif op == "manual_edit":
                from posterpanel.canvas import set_text
                store.manual_edit(
                    session_id, set_text(session.document, "t2", f"edit {rng.random():.3f}"))
            elif op == "discussion":
                uid = next(u.unit_id for u in session.units if u.target == "t1")
                store.open_unit_discussion(session_id, uid)
                store.submit_unit_comment(session_id, uid, None)
                store.advance_discussion(session_id, uid)
        return session_id

    def test_reload_after_abandon_reconstructs_state(self, tmp_path):
        rng = random.Random(90125)
        for i in range(3):
            base = tmp_path / f"case{i}"
            base.mkdir()
            store = make_store(base, cafe_fixture_copy(base), template_corpus=None)
            session_id = self.drive_random_session(store, rng)
            expected = store.export_archive(session_id)
            del store  # no graceful shutdown path exists; logs are fsynced per event

            reloaded = make_store(base, None, template_corpus=None)
            assert reloaded.export_archive(session_id) == expected

    def test_sigkilled_server_state_survives_restart(self, tmp_path):
        import os
        import signal
        import socket
        import subprocess
        import sys

        import httpx

        base = tmp_path / "killcase"
        base.mkdir()
        fixtures = cafe_fixture_copy(base)
        data_dir = base / "data"
        with socket.socket() as s:
            s.bind(("127.0.0.1", 0))
            port = s.getsockname()[1]
        proc = subprocess.Popen(
            [sys.executable, "-m", "posterpanel.cli", "serve",
             "--backend", f"scripted:{fixtures}", "--data-dir", str(data_dir),
             "--port", str(port)],
            stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
        )
        base_url = f"http://127.0.0.1:{port}"
        try:
            deadline = time.time() + 20
            while time.time() < deadline:
                try:
                    if httpx.get(f"{base_url}/sessions/x/status", timeout=1).status_code == 404:
                        break
                except httpx.HTTPError:
                    time.sleep(0.1)
            else:
                raise AssertionError("server did not come up")
            session_id = httpx.post(
                f"{base_url}/sessions", json=cafe_payload(), timeout=10,
            ).json()["session_id"]
            deadline = time.time() + 20
            while time.time() < deadline:
                status = httpx.get(
                    f"{base_url}/sessions/{session_id}/status", timeout=5).json()
                if status["status"] == "feedback_ready":
                    break
                assert status["status"] != "failed", status
                time.sleep(0.1)
            httpx.post(f"{base_url}/sessions/{session_id}/accept",
                       json={"ref": "f1"}, timeout=10)
            expected = httpx.get(
                f"{base_url}/sessions/{session_id}/export", timeout=10).json()
        finally:
            os.kill(proc.pid, signal.SIGKILL)
            proc.wait(timeout=10)

        reloaded = make_store(base, None, template_corpus=None)
        assert reloaded.export_archive(session_id) == expected

    def test_torn_tail_line_ignored_on_replay(self, tmp_path):
        base = tmp_path / "torn"
        base.mkdir()
        store = make_store(base, cafe_fixture_copy(base), template_corpus=None)
        brief = MarketingBrief(pages=(TextPage("short brief"),))
        draft = parse_document((CAFE / "draft.json").read_text(encoding="utf-8"))
        # pipeline will fail on missing fixtures for this second session; that's fine
        session_id = store.create_session(
            brief_from_path(CAFE / "brief.txt"), draft, run_async=False)
        expected = store.export_archive(session_id)
        log = base / "data" / "sessions" / session_id / "events.jsonl"
        with open(log, "a", encoding="utf-8") as fh:
            fh.write('{"seq": 999, "session_id": "')  # crash mid-write
        reloaded = make_store(base, None, template_corpus=None)
        assert reloaded.export_archive(session_id) == expected
