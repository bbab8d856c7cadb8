"""Batch/offline driver and service launcher.

Exit codes: 0 success, 1 runtime failure, 2 usage error. All outputs are
the JSON formats defined by the engines; under the scripted backend every
command is byte-deterministic, which CI relies on.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .canvas import parse_document, serialize_document
from .discussion import (
    conclusion_to_json,
    discussion_to_json,
    open_discussion,
    submit_comment,
    ask_questions,
    collect_answers,
    conclude,
    detect_conflict,
    resolve_unit,
)
from .errors import PosterPanelError
from .feedback import (
    apply_image_feedback,
    apply_text_feedback,
    generate_feedback,
    group_units,
    item_from_json,
    item_to_json,
    unit_to_json,
)
from .gateway import AssetStore, Gateway
from .personas import (
    brief_from_path,
    build_personas,
    derive_dimensions,
    extract_brief,
    persona_set_to_json,
)
from .service import build_gateway, create_app, load_config, parse_backend_flag, SessionStore
from .themes import (
    DEFAULT_K,
    apply_theme,
    ingest_templates,
    load_index,
    query_templates,
    save_index,
)
from .feedback import ThemeDescriptor


def _gateway(backend_flag: str, assets_dir: Path, config_path: str | None) -> Gateway:
    cfg = load_config(config_path)
    backend, fixtures = parse_backend_flag(backend_flag) if backend_flag else (cfg.backend, cfg.fixtures_dir)
    cfg.backend = backend
    if fixtures is not None:
        cfg.fixtures_dir = fixtures
    return build_gateway(cfg, assets=AssetStore(assets_dir))


def _dump(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
def main():
    """Audience persona agents that critique and edit advertisement posters."""


@main.command("run")
@click.argument("brief_path", type=click.Path(exists=True, path_type=Path))
@click.argument("draft_path", type=click.Path(exists=True, path_type=Path))
@click.option("--backend", default="fallback", show_default=True,
              help="live | fallback | scripted:<fixture dir>")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--max-rounds", default=5, show_default=True,
              help="discussion round bound")
def cmd_run(brief_path: Path, draft_path: Path, backend: str, out_dir: Path,
            config_path, max_rounds: int):
    """Run the full pipeline on a brief + draft and write all artifacts."""
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        gw = _gateway(backend, out_dir / "assets", config_path)
        brief = brief_from_path(brief_path)
        draft = parse_document(draft_path.read_text(encoding="utf-8"))

        extract = extract_brief(gw, brief)
        dims = derive_dimensions(gw, extract)
        personas = build_personas(gw, extract, dims)
        _dump(out_dir / "extract.json", {
            "goal": extract.goal, "audience_summary": extract.audience_summary,
            "constraints": list(extract.constraints), "raw_text": extract.raw_text})
        _dump(out_dir / "personas.json", persona_set_to_json(personas))

        batch = generate_feedback(gw, draft, personas, extract)
        _dump(out_dir / "feedback.json", {
            "items": [item_to_json(i) for i in batch.items],
            "errors": [list(e) for e in batch.errors]})

        units = group_units(batch.items, draft)
        conclusions = {}
        final_units = []
        for unit in units:
            report = detect_conflict(gw, unit)
            if report is None:
                from dataclasses import replace
                final_units.append(replace(unit, status="resolved", conflict_summary=None))
                continue
            # auto-discussion: no user comment, for a reproducible batch baseline
            d = open_discussion(unit, report, max_rounds=max_rounds,
                                discussion_id=f"d-{unit.unit_id}")
            submit_comment(d, None)
            ask_questions(gw, d, unit, personas, extract)
            collect_answers(gw, d, personas, extract)
            conclude(gw, d, unit, extract, draft)
            _dump(out_dir / "discussions" / f"{unit.unit_id}.json", discussion_to_json(d))
            conclusions[unit.unit_id] = conclusion_to_json(d.conclusion)
            final_units.append(resolve_unit(unit, d.conclusion))
        _dump(out_dir / "units.json", [unit_to_json(u) for u in final_units])
        _dump(out_dir / "conclusions.json", conclusions)
        click.echo(f"wrote {out_dir}")
    except PosterPanelError as exc:
        _fail(str(exc))


@main.command("ingest-templates")
@click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--backend", default="fallback", show_default=True)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
def cmd_ingest_templates(corpus_dir: Path, out_path: Path, backend: str, config_path):
    """Embed a template corpus and persist the index."""
    try:
        gw = _gateway(backend, out_path.parent / "assets", config_path)
        result = ingest_templates(gw, corpus_dir)
        save_index(result.index, out_path)
        for warning in result.warnings:
            click.echo(f"warning: {warning}", err=True)
        click.echo(f"ingested {len(result.index.entries)} templates -> {out_path}")
    except PosterPanelError as exc:
        _fail(str(exc))


@main.command("query-themes")
@click.option("--index", "index_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--tone", required=True)
@click.option("--color", required=True)
@click.option("-k", default=DEFAULT_K, show_default=True)
@click.option("--backend", default="fallback", show_default=True)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
def cmd_query_themes(index_path: Path, tone: str, color: str, k: int, backend: str,
                     config_path):
    """Rank indexed templates against a tone/color descriptor."""
    try:
        gw = _gateway(backend, index_path.parent / "assets", config_path)
        index = load_index(index_path)
        if index.embedder_id != gw.embedder_id:
            _fail(f"index was embedded by {index.embedder_id!r}, "
                  f"gateway provides {gw.embedder_id!r}")
        ranked = query_templates(gw, index, ThemeDescriptor(tone=tone, color=color), k=k)
        for template_id, similarity in ranked.ranked:
            click.echo(f"{template_id}\t{similarity:.6f}")
    except PosterPanelError as exc:
        _fail(str(exc))


@main.command("apply")
@click.argument("ref")
@click.option("--run-dir", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--draft", "draft_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", default=None, type=click.Path(path_type=Path))
@click.option("--template-file", default=None, type=click.Path(exists=True, path_type=Path),
              help="template document, required for theme refs")
@click.option("--backend", default="fallback", show_default=True)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
def cmd_apply(ref: str, run_dir: Path, draft_path: Path, out_path, template_file,
              backend: str, config_path):
    """Apply one feedback item or conclusion from a run directory to a draft."""
    try:
        gw = _gateway(backend, run_dir / "assets", config_path)
        draft = parse_document(draft_path.read_text(encoding="utf-8"))
        if ref.startswith("conclusion:"):
            conclusions = json.loads((run_dir / "conclusions.json").read_text(encoding="utf-8"))
            unit_id = ref.split(":", 1)[1]
            if unit_id not in conclusions:
                _fail(f"no conclusion for unit {unit_id!r} in {run_dir}")
            raw = conclusions[unit_id]
            if isinstance(raw["preview"], dict):
                kind = "theme"
            else:  # preview string: kind follows the targeted element
                element = next((e for e in draft.elements if e.id == raw["target"]), None)
                kind = element.kind if element is not None else "text"
            item = item_from_json({
                "item_id": ref, "persona_id": "moderator", "target": raw["target"],
                "kind": kind, "opinion": raw["summary"], "preview": raw["preview"],
                "rationale": raw["summary"]})
        else:
            feedback = json.loads((run_dir / "feedback.json").read_text(encoding="utf-8"))
            match = [i for i in feedback["items"] if i["item_id"] == ref]
            if not match:
                _fail(f"no feedback item {ref!r} in {run_dir}")
            item = item_from_json(match[0])

        if item.kind == "text":
            result = apply_text_feedback(draft, item)
        elif item.kind == "image":
            result = apply_image_feedback(gw, draft, item)
        else:
            if template_file is None:
                _fail("theme refs need --template-file")
            template = parse_document(Path(template_file).read_text(encoding="utf-8"))
            result = apply_theme(gw, draft, template)
        text = serialize_document(result)
        if out_path is None:
            click.echo(text, nl=False)
        else:
            Path(out_path).write_text(text, encoding="utf-8")
            click.echo(f"wrote {out_path}")
    except PosterPanelError as exc:
        _fail(str(exc))


@main.command("serve")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True)
@click.option("--backend", default=None, help="override config backend")
@click.option("--data-dir", default=None, type=click.Path(path_type=Path))
@click.option("--templates", "template_corpus", default=None,
              type=click.Path(exists=True, file_okay=False))
def cmd_serve(config_path, host: str, port: int, backend, data_dir, template_corpus):
    """Serve the HTTP session API."""
    import uvicorn

    try:
        cfg = load_config(config_path)
        if backend is not None:
            cfg.backend, fixtures = parse_backend_flag(backend)
            if fixtures is not None:
                cfg.fixtures_dir = fixtures
        if data_dir is not None:
            cfg.data_dir = str(data_dir)
        if template_corpus is not None:
            cfg.template_corpus = str(template_corpus)
        gw = build_gateway(cfg)
        store = SessionStore(
            cfg.data_dir, gw, k=cfg.k,
            max_rounds_discussion=cfg.max_rounds_discussion,
            max_rounds_overlap=cfg.max_rounds_overlap,
            template_corpus=cfg.template_corpus,
        )
    except PosterPanelError as exc:
        _fail(str(exc))
        return
    uvicorn.run(create_app(store), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
