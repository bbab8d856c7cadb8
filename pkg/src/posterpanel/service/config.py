"""Service configuration: INI file plus environment for secrets.

Sections: [gateway] (backend, fixtures_dir, parallelism, max_retries,
embedding_dim, model names), [engine] (k, max_rounds, overlap settings,
template_corpus), [service] (data_dir). MODEL_API_KEY / MODEL_BASE_URL are
environment-only.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import InvalidDocumentError
from ..gateway import AssetStore, Gateway, LiveBackend, ScriptedBackend


@dataclass
class AppConfig:
    backend: str = "fallback"  # "live" | "scripted" | "fallback"
    fixtures_dir: str | None = None
    parallelism: int = 4
    max_retries: int = 2
    embedding_dim: int = 32
    chat_model: str = "default"
    image_model: str = "default"
    embed_model: str = "default"
    k: int = 12
    max_rounds_discussion: int = 5
    max_rounds_overlap: int = 3
    overlap_min_fraction: float = 0.02
    template_corpus: str | None = None
    data_dir: str = "./posterpanel-data"


def parse_backend_flag(value: str) -> tuple[str, str | None]:
    """CLI backend flag: live | fallback | scripted:<fixture dir>."""
    if value in ("live", "fallback"):
        return value, None
    if value.startswith("scripted:"):
        fixtures = value.split(":", 1)[1]
        if not fixtures:
            raise InvalidDocumentError("scripted backend needs a fixture directory")
        return "scripted", fixtures
    if value == "scripted":
        raise InvalidDocumentError("use scripted:<fixture dir>")
    raise InvalidDocumentError(f"unknown backend {value!r}")


def load_config(path: str | Path | None = None) -> AppConfig:
    cfg = AppConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser()
    read = parser.read(str(path))
    if not read:
        raise InvalidDocumentError(f"config file {path} not found")
    g = parser["gateway"] if parser.has_section("gateway") else {}
    cfg.backend = g.get("backend", cfg.backend)
    cfg.fixtures_dir = g.get("fixtures_dir", cfg.fixtures_dir) or None
    cfg.parallelism = int(g.get("parallelism", cfg.parallelism))
    cfg.max_retries = int(g.get("max_retries", cfg.max_retries))
    cfg.embedding_dim = int(g.get("embedding_dim", cfg.embedding_dim))
    cfg.chat_model = g.get("chat_model", cfg.chat_model)
    cfg.image_model = g.get("image_model", cfg.image_model)
    cfg.embed_model = g.get("embed_model", cfg.embed_model)
    e = parser["engine"] if parser.has_section("engine") else {}
    cfg.k = int(e.get("k", cfg.k))
    cfg.max_rounds_discussion = int(e.get("max_rounds_discussion", cfg.max_rounds_discussion))
    cfg.max_rounds_overlap = int(e.get("max_rounds_overlap", cfg.max_rounds_overlap))
    cfg.overlap_min_fraction = float(e.get("overlap_min_fraction", cfg.overlap_min_fraction))
    cfg.template_corpus = e.get("template_corpus", cfg.template_corpus) or None
    s = parser["service"] if parser.has_section("service") else {}
    cfg.data_dir = s.get("data_dir", cfg.data_dir)
    if cfg.backend == "scripted" and not cfg.fixtures_dir:
        raise InvalidDocumentError("scripted backend requires gateway.fixtures_dir")
    return cfg


def build_gateway(cfg: AppConfig, assets: AssetStore | None = None) -> Gateway:
    if assets is None:
        assets = AssetStore(Path(cfg.data_dir) / "assets")
    if cfg.backend == "live":
        backend = LiveBackend(
            chat_model=cfg.chat_model,
            image_model=cfg.image_model,
            embed_model=cfg.embed_model,
            embedding_dim=cfg.embedding_dim,
        )
    elif cfg.backend == "scripted":
        backend = ScriptedBackend(cfg.fixtures_dir, embedding_dim=cfg.embedding_dim)
    elif cfg.backend == "fallback":
        backend = ScriptedBackend(None, embedding_dim=cfg.embedding_dim)
    else:
        raise InvalidDocumentError(f"unknown backend {cfg.backend!r}")
    return Gateway(backend, assets, max_retries=cfg.max_retries, parallelism=cfg.parallelism)
