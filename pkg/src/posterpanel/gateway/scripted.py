"""Deterministic offline backend.

Structured completions replay fixture files named ``<tag>.<n>.json``,
consumed per tag in sequence order; image and embedding primitives are
computed by hashing their inputs, so they never need fixtures. With no
fixture directory at all the backend runs in "fallback" mode: completions
refuse, pixels and embeddings still work, and engines that declare a
deterministic heuristic path use it.
"""

from __future__ import annotations

import hashlib
import threading
from pathlib import Path

import numpy as np

from ..errors import GenerationError
from .types import ModelRequest

PLACEHOLDER_SIZE = 64


def placeholder_image(prompt: str, size: int = PLACEHOLDER_SIZE) -> np.ndarray:
    """Pseudo-random RGB pixels seeded by the prompt."""
    seed = int.from_bytes(hashlib.sha256(prompt.encode("utf-8")).digest()[:8], "big")
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)


def pseudo_embedding(pixels: np.ndarray, dimension: int) -> np.ndarray:
    """Deterministic embedding: seed an RNG with a hash of the downsampled image."""
    img = np.asarray(pixels, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    h, w = img.shape[:2]
    rows = (np.arange(8) * h // 8).clip(0, h - 1)
    cols = (np.arange(8) * w // 8).clip(0, w - 1)
    thumb = img[rows][:, cols].mean(axis=2).round().astype(np.uint8)
    seed = int.from_bytes(hashlib.sha256(thumb.tobytes()).digest()[:8], "big")
    rng = np.random.default_rng(seed)
    return rng.standard_normal(dimension)


class ScriptedBackend:
    """Fixture-replaying backend; also the no-fixture "fallback" backend."""

    supports_parallel = False

    def __init__(self, fixtures_dir: str | Path | None = None, embedding_dim: int = 32):
        self.fixtures_dir = Path(fixtures_dir) if fixtures_dir is not None else None
        self.embedding_dim = embedding_dim
        self.request_log: list[ModelRequest] = []
        self._counters: dict[str, int] = {}
        self._image_counters: dict[str, int] = {}
        self._lock = threading.Lock()

    @property
    def mode(self) -> str:
        return "scripted" if self.fixtures_dir is not None else "fallback"

    @property
    def embedder_id(self) -> str:
        return f"scripted-sha256-rng-v1/d{self.embedding_dim}"

    def complete(self, request: ModelRequest) -> str:
        with self._lock:
            self.request_log.append(request)
            if self.fixtures_dir is None:
                raise GenerationError(
                    request.tag, "fallback backend has no completion fixtures"
                )
            n = self._counters.get(request.tag, 0)
            path = self.fixtures_dir / f"{request.tag}.{n}.json"
            if not path.exists():
                raise GenerationError(
                    request.tag, f"no scripted fixture {path.name} in {self.fixtures_dir}"
                )
            self._counters[request.tag] = n + 1
        return path.read_text(encoding="utf-8")

    def generate_image(self, prompt: str, tag: str | None = None) -> np.ndarray:
        if tag and self.fixtures_dir is not None:
            with self._lock:
                n = self._image_counters.get(tag, 0)
                path = self.fixtures_dir / f"{tag}.{n}.png"
                if path.exists():
                    self._image_counters[tag] = n + 1
                else:
                    path = None
            if path is not None:
                from .assets import decode_png

                return decode_png(path.read_bytes())
        return placeholder_image(prompt)

    def embed_image(self, pixels: np.ndarray) -> np.ndarray:
        return pseudo_embedding(pixels, self.embedding_dim)
