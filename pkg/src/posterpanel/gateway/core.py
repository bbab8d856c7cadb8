"""Gateway: the single entry point engines use for generative work.

Structured completions are schema-validated; on invalid output the request
is retried with the validation error appended, up to ``max_retries`` extra
attempts. Generated images land in the content-addressed asset store and
are referenced by id. Embeddings are normalized to unit vectors here, so
every consumer can treat cosine similarity as a dot product.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..errors import GenerationError, PosterPanelError, SchemaError
from .assets import AssetStore
from .schemas import SCHEMAS, ValidationError, validate_payload
from .types import EmbeddingVector, ModelRequest, StructuredResponse


class Gateway:
    def __init__(self, backend, assets: AssetStore, max_retries: int = 2, parallelism: int = 4):
        self.backend = backend
        self.assets = assets
        self.max_retries = max_retries
        self.parallelism = max(1, parallelism)

    @property
    def mode(self) -> str:
        return self.backend.mode

    @property
    def embedder_id(self) -> str:
        return self.backend.embedder_id

    @property
    def embedding_dimension(self) -> int | None:
        return getattr(self.backend, "embedding_dim", None)

    def complete_structured(self, request: ModelRequest) -> StructuredResponse:
        if request.schema_id not in SCHEMAS:
            raise SchemaError(f"unknown schema id {request.schema_id!r}")
        attempts = 0
        current = request
        last_raw = ""
        while attempts <= self.max_retries:
            attempts += 1
            last_raw = self.backend.complete(current)
            try:
                data = json.loads(last_raw)
            except json.JSONDecodeError as exc:
                problem = f"response was not valid JSON: {exc.msg}"
            else:
                try:
                    payload = validate_payload(request.schema_id, data)
                    return StructuredResponse(payload=payload, raw_text=last_raw, attempts=attempts)
                except ValidationError as exc:
                    problem = f"response failed validation: {exc}"
            current = current.with_extra_text(
                f"Your previous reply was rejected. {problem}\n"
                "Reply again with only a corrected JSON object."
            )
        raise GenerationError(
            request.tag,
            f"no schema-valid response after {attempts} attempts",
            raw_text=last_raw,
        )

    def map_structured(
        self, requests: list[ModelRequest], collect_errors: bool = False
    ) -> list[StructuredResponse | PosterPanelError]:
        """Run several completions, preserving input order in the result.

        Backends that declare ``supports_parallel`` fan out on a thread pool
        (bounded by the configured parallelism); the scripted backend runs
        sequentially so fixture sequencing stays deterministic. With
        ``collect_errors`` per-request failures are returned in place instead
        of raised.
        """

        def run(req: ModelRequest):
            try:
                return self.complete_structured(req)
            except PosterPanelError as exc:
                if collect_errors:
                    return exc
                raise

        if getattr(self.backend, "supports_parallel", False) and len(requests) > 1:
            with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
                return list(pool.map(run, requests))
        return [run(req) for req in requests]

    def generate_image(self, prompt: str, tag: str | None = None) -> str:
        """Generate an image and return its content-addressed asset id."""
        if not prompt:
            raise GenerationError(tag or "image", "image prompt must be non-empty")
        pixels = self.backend.generate_image(prompt, tag=tag)
        return self.assets.put_image(pixels)

    def embed_image(self, pixels: np.ndarray) -> EmbeddingVector:
        if pixels.size == 0:
            raise GenerationError("embed", "cannot embed an empty buffer")
        return EmbeddingVector.from_raw(self.backend.embed_image(pixels))

    def load_asset(self, ref: str) -> np.ndarray | None:
        return self.assets.open_image(ref)
