"""HTTP backend speaking an OpenAI-compatible JSON API.

Credentials come from the environment (MODEL_API_KEY, MODEL_BASE_URL);
model names and the embedding dimension are configuration.
"""

from __future__ import annotations

import base64
import os

import httpx
import numpy as np

from ..errors import BackendError
from .assets import decode_png, encode_png
from .types import ImagePart, ModelRequest, TextPart


class LiveBackend:
    supports_parallel = True
    mode = "live"

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        chat_model: str = "default",
        image_model: str = "default",
        embed_model: str = "default",
        embedding_dim: int | None = None,
        timeout: float = 120.0,
    ):
        self.base_url = (base_url or os.environ.get("MODEL_BASE_URL", "")).rstrip("/")
        self.api_key = api_key or os.environ.get("MODEL_API_KEY", "")
        if not self.base_url:
            raise BackendError("live backend requires MODEL_BASE_URL")
        self.chat_model = chat_model
        self.image_model = image_model
        self.embed_model = embed_model
        self.embedding_dim = embedding_dim
        self._client = httpx.Client(
            base_url=self.base_url,
            headers={"Authorization": f"Bearer {self.api_key}"},
            timeout=timeout,
        )
        self.request_log: list[ModelRequest] = []

    @property
    def embedder_id(self) -> str:
        return f"live/{self.embed_model}"

    def _post(self, path: str, payload: dict) -> dict:
        try:
            resp = self._client.post(path, json=payload)
            resp.raise_for_status()
            return resp.json()
        except httpx.HTTPError as exc:
            raise BackendError(f"{path}: {exc}") from exc

    def complete(self, request: ModelRequest) -> str:
        content: list[dict] = []
        for part in request.user_parts:
            if isinstance(part, TextPart):
                content.append({"type": "text", "text": part.text})
            elif isinstance(part, ImagePart):
                b64 = base64.b64encode(encode_png(part.image)).decode("ascii")
                content.append({
                    "type": "image_url",
                    "image_url": {"url": f"data:image/png;base64,{b64}"},
                })
        self.request_log.append(request)
        data = self._post("/chat/completions", {
            "model": self.chat_model,
            "temperature": request.temperature_hint,
            "response_format": {"type": "json_object"},
            "messages": [
                {"role": "system", "content": request.system_text},
                {"role": "user", "content": content},
            ],
        })
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"unexpected chat completion shape: {data!r}") from exc

    def generate_image(self, prompt: str, tag: str | None = None) -> np.ndarray:
        data = self._post("/images/generations", {
            "model": self.image_model,
            "prompt": prompt,
            "response_format": "b64_json",
        })
        try:
            raw = base64.b64decode(data["data"][0]["b64_json"])
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"unexpected image response shape: {data!r}") from exc
        return decode_png(raw)

    def embed_image(self, pixels: np.ndarray) -> np.ndarray:
        b64 = base64.b64encode(encode_png(pixels)).decode("ascii")
        data = self._post("/embeddings", {"model": self.embed_model, "input": b64})
        try:
            values = np.asarray(data["data"][0]["embedding"], dtype=np.float64)
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"unexpected embedding response shape: {data!r}") from exc
        if self.embedding_dim is None:
            self.embedding_dim = int(values.size)
        return values
