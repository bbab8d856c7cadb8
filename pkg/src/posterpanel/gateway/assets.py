"""Content-addressed image asset store.

Assets are PNG files named by the sha256 of their bytes and referenced as
``asset://<hex>`` strings, so identical content always yields the same
reference.
"""

from __future__ import annotations

import hashlib
import io
import os
from pathlib import Path

import numpy as np
from PIL import Image

ASSET_PREFIX = "asset://"


def encode_png(pixels: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(pixels.astype(np.uint8))).save(buf, format="PNG")
    return buf.getvalue()


def decode_png(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as img:
        return np.asarray(img.convert("RGB"))


class AssetStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def put_bytes(self, data: bytes) -> str:
        digest = hashlib.sha256(data).hexdigest()
        path = self.root / f"{digest}.png"
        if not path.exists():
            tmp = path.with_suffix(f".tmp.{os.getpid()}")
            tmp.write_bytes(data)
            tmp.replace(path)
        return f"{ASSET_PREFIX}{digest}"

    def put_image(self, pixels: np.ndarray) -> str:
        return self.put_bytes(encode_png(pixels))

    def path_for(self, ref: str) -> Path | None:
        if not ref.startswith(ASSET_PREFIX):
            return None
        path = self.root / f"{ref[len(ASSET_PREFIX):]}.png"
        return path if path.exists() else None

    def get_bytes(self, ref: str) -> bytes | None:
        path = self.path_for(ref)
        return path.read_bytes() if path else None

    def open_image(self, ref: str) -> np.ndarray | None:
        """Pixels for an asset reference, or None when unresolvable."""
        data = self.get_bytes(ref)
        return decode_png(data) if data is not None else None
