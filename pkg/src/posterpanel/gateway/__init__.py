from .assets import ASSET_PREFIX, AssetStore, decode_png, encode_png
from .core import Gateway
from .live import LiveBackend
from .schemas import SCHEMAS, THEME_TARGET, validate_payload
from .scripted import ScriptedBackend, placeholder_image, pseudo_embedding
from .types import EmbeddingVector, ImagePart, ModelRequest, StructuredResponse, TextPart

__all__ = [
    "ASSET_PREFIX",
    "AssetStore",
    "EmbeddingVector",
    "Gateway",
    "ImagePart",
    "LiveBackend",
    "ModelRequest",
    "SCHEMAS",
    "ScriptedBackend",
    "StructuredResponse",
    "THEME_TARGET",
    "TextPart",
    "decode_png",
    "encode_png",
    "placeholder_image",
    "pseudo_embedding",
    "validate_payload",
]
