from .api import create_app
from .config import AppConfig, build_gateway, load_config, parse_backend_flag
from .store import EventRecord, Session, SessionStore, Snapshot, apply_event

__all__ = [
    "AppConfig",
    "EventRecord",
    "Session",
    "SessionStore",
    "Snapshot",
    "apply_event",
    "build_gateway",
    "create_app",
    "load_config",
    "parse_backend_flag",
]
