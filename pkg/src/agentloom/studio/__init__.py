from .client import StudioHandle, studio_init
from .server import RunSession, StudioState, create_app, link_span_to_message

__all__ = [
    "create_app",
    "StudioState",
    "RunSession",
    "link_span_to_message",
    "studio_init",
    "StudioHandle",
]
