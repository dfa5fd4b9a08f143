from .schema import ToolSchema, schema_from_callable
from .toolkit import (
    BASIC_GROUP,
    DEFAULT_TOOL_TIMEOUT,
    INTERRUPT_NOTICE,
    META_TOOL_NAME,
    TIMEOUT_NOTICE,
    Toolkit,
    ToolEntry,
    ToolGroup,
    ToolResultChunk,
)

__all__ = [
    "ToolSchema",
    "schema_from_callable",
    "Toolkit",
    "ToolEntry",
    "ToolGroup",
    "ToolResultChunk",
    "BASIC_GROUP",
    "META_TOOL_NAME",
    "INTERRUPT_NOTICE",
    "TIMEOUT_NOTICE",
    "DEFAULT_TOOL_TIMEOUT",
]
