from .base import AgentBase, HOOK_POSITIONS, HOOK_SITES
from .react import (
    DEFAULT_FINISH_FUNCTION,
    DEFAULT_INTERRUPT_ACK,
    InterruptContext,
    ReActAgent,
)
from .user import ConsoleInput, QueueInput, UserAgent

__all__ = [
    "AgentBase",
    "HOOK_SITES",
    "HOOK_POSITIONS",
    "ReActAgent",
    "InterruptContext",
    "DEFAULT_FINISH_FUNCTION",
    "DEFAULT_INTERRUPT_ACK",
    "UserAgent",
    "ConsoleInput",
    "QueueInput",
]
