from .base import (
    ChatBackend,
    ChatResponse,
    ChatUsage,
    FormattedPrompt,
    GenerateOptions,
    streaming_prefix_ok,
)
from .formatter import ChatFormatter, FormatterBase, MultiAgentFormatter
from .mock import MockBackend, ScriptedReply, text_reply, tool_call_reply
from .openai_compat import OpenAICompatibleBackend
from .trace import TracedBackend, trace_llm

__all__ = [
    "ChatBackend",
    "ChatResponse",
    "ChatUsage",
    "FormattedPrompt",
    "GenerateOptions",
    "streaming_prefix_ok",
    "FormatterBase",
    "ChatFormatter",
    "MultiAgentFormatter",
    "MockBackend",
    "ScriptedReply",
    "text_reply",
    "tool_call_reply",
    "OpenAICompatibleBackend",
    "TracedBackend",
    "trace_llm",
]
