"""agentloom: a tool-calling agent runtime.

Message/model/memory/tool foundations, a steerable reasoning-acting
agent, multi-agent orchestration, a checkpointable evaluation harness,
and a studio server for live observation and human-in-the-loop control.
"""

from . import errors
from .agent import InterruptContext, ReActAgent, UserAgent
from .memory import KeywordLongTermMemory, LongTermMemoryBase, ShortTermMemory
from .message import Msg, json_to_msg, msg_to_json
from .model import (
    ChatBackend,
    ChatFormatter,
    ChatResponse,
    ChatUsage,
    GenerateOptions,
    MockBackend,
    MultiAgentFormatter,
    OpenAICompatibleBackend,
    trace_llm,
)
from .pipeline import (
    MsgHub,
    SequentialPipeline,
    agent_as_tool,
    branch_pipeline,
    loop_pipeline,
    sequential_pipeline,
)
from .state import StateModule
from .tool import Toolkit, ToolResultChunk, ToolSchema

__version__ = "0.1.0"

__all__ = [
    "Msg",
    "msg_to_json",
    "json_to_msg",
    "ChatBackend",
    "ChatResponse",
    "ChatUsage",
    "GenerateOptions",
    "ChatFormatter",
    "MultiAgentFormatter",
    "MockBackend",
    "OpenAICompatibleBackend",
    "trace_llm",
    "ShortTermMemory",
    "LongTermMemoryBase",
    "KeywordLongTermMemory",
    "Toolkit",
    "ToolSchema",
    "ToolResultChunk",
    "ReActAgent",
    "UserAgent",
    "InterruptContext",
    "StateModule",
    "MsgHub",
    "sequential_pipeline",
    "SequentialPipeline",
    "branch_pipeline",
    "loop_pipeline",
    "agent_as_tool",
    "errors",
]
