"""Provider-agnostic chat model abstraction.

A backend turns a formatted prompt into a :class:`ChatResponse`. With
``stream=True`` it yields cumulative responses: every chunk contains all
content generated so far, and the final chunk equals the non-streaming
result for the same input.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, AsyncIterator, Sequence

from ..errors import CapabilityError, ValidationError
from ..message import ContentBlock, ToolUseBlock, new_id, utc_now, validate_block

# A formatted prompt is the provider-shaped message list, e.g.
# [{"role": "system", "content": "..."}, {"role": "user", "content": "..."}]
FormattedPrompt = list[dict[str, Any]]

_RESPONSE_BLOCK_KINDS = ("text", "thinking", "tool_use")

TOOL_CHOICE_MODES = ("auto", "none", "required")


@dataclass
class ChatUsage:
    input_tokens: int = 0
    output_tokens: int = 0
    time_seconds: float = 0.0

    def __post_init__(self) -> None:
        if self.input_tokens < 0 or self.output_tokens < 0 or self.time_seconds < 0:
            raise ValidationError("usage fields must be non-negative")

    def to_dict(self) -> dict[str, Any]:
        return {
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
            "time_seconds": self.time_seconds,
        }


@dataclass
class ChatResponse:
    """Unified model output: content blocks plus usage accounting."""

    content: list[ContentBlock]
    id: str = field(default_factory=new_id)
    created_at: str = field(default_factory=utc_now)
    usage: ChatUsage | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("ChatResponse.id must be non-empty")
        for i, block in enumerate(self.content):
            block = validate_block(block, f"content[{i}]")
            if block["type"] not in _RESPONSE_BLOCK_KINDS:
                raise ValidationError(
                    f"content[{i}]: {block['type']!r} blocks are not valid model output"
                )
            self.content[i] = block

    def get_text_content(self, separator: str = "") -> str:
        return separator.join(
            b["text"] for b in self.content if b["type"] == "text"  # type: ignore[typeddict-item]
        )

    @property
    def tool_calls(self) -> list[ToolUseBlock]:
        return [b for b in self.content if b["type"] == "tool_use"]  # type: ignore[misc]

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "created_at": self.created_at,
            "content": list(self.content),
            "usage": self.usage.to_dict() if self.usage else None,
        }


@dataclass
class GenerateOptions:
    """Per-call generation parameters.

    ``tool_choice`` is "auto", "none", "required", or the name of a tool in
    ``tools``. ``reasoning`` is an effort level ("low"/"medium"/"high") or
    an integer token budget, for backends that support it.
    """

    tools: Sequence[Any] = field(default_factory=list)
    tool_choice: str = "auto"
    stream: bool = False
    reasoning: str | int | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def tool_schema_dicts(self) -> list[dict[str, Any]]:
        """Tools normalized to ``{name, description, parameters}`` dicts."""
        out = []
        for tool in self.tools:
            if isinstance(tool, dict):
                if "function" in tool:  # already chat-completions shaped
                    out.append(dict(tool["function"]))
                else:
                    out.append(dict(tool))
            else:  # ToolSchema-like object
                out.append(
                    {
                        "name": tool.name,
                        "description": tool.description,
                        "parameters": tool.parameters,
                    }
                )
        return out

    def validate(self) -> None:
        if self.tool_choice not in TOOL_CHOICE_MODES:
            names = {s["name"] for s in self.tool_schema_dicts()}
            if self.tool_choice not in names:
                raise ValidationError(
                    f"tool_choice {self.tool_choice!r} does not name a supplied tool"
                )


class ChatBackend(ABC):
    """Interface all chat backends implement.

    Capability flags describe what the backend can do; a request for an
    unsupported feature is rejected before any chunk is emitted.
    """

    streaming: bool = True
    tools: bool = True
    vision: bool = True
    reasoning: bool = False
    model_name: str = "unknown"

    @abstractmethod
    async def generate(
        self, prompt: FormattedPrompt, options: GenerateOptions | None = None
    ) -> ChatResponse:
        """Single complete response; ``usage.time_seconds`` is wall-clock."""

    @abstractmethod
    def generate_stream(
        self, prompt: FormattedPrompt, options: GenerateOptions | None = None
    ) -> AsyncIterator[ChatResponse]:
        """Cumulative response stream; single-consumer, cancellable."""

    def check_request(self, prompt: FormattedPrompt, options: GenerateOptions) -> None:
        options.validate()
        if options.tools and not self.tools:
            raise CapabilityError("tools")
        if options.stream and not self.streaming:
            raise CapabilityError("streaming")
        if options.reasoning is not None and not self.reasoning:
            raise CapabilityError("reasoning")
        if not self.vision:
            for entry in prompt:
                content = entry.get("content")
                if isinstance(content, list):
                    for part in content:
                        kind = part.get("type", "")
                        if kind not in ("text",):
                            raise CapabilityError("vision", f"prompt contains {kind!r} content")


def streaming_prefix_ok(earlier: ChatResponse, later: ChatResponse) -> bool:
    """Check the cumulative-streaming contract between consecutive chunks.

    Block-by-block: earlier blocks must be prefixes of the later blocks at
    the same index (text/thinking extend; other kinds must be equal), and
    the block list may only grow.
    """
    if len(earlier.content) > len(later.content):
        return False
    for prev, cur in zip(earlier.content, later.content):
        if prev["type"] != cur["type"]:
            return False
        if prev["type"] == "text":
            if not cur["text"].startswith(prev["text"]):  # type: ignore[typeddict-item]
                return False
        elif prev["type"] == "thinking":
            if not cur["thinking"].startswith(prev["thinking"]):  # type: ignore[typeddict-item]
                return False
        elif prev != cur:
            return False
    return True
