"""Deterministic scripted backend for offline runs and tests.

A script is a list of replies consumed in call order. Each reply gives the
final content blocks and, optionally, a text chunking for streaming, an
artificial latency, or an error to raise.
"""

from __future__ import annotations

import asyncio
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, AsyncIterator, Sequence

from ..errors import ProviderError, ScriptExhaustedError, TransportError, ValidationError
from ..message import ContentBlock, new_id, validate_block
from .base import ChatBackend, ChatResponse, ChatUsage, FormattedPrompt, GenerateOptions


@dataclass
class ScriptedReply:
    blocks: list[ContentBlock] = field(default_factory=list)
    chunks: list[str] | None = None
    latency_ms: int = 0
    error: str | None = None
    error_kind: str = "provider"  # or "transport"
    usage: dict[str, int] | None = None

    def __post_init__(self) -> None:
        self.blocks = [validate_block(b, f"blocks[{i}]") for i, b in enumerate(self.blocks)]
        if self.chunks is not None:
            texts = [b for b in self.blocks if b["type"] == "text"]
            if len(texts) != 1:
                raise ValidationError("chunked replies need exactly one text block")
            if "".join(self.chunks) != texts[0]["text"]:  # type: ignore[typeddict-item]
                raise ValidationError("chunks must concatenate to the text block")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScriptedReply":
        return cls(
            blocks=data.get("blocks", []),
            chunks=data.get("chunks"),
            latency_ms=data.get("latency_ms", 0),
            error=data.get("error"),
            error_kind=data.get("error_kind", "provider"),
            usage=data.get("usage"),
        )


def _rough_tokens(text: str) -> int:
    return max(len(text) // 4, 1) if text else 0


class MockBackend(ChatBackend):
    """Replays a script of :class:`ScriptedReply` entries, one per call."""

    reasoning = True
    model_name = "mock"

    def __init__(self, script: Sequence[ScriptedReply | dict[str, Any]], vision: bool = True) -> None:
        if not script:
            raise ValidationError("mock script must be non-empty")
        self.script = [
            r if isinstance(r, ScriptedReply) else ScriptedReply.from_dict(r) for r in script
        ]
        self.vision = vision
        self._cursor = 0
        self._lock = asyncio.Lock()
        self.call_count = 0
        self.requests: list[tuple[FormattedPrompt, GenerateOptions]] = []

    @classmethod
    def from_file(cls, path: str | Path) -> "MockBackend":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, list):
            raise ValidationError("mock script file must hold a JSON list")
        return cls(data)

    async def _next_reply(self, prompt: FormattedPrompt, options: GenerateOptions) -> ScriptedReply:
        async with self._lock:
            if self._cursor >= len(self.script):
                raise ScriptExhaustedError(
                    f"script exhausted after {len(self.script)} replies"
                )
            reply = self.script[self._cursor]
            self._cursor += 1
            self.call_count += 1
            self.requests.append((prompt, options))
        return reply

    def _usage(self, reply: ScriptedReply, prompt: FormattedPrompt, elapsed: float) -> ChatUsage:
        if reply.usage:
            return ChatUsage(
                input_tokens=reply.usage.get("input_tokens", 0),
                output_tokens=reply.usage.get("output_tokens", 0),
                time_seconds=elapsed,
            )
        prompt_text = json.dumps(prompt)
        out_text = "".join(
            b.get("text", "") if isinstance(b.get("text"), str) else "" for b in reply.blocks
        )
        return ChatUsage(
            input_tokens=_rough_tokens(prompt_text),
            output_tokens=_rough_tokens(out_text),
            time_seconds=elapsed,
        )

    @staticmethod
    def _raise_scripted(reply: ScriptedReply) -> None:
        if reply.error_kind == "transport":
            raise TransportError(reply.error or "scripted transport failure")
        raise ProviderError(reply.error or "scripted provider failure", status_code=400)

    async def generate(
        self, prompt: FormattedPrompt, options: GenerateOptions | None = None
    ) -> ChatResponse:
        options = options or GenerateOptions()
        self.check_request(prompt, options)
        start = time.monotonic()
        reply = await self._next_reply(prompt, options)
        if reply.latency_ms:
            await asyncio.sleep(reply.latency_ms / 1000)
        if reply.error is not None:
            self._raise_scripted(reply)
        elapsed = time.monotonic() - start
        return ChatResponse(content=list(reply.blocks), usage=self._usage(reply, prompt, elapsed))

    async def generate_stream(
        self, prompt: FormattedPrompt, options: GenerateOptions | None = None
    ) -> AsyncIterator[ChatResponse]:
        options = options or GenerateOptions(stream=True)
        self.check_request(prompt, options)
        start = time.monotonic()
        reply = await self._next_reply(prompt, options)
        response_id = new_id()

        if reply.chunks is None:
            if reply.latency_ms:
                await asyncio.sleep(reply.latency_ms / 1000)
            if reply.error is not None:
                self._raise_scripted(reply)
            yield ChatResponse(
                id=response_id,
                content=list(reply.blocks),
                usage=self._usage(reply, prompt, time.monotonic() - start),
            )
            return

        text_index = next(i for i, b in enumerate(reply.blocks) if b["type"] == "text")
        leading = reply.blocks[:text_index]
        trailing = reply.blocks[text_index + 1 :]
        per_chunk = (reply.latency_ms / 1000) / max(len(reply.chunks), 1)
        cumulative = ""
        for i, chunk in enumerate(reply.chunks):
            await asyncio.sleep(per_chunk)
            cumulative += chunk
            last = i == len(reply.chunks) - 1
            content: list[ContentBlock] = [
                *leading,
                {"type": "text", "text": cumulative},
                *(trailing if last else []),
            ]
            usage = self._usage(reply, prompt, time.monotonic() - start) if last else None
            yield ChatResponse(id=response_id, content=content, usage=usage)
        if reply.error is not None:
            self._raise_scripted(reply)


def text_reply(text: str, chunks: list[str] | None = None, **kwargs: Any) -> ScriptedReply:
    return ScriptedReply(blocks=[{"type": "text", "text": text}], chunks=chunks, **kwargs)


def tool_call_reply(
    name: str, arguments: dict[str, Any], call_id: str | None = None, text: str = "", **kwargs: Any
) -> ScriptedReply:
    blocks: list[ContentBlock] = []
    if text:
        blocks.append({"type": "text", "text": text})
    blocks.append(
        {
            "type": "tool_use",
            "id": call_id or new_id()[:12],
            "name": name,
            "input": arguments,
        }
    )
    return ScriptedReply(blocks=blocks, **kwargs)
