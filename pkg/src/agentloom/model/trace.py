"""Tracing wrapper: instrument any backend with per-call spans."""

from __future__ import annotations

from typing import Any, AsyncIterator

from ..tracing import span
from .base import ChatBackend, ChatResponse, FormattedPrompt, GenerateOptions


def _request_attributes(backend: ChatBackend, prompt: FormattedPrompt, options: GenerateOptions) -> dict[str, Any]:
    return {
        "model": backend.model_name,
        "messages": len(prompt),
        "tools": len(options.tools),
        "stream": options.stream,
        "tool_choice": options.tool_choice,
    }


def _record_response(record: Any, response: ChatResponse) -> None:
    record.attributes["response_id"] = response.id
    record.attributes["blocks"] = len(response.content)
    if response.usage:
        record.attributes["input_tokens"] = response.usage.input_tokens
        record.attributes["output_tokens"] = response.usage.output_tokens
        record.attributes["time_seconds"] = response.usage.time_seconds


class TracedBackend(ChatBackend):
    """Behaves exactly like the wrapped backend, plus one span per call."""

    def __init__(self, inner: ChatBackend) -> None:
        self.inner = inner

    @property
    def streaming(self) -> bool:  # type: ignore[override]
        return self.inner.streaming

    @property
    def tools(self) -> bool:  # type: ignore[override]
        return self.inner.tools

    @property
    def vision(self) -> bool:  # type: ignore[override]
        return self.inner.vision

    @property
    def reasoning(self) -> bool:  # type: ignore[override]
        return self.inner.reasoning

    @property
    def model_name(self) -> str:  # type: ignore[override]
        return self.inner.model_name

    async def generate(
        self, prompt: FormattedPrompt, options: GenerateOptions | None = None
    ) -> ChatResponse:
        options = options or GenerateOptions()
        with span(f"llm {self.model_name}", "llm", _request_attributes(self.inner, prompt, options)) as record:
            response = await self.inner.generate(prompt, options)
            _record_response(record, response)
            return response

    async def generate_stream(
        self, prompt: FormattedPrompt, options: GenerateOptions | None = None
    ) -> AsyncIterator[ChatResponse]:
        options = options or GenerateOptions(stream=True)
        with span(f"llm {self.model_name}", "llm", _request_attributes(self.inner, prompt, options)) as record:
            last: ChatResponse | None = None
            async for chunk in self.inner.generate_stream(prompt, options):
                last = chunk
                yield chunk
            if last is not None:
                _record_response(record, last)


def trace_llm(backend: ChatBackend) -> ChatBackend:
    """Wrap a backend so every call emits one span to the active sinks."""
    if isinstance(backend, TracedBackend):
        return backend
    return TracedBackend(backend)
