"""Backend speaking the OpenAI chat-completions HTTP interface.

Works against any compatible server (OpenAI, DeepSeek, vLLM, ...).
Streaming uses server-sent events; provider deltas are accumulated into
the cumulative response scheme used everywhere else in the runtime.
"""

from __future__ import annotations

import asyncio
import json
import logging
import time
from typing import Any, AsyncIterator

import httpx

from ..errors import ProviderError, TransportError
from ..message import ContentBlock, new_id
from .base import ChatBackend, ChatResponse, ChatUsage, FormattedPrompt, GenerateOptions

log = logging.getLogger(__name__)

RETRY_DELAYS = (0.5, 2.0)


def _tool_choice_param(choice: str) -> Any:
    if choice in ("auto", "none", "required"):
        return choice
    return {"type": "function", "function": {"name": choice}}


class OpenAICompatibleBackend(ChatBackend):
    reasoning = True

    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        model_name: str = "gpt-4o-mini",
        *,
        timeout: float = 120.0,
        http_client: httpx.AsyncClient | None = None,
        extra_headers: dict[str, str] | None = None,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.model_name = model_name
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        headers.update(extra_headers or {})
        self._client = http_client or httpx.AsyncClient(timeout=timeout)
        self._headers = headers

    async def aclose(self) -> None:
        await self._client.aclose()

    def _body(self, prompt: FormattedPrompt, options: GenerateOptions, stream: bool) -> dict:
        body: dict[str, Any] = {"model": self.model_name, "messages": prompt}
        schemas = options.tool_schema_dicts()
        if schemas:
            body["tools"] = [{"type": "function", "function": s} for s in schemas]
            if options.tool_choice != "auto":
                body["tool_choice"] = _tool_choice_param(options.tool_choice)
        if options.reasoning is not None:
            if isinstance(options.reasoning, int):
                body["reasoning_budget"] = options.reasoning
            else:
                body["reasoning_effort"] = options.reasoning
        if stream:
            body["stream"] = True
            body["stream_options"] = {"include_usage": True}
        body.update(options.extra)
        return body

    async def _post(self, body: dict, stream: bool) -> httpx.Response:
        url = f"{self.base_url}/chat/completions"
        request = self._client.build_request("POST", url, json=body, headers=self._headers)
        try:
            response = await self._client.send(request, stream=stream)
        except httpx.HTTPError as exc:
            raise TransportError(f"request to {url} failed: {exc}") from exc
        if response.status_code >= 400:
            if stream:
                await response.aread()
            detail = response.text
            try:
                detail = response.json().get("error", {}).get("message", detail)
            except Exception:
                pass
            if response.status_code in (429,) or response.status_code >= 500:
                raise TransportError(f"HTTP {response.status_code}: {detail}")
            raise ProviderError(detail, status_code=response.status_code)
        return response

    async def _post_with_retries(self, body: dict, stream: bool) -> httpx.Response:
        attempt = 0
        while True:
            try:
                return await self._post(body, stream)
            except TransportError:
                if attempt >= len(RETRY_DELAYS):
                    raise
                delay = RETRY_DELAYS[attempt]
                attempt += 1
                log.warning("retryable model call failure; retrying in %.1fs", delay)
                await asyncio.sleep(delay)

    @staticmethod
    def _parse_message(message: dict[str, Any]) -> list[ContentBlock]:
        blocks: list[ContentBlock] = []
        reasoning = message.get("reasoning_content")
        if reasoning:
            blocks.append({"type": "thinking", "thinking": reasoning})
        text = message.get("content")
        if text:
            blocks.append({"type": "text", "text": text})
        for call in message.get("tool_calls") or []:
            fn = call.get("function", {})
            raw_args = fn.get("arguments", "{}")
            try:
                args = json.loads(raw_args) if raw_args else {}
            except json.JSONDecodeError:
                args = {"raw": raw_args}
            if not isinstance(args, dict):
                args = {"value": args}
            blocks.append(
                {
                    "type": "tool_use",
                    "id": call.get("id") or new_id()[:12],
                    "name": fn.get("name", ""),
                    "input": args,
                }
            )
        return blocks

    @staticmethod
    def _parse_usage(payload: dict[str, Any], elapsed: float) -> ChatUsage:
        usage = payload.get("usage") or {}
        return ChatUsage(
            input_tokens=usage.get("prompt_tokens", 0),
            output_tokens=usage.get("completion_tokens", 0),
            time_seconds=elapsed,
        )

    async def generate(
        self, prompt: FormattedPrompt, options: GenerateOptions | None = None
    ) -> ChatResponse:
        options = options or GenerateOptions()
        self.check_request(prompt, options)
        start = time.monotonic()
        response = await self._post_with_retries(self._body(prompt, options, stream=False), False)
        try:
            payload = response.json()
        except json.JSONDecodeError as exc:
            raise TransportError(f"non-JSON completion response: {exc}") from exc
        choices = payload.get("choices") or []
        if not choices:
            raise ProviderError("response contained no choices")
        blocks = self._parse_message(choices[0].get("message", {}))
        return ChatResponse(
            id=payload.get("id") or new_id(),
            content=blocks,
            usage=self._parse_usage(payload, time.monotonic() - start),
        )

    async def generate_stream(
        self, prompt: FormattedPrompt, options: GenerateOptions | None = None
    ) -> AsyncIterator[ChatResponse]:
        options = options or GenerateOptions(stream=True)
        self.check_request(prompt, options)
        start = time.monotonic()
        response = await self._post_with_retries(self._body(prompt, options, stream=True), True)

        response_id = new_id()
        thinking = ""
        text = ""
        # tool calls accumulate by stream index: {index: {id, name, arguments}}
        partial_calls: dict[int, dict[str, str]] = {}
        usage: ChatUsage | None = None

        def snapshot(include_calls: bool) -> ChatResponse:
            blocks: list[ContentBlock] = []
            if thinking:
                blocks.append({"type": "thinking", "thinking": thinking})
            if text:
                blocks.append({"type": "text", "text": text})
            if include_calls:
                for index in sorted(partial_calls):
                    call = partial_calls[index]
                    raw = call.get("arguments", "")
                    try:
                        args = json.loads(raw) if raw else {}
                    except json.JSONDecodeError:
                        args = {"raw": raw}
                    if not isinstance(args, dict):
                        args = {"value": args}
                    blocks.append(
                        {
                            "type": "tool_use",
                            "id": call.get("id") or new_id()[:12],
                            "name": call.get("name", ""),
                            "input": args,
                        }
                    )
            return ChatResponse(id=response_id, content=blocks, usage=usage)

        emitted = False
        try:
            async for line in response.aiter_lines():
                line = line.strip()
                if not line or not line.startswith("data:"):
                    continue
                data = line[len("data:") :].strip()
                if data == "[DONE]":
                    break
                try:
                    event = json.loads(data)
                except json.JSONDecodeError as exc:
                    raise TransportError(f"malformed SSE payload: {exc}") from exc
                if event.get("id"):
                    response_id = event["id"]
                if event.get("usage"):
                    usage = self._parse_usage(event, time.monotonic() - start)
                choices = event.get("choices") or []
                if not choices:
                    continue
                delta = choices[0].get("delta") or {}
                changed = False
                if delta.get("reasoning_content"):
                    thinking += delta["reasoning_content"]
                    changed = True
                if delta.get("content"):
                    text += delta["content"]
                    changed = True
                for call in delta.get("tool_calls") or []:
                    slot = partial_calls.setdefault(call.get("index", 0), {"arguments": ""})
                    if call.get("id"):
                        slot["id"] = call["id"]
                    fn = call.get("function") or {}
                    if fn.get("name"):
                        slot["name"] = slot.get("name", "") + fn["name"]
                    if fn.get("arguments"):
                        slot["arguments"] += fn["arguments"]
                if changed:
                    emitted = True
                    yield snapshot(include_calls=False)
        except httpx.HTTPError as exc:
            raise TransportError(f"stream dropped: {exc}") from exc
        finally:
            await response.aclose()

        if usage is None:
            usage = ChatUsage(time_seconds=time.monotonic() - start)
        final = snapshot(include_calls=True)
        if final.content or not emitted:
            yield final
