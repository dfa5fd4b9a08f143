"""Formatters: message history -> provider-shaped prompt.

``ChatFormatter`` targets single-assistant conversations. For
multi-participant histories, ``MultiAgentFormatter`` folds named speakers
into a ``<history>`` transcript so standard chat-completions endpoints can
follow who said what.
"""

from __future__ import annotations

import base64
import json
import mimetypes
import os
from abc import ABC, abstractmethod
from typing import Any, Sequence

from ..errors import CapabilityError
from ..message import ContentBlock, Msg
from .base import FormattedPrompt

HISTORY_OPEN = "<history>"
HISTORY_CLOSE = "</history>"


def _source_url(source: dict[str, Any]) -> str:
    """Resolve a media source to a URL, inlining local files as base64."""
    if source["type"] == "base64":
        return f"data:{source['media_type']};base64,{source['data']}"
    url = source["url"]
    if os.path.exists(url):
        media_type = mimetypes.guess_type(url)[0] or "application/octet-stream"
        with open(url, "rb") as fh:
            data = base64.b64encode(fh.read()).decode("ascii")
        return f"data:{media_type};base64,{data}"
    return url


def _is_tool_msg(msg: Msg) -> bool:
    return msg.has_content_blocks("tool_use") or msg.has_content_blocks("tool_result")


def _tool_output_text(output: list[ContentBlock]) -> str:
    parts = []
    for block in output:
        if block["type"] == "text":
            parts.append(block["text"])  # type: ignore[typeddict-item]
        elif block["type"] in ("image", "audio", "video"):
            parts.append(f"[{block['type']}: {_source_url(block['source'])}]")  # type: ignore[typeddict-item]
    return "\n".join(parts)


class FormatterBase(ABC):
    """Transforms a Msg history into the provider message-list shape."""

    def __init__(self, vision: bool = True) -> None:
        self.vision = vision

    @abstractmethod
    def format(self, msgs: Sequence[Msg]) -> FormattedPrompt: ...

    def _content_parts(self, msg: Msg) -> str | list[dict[str, Any]]:
        """Non-tool content as a string, or content parts when media present."""
        if isinstance(msg.content, str):
            return msg.content
        parts: list[dict[str, Any]] = []
        has_media = False
        for block in msg.blocks:
            kind = block["type"]
            if kind == "text":
                parts.append({"type": "text", "text": block["text"]})  # type: ignore[typeddict-item]
            elif kind == "thinking":
                continue  # reasoning traces are not sent back to providers
            elif kind in ("image", "audio", "video"):
                if not self.vision:
                    raise CapabilityError("vision", f"history contains a {kind!r} block")
                has_media = True
                url = _source_url(block["source"])  # type: ignore[typeddict-item]
                if kind == "image":
                    parts.append({"type": "image_url", "image_url": {"url": url}})
                else:
                    parts.append({"type": f"{kind}_url", f"{kind}_url": {"url": url}})
        if not has_media:
            return "".join(p["text"] for p in parts if p["type"] == "text")
        return parts

    def _entries_for(self, msg: Msg) -> list[dict[str, Any]]:
        """Provider entries for one message, mapping tool blocks natively."""
        entries: list[dict[str, Any]] = []
        tool_uses = msg.get_content_blocks("tool_use")
        tool_results = msg.get_content_blocks("tool_result")
        if tool_uses:
            entry: dict[str, Any] = {
                "role": "assistant",
                "content": msg.get_text_content() or None,
                "tool_calls": [
                    {
                        "id": b["id"],  # type: ignore[typeddict-item]
                        "type": "function",
                        "function": {
                            "name": b["name"],  # type: ignore[typeddict-item]
                            "arguments": json.dumps(b["input"], ensure_ascii=False),  # type: ignore[typeddict-item]
                        },
                    }
                    for b in tool_uses
                ],
            }
            entries.append(entry)
        for block in tool_results:
            entries.append(
                {
                    "role": "tool",
                    "tool_call_id": block["id"],  # type: ignore[typeddict-item]
                    "content": _tool_output_text(block["output"]),  # type: ignore[typeddict-item]
                }
            )
        if not tool_uses and not tool_results:
            entries.append({"role": msg.role, "content": self._content_parts(msg)})
        return entries


class ChatFormatter(FormatterBase):
    """Single-agent formatter: roles map straight through."""

    def format(self, msgs: Sequence[Msg]) -> FormattedPrompt:
        prompt: FormattedPrompt = []
        for msg in msgs:
            prompt.extend(self._entries_for(msg))
        return prompt


class MultiAgentFormatter(FormatterBase):
    """Folds named speakers into a shared conversation transcript.

    Contiguous runs of non-tool messages become one user entry holding a
    ``<history>`` block of ``Name: text`` lines; tool traffic stays native
    and system messages stay first.
    """

    def format(self, msgs: Sequence[Msg]) -> FormattedPrompt:
        prompt: FormattedPrompt = []
        rest: list[Msg] = []
        for msg in msgs:
            if msg.role == "system" and not _is_tool_msg(msg):
                prompt.append({"role": "system", "content": self._content_parts(msg)})
            else:
                rest.append(msg)

        run: list[Msg] = []

        def flush_run() -> None:
            if not run:
                return
            lines = []
            media_parts: list[dict[str, Any]] = []
            for m in run:
                text = m.get_text_content()
                if text is not None:
                    lines.append(f"{m.name}: {text}")
                parts = self._content_parts(m)
                if isinstance(parts, list):
                    media_parts.extend(p for p in parts if p["type"] != "text")
            transcript = HISTORY_OPEN + "\n" + "\n".join(lines) + "\n" + HISTORY_CLOSE
            content: Any = transcript
            if media_parts:
                content = [{"type": "text", "text": transcript}, *media_parts]
            prompt.append({"role": "user", "content": content})
            run.clear()

        for msg in rest:
            if _is_tool_msg(msg):
                flush_run()
                prompt.extend(self._entries_for(msg))
            else:
                run.append(msg)
        flush_run()
        return prompt
