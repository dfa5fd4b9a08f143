"""Message data model: the unit of agent, model, memory, and UI exchange.

A :class:`Msg` carries either a plain string or a list of typed content
blocks (text, thinking, media, tool use, tool result). Messages are
immutable after creation and round-trip losslessly through JSON.
"""

from __future__ import annotations

import base64
import binascii
import json
import re
import uuid
from datetime import datetime, timezone
from typing import Any, Literal, Sequence, Union

from typing_extensions import Required, TypedDict

from .errors import MessageParseError, ValidationError

ROLES = ("user", "assistant", "system")

Role = Literal["user", "assistant", "system"]

_MIME_RE = re.compile(r"^[a-zA-Z0-9][a-zA-Z0-9!#$&^_.+-]*/[a-zA-Z0-9][a-zA-Z0-9!#$&^_.+-]*$")


class TextBlock(TypedDict):
    type: Required[Literal["text"]]
    text: str


class ThinkingBlock(TypedDict):
    type: Required[Literal["thinking"]]
    thinking: str


class URLSource(TypedDict):
    type: Required[Literal["url"]]
    url: str


class Base64Source(TypedDict):
    type: Required[Literal["base64"]]
    media_type: str
    data: str


MediaSource = Union[URLSource, Base64Source]


class ImageBlock(TypedDict):
    type: Required[Literal["image"]]
    source: MediaSource


class AudioBlock(TypedDict):
    type: Required[Literal["audio"]]
    source: MediaSource


class VideoBlock(TypedDict):
    type: Required[Literal["video"]]
    source: MediaSource


class ToolUseBlock(TypedDict):
    type: Required[Literal["tool_use"]]
    id: str
    name: str
    input: dict[str, Any]


class ToolResultBlock(TypedDict):
    type: Required[Literal["tool_result"]]
    id: str
    name: str
    output: list["ContentBlock"]


ContentBlock = Union[
    TextBlock,
    ThinkingBlock,
    ImageBlock,
    AudioBlock,
    VideoBlock,
    ToolUseBlock,
    ToolResultBlock,
]

BLOCK_TYPES = ("text", "thinking", "image", "audio", "video", "tool_use", "tool_result")
_MEDIA_TYPES = ("image", "audio", "video")


def new_id() -> str:
    """Return a 32-hex-char random identifier."""
    return uuid.uuid4().hex


def utc_now() -> str:
    """Current UTC instant as RFC 3339 with millisecond precision."""
    dt = datetime.now(timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"


def _validate_source(source: Any, path: str) -> MediaSource:
    if not isinstance(source, dict):
        raise MessageParseError(path, "media source must be an object")
    kind = source.get("type")
    if kind == "url":
        url = source.get("url")
        if not isinstance(url, str):
            raise MessageParseError(f"{path}.url", "must be a string")
        return {"type": "url", "url": url}
    if kind == "base64":
        media_type = source.get("media_type")
        data = source.get("data")
        if not isinstance(media_type, str) or not _MIME_RE.match(media_type):
            raise MessageParseError(f"{path}.media_type", f"not a valid MIME type: {media_type!r}")
        if not isinstance(data, str):
            raise MessageParseError(f"{path}.data", "must be a base64 string")
        try:
            base64.b64decode(data, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise MessageParseError(f"{path}.data", f"invalid base64 data: {exc}") from None
        return {"type": "base64", "media_type": media_type, "data": data}
    raise MessageParseError(f"{path}.type", f"unknown media source type {kind!r}")


def validate_block(block: Any, path: str = "block") -> ContentBlock:
    """Validate one content block, returning a normalized copy.

    Unknown block tags are a hard error: silently dropping content from an
    agent trajectory is worse than failing loudly.
    """
    if not isinstance(block, dict):
        raise MessageParseError(path, f"block must be an object, got {type(block).__name__}")
    kind = block.get("type")
    if kind == "text":
        text = block.get("text")
        if not isinstance(text, str):
            raise MessageParseError(f"{path}.text", "must be a string")
        return {"type": "text", "text": text}
    if kind == "thinking":
        thinking = block.get("thinking")
        if not isinstance(thinking, str):
            raise MessageParseError(f"{path}.thinking", "must be a string")
        return {"type": "thinking", "thinking": thinking}
    if kind in _MEDIA_TYPES:
        source = _validate_source(block.get("source"), f"{path}.source")
        return {"type": kind, "source": source}  # type: ignore[return-value]
    if kind == "tool_use":
        block_id = block.get("id")
        name = block.get("name")
        args = block.get("input")
        if not isinstance(block_id, str) or not block_id:
            raise MessageParseError(f"{path}.id", "tool_use id must be a non-empty string")
        if not isinstance(name, str):
            raise MessageParseError(f"{path}.name", "must be a string")
        if not isinstance(args, dict):
            raise MessageParseError(f"{path}.input", "must be an object")
        return {"type": "tool_use", "id": block_id, "name": name, "input": args}
    if kind == "tool_result":
        block_id = block.get("id")
        name = block.get("name")
        output = block.get("output")
        if not isinstance(block_id, str) or not block_id:
            raise MessageParseError(f"{path}.id", "tool_result id must be a non-empty string")
        if not isinstance(name, str):
            raise MessageParseError(f"{path}.name", "must be a string")
        if not isinstance(output, list):
            raise MessageParseError(f"{path}.output", "must be a list of blocks")
        validated = [validate_block(b, f"{path}.output[{i}]") for i, b in enumerate(output)]
        return {"type": "tool_result", "id": block_id, "name": name, "output": validated}
    raise MessageParseError(f"{path}.type", f"unknown block type {kind!r}")


class Msg:
    """A single message: sender name, role, content, optional metadata.

    ``content`` may be a plain string or a sequence of content blocks.
    String content is canonicalized to a single text block internally but
    serializes back to a string, so round-trips are faithful.

    Example:
        >>> Msg("Jarvis", "Hello! How can I help you?", "assistant")
        Msg(name='Jarvis', role='assistant', ...)
    """

    __slots__ = ("id", "name", "role", "metadata", "timestamp", "_blocks", "_string_content")

    def __init__(
        self,
        name: str,
        content: str | Sequence[ContentBlock],
        role: Role,
        metadata: dict[str, Any] | None = None,
        *,
        id: str | None = None,
        timestamp: str | None = None,
    ) -> None:
        if role not in ROLES:
            raise ValidationError(
                f"invalid role {role!r}: must be one of {', '.join(ROLES)}"
            )
        self.name = name
        self.role = role
        self.metadata = metadata
        self.id = id or new_id()
        self.timestamp = timestamp or utc_now()
        if isinstance(content, str):
            self._string_content = True
            self._blocks: list[ContentBlock] = [{"type": "text", "text": content}]
        else:
            self._string_content = False
            self._blocks = [validate_block(b, f"content[{i}]") for i, b in enumerate(content)]

    @property
    def content(self) -> str | list[ContentBlock]:
        if self._string_content:
            return self._blocks[0]["text"]  # type: ignore[typeddict-item]
        return list(self._blocks)

    @property
    def blocks(self) -> list[ContentBlock]:
        """Content as blocks regardless of how the Msg was created."""
        return list(self._blocks)

    def get_text_content(self, separator: str = "") -> str | None:
        """Concatenated text of all text blocks, or None when no text exists.

        Thinking, tool use, and tool result payloads are never included.
        """
        if self._string_content:
            return self._blocks[0]["text"]  # type: ignore[typeddict-item]
        texts = [b["text"] for b in self._blocks if b["type"] == "text"]  # type: ignore[typeddict-item]
        if not texts:
            return None
        return separator.join(texts)

    def get_content_blocks(self, block_type: str | None = None) -> list[ContentBlock]:
        """Blocks of the given kind, in order; all blocks when kind is None."""
        if block_type is None:
            return list(self._blocks)
        return [b for b in self._blocks if b["type"] == block_type]

    def has_content_blocks(self, block_type: str | None = None) -> bool:
        return bool(self.get_content_blocks(block_type))

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready dict; metadata is omitted when absent."""
        out: dict[str, Any] = {
            "id": self.id,
            "name": self.name,
            "role": self.role,
            "content": self.content,
            "timestamp": self.timestamp,
        }
        if self.metadata is not None:
            out["metadata"] = self.metadata
        return out

    @classmethod
    def from_dict(cls, data: Any) -> "Msg":
        if not isinstance(data, dict):
            raise MessageParseError("$", f"message must be an object, got {type(data).__name__}")
        for field in ("id", "name", "role", "content", "timestamp"):
            if field not in data:
                raise MessageParseError(field, "missing required field")
        role = data["role"]
        if role not in ROLES:
            raise MessageParseError("role", f"invalid role {role!r}")
        content = data["content"]
        if not isinstance(content, (str, list)):
            raise MessageParseError("content", "must be a string or a list of blocks")
        metadata = data.get("metadata")
        if metadata is not None and not isinstance(metadata, dict):
            raise MessageParseError("metadata", "must be an object")
        return cls(
            name=data["name"],
            content=content,
            role=role,
            metadata=metadata,
            id=data["id"],
            timestamp=data["timestamp"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "Msg":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MessageParseError("$", f"malformed JSON: {exc}") from None
        return cls.from_dict(data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Msg):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash(self.id)

    def __repr__(self) -> str:
        preview = str(self.content)
        if len(preview) > 60:
            preview = preview[:57] + "..."
        return f"Msg(name={self.name!r}, role={self.role!r}, content={preview!r})"


def msg_to_json(msg: Msg) -> str:
    return msg.to_json()


def json_to_msg(text: str) -> Msg:
    return Msg.from_json(text)
