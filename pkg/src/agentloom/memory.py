"""Short-term conversational buffer and keyword-indexed long-term store.

The long-term store keeps one JSON record per line in an append-only file
and ranks retrieval by keyword overlap. It supports two control styles:
developer-driven (record/retrieve around the conversation) and
agent-driven (record_to_memory/retrieve_from_memory, exposed as tools).
"""

from __future__ import annotations

import json
import re
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import StorageError, ValidationError
from .message import Msg, new_id, utc_now
from .state import StateModule

LONG_TERM_MODES = ("agent_control", "static_control", "both")

# Small fixed stop-word list; deterministic on purpose.
STOPWORDS = frozenset(
    """a an and are as at be been but by can did do does for from had has have
    he her him his how i if in into is it its me my of on or our she so that
    the their them they this to was we were what when which who will with you
    your""".split()
)

_TOKEN_RE = re.compile(r"[a-z0-9']+")


def extract_keywords(text: str) -> list[str]:
    """Lowercased, stop-word-filtered tokens, deduplicated in order."""
    tokens = _TOKEN_RE.findall(text.lower())
    filtered = [t for t in tokens if t not in STOPWORDS]
    if not filtered:
        filtered = tokens  # all-stopword text: fall back to raw tokens
    seen: dict[str, None] = {}
    for t in filtered:
        seen.setdefault(t)
    return list(seen)


class ShortTermMemory(StateModule):
    """Ordered in-memory list of messages; the agent's working context."""

    def __init__(self) -> None:
        super().__init__()
        self._msgs: list[Msg] = []
        self._ids: set[str] = set()
        self.register_state(
            "_msgs",
            to_state=lambda msgs: [m.to_dict() for m in msgs],
            from_state=lambda data: [Msg.from_dict(d) for d in data],
        )

    def add(self, msgs: Msg | Iterable[Msg]) -> None:
        """Append one or many messages; re-adding a known id is a no-op."""
        items = [msgs] if isinstance(msgs, Msg) else list(msgs)
        for msg in items:
            if msg.id in self._ids:
                continue
            self._msgs.append(msg)
            self._ids.add(msg.id)

    def get_all(self) -> list[Msg]:
        return list(self._msgs)

    def get_range(self, start: int, end: int) -> list[Msg]:
        if not (0 <= start <= end <= len(self._msgs)):
            raise IndexError(f"range [{start}, {end}) out of bounds for size {len(self._msgs)}")
        return self._msgs[start:end]

    def delete(self, index: int) -> None:
        if not (0 <= index < len(self._msgs)):
            raise IndexError(f"index {index} out of bounds for size {len(self._msgs)}")
        removed = self._msgs.pop(index)
        self._ids.discard(removed.id)

    def clear(self) -> None:
        self._msgs.clear()
        self._ids.clear()

    def size(self) -> int:
        return len(self._msgs)

    def __len__(self) -> int:
        return len(self._msgs)

    def load_state_dict(self, state: dict, strict: bool = True) -> None:
        super().load_state_dict(state, strict=strict)
        self._ids = {m.id for m in self._msgs}


@dataclass
class LongTermRecord:
    id: str
    text: str
    keywords: list[str]
    created_at: str
    source: str  # "developer" | "agent"

    def __post_init__(self) -> None:
        if not self.text:
            raise ValidationError("long-term record text must be non-empty")
        if not self.keywords:
            raise ValidationError("long-term record keywords must be non-empty")
        self.keywords = [k.lower() for k in self.keywords]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "keywords": self.keywords,
            "created_at": self.created_at,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LongTermRecord":
        return cls(
            id=data["id"],
            text=data["text"],
            keywords=data["keywords"],
            created_at=data["created_at"],
            source=data.get("source", "developer"),
        )


class LongTermMemoryBase(ABC):
    """Persistent memory with two control paradigms.

    ``record``/``retrieve`` are developer-controlled and called at fixed
    points in the agent workflow; ``record_to_memory``/
    ``retrieve_from_memory`` are agent-controlled and get registered as
    tools so the model decides when to use them.
    """

    @abstractmethod
    def record(self, msgs: Sequence[Msg]) -> int: ...

    @abstractmethod
    def retrieve(self, msgs: Sequence[Msg], k: int = 5) -> list[str]: ...

    @abstractmethod
    def record_to_memory(self, thought: str, keywords: list[str]) -> str: ...

    @abstractmethod
    def retrieve_from_memory(self, keywords: list[str]) -> list[str]: ...


class KeywordLongTermMemory(LongTermMemoryBase):
    """JSON-lines keyword store: overlap-count ranking, newest-first ties.

    Writes are serialized behind a lock; reads work on the in-memory
    index. One record per line keeps appends atomic enough for a single
    process.
    """

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._records: list[LongTermRecord] = []
        self._write_lock = threading.Lock()
        if self.path.exists():
            try:
                with open(self.path, "r", encoding="utf-8") as fh:
                    for line in fh:
                        line = line.strip()
                        if line:
                            self._records.append(LongTermRecord.from_dict(json.loads(line)))
            except (OSError, json.JSONDecodeError, KeyError) as exc:
                raise StorageError(f"cannot load long-term store {self.path}: {exc}") from exc

    def _append(self, record: LongTermRecord) -> None:
        with self._write_lock:
            try:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
            except OSError as exc:
                raise StorageError(f"cannot write long-term store {self.path}: {exc}") from exc
            self._records.append(record)

    def record(self, msgs: Sequence[Msg]) -> int:
        written = 0
        for msg in msgs:
            text = msg.get_text_content()
            if not text:
                continue
            keywords = extract_keywords(text)
            if not keywords:
                continue
            self._append(
                LongTermRecord(
                    id=new_id(), text=text, keywords=keywords,
                    created_at=utc_now(), source="developer",
                )
            )
            written += 1
        return written

    def _rank(self, query_keywords: Iterable[str], k: int) -> list[str]:
        query = {q.lower() for q in query_keywords}
        scored: list[tuple[int, int, str]] = []
        for position, record in enumerate(self._records):
            overlap = len(query.intersection(record.keywords))
            if overlap > 0:
                scored.append((overlap, position, record.text))
        # higher overlap first; ties broken by recency (newest first)
        scored.sort(key=lambda item: (-item[0], -item[1]))
        return [text for _, _, text in scored[:k]]

    def retrieve(self, msgs: Sequence[Msg], k: int = 5) -> list[str]:
        if k < 1:
            raise ValidationError("k must be >= 1")
        query: set[str] = set()
        for msg in msgs:
            text = msg.get_text_content()
            if text:
                query.update(extract_keywords(text))
        return self._rank(query, k)

    def record_to_memory(self, thought: str, keywords: list[str]) -> str:
        """Store a note the agent considers important.

        Args:
            thought: The information to remember.
            keywords: Lookup keywords for later retrieval.
        """
        if not thought:
            raise ValidationError("thought must be non-empty")
        if not keywords or not any(k.strip() for k in keywords):
            raise ValidationError("keywords must be non-empty")
        record = LongTermRecord(
            id=new_id(),
            text=thought,
            keywords=[k for k in keywords if k.strip()],
            created_at=utc_now(),
            source="agent",
        )
        self._append(record)
        return f"Recorded to long-term memory with keywords: {', '.join(record.keywords)}"

    def retrieve_from_memory(self, keywords: list[str]) -> list[str]:
        """Look up stored notes by keyword.

        Args:
            keywords: Keywords to match against stored records.
        """
        if not keywords:
            raise ValidationError("keywords must be non-empty")
        return self._rank(keywords, k=5)

    def clear(self) -> None:
        """Drop all records and compact the backing file."""
        with self._write_lock:
            self._records.clear()
            if self.path.exists():
                self.path.write_text("")

    def __len__(self) -> int:
        return len(self._records)
