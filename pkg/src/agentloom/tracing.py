"""Span tracing: timestamped, parented records of computational steps.

Spans form a per-run tree (agent reply -> model call / tool call) and are
delivered to registered sinks. Emission must never break the traced code:
sink failures are swallowed and counted.
"""

from __future__ import annotations

import contextvars
import logging
import threading
import uuid
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Iterator, Protocol

from .message import utc_now

log = logging.getLogger(__name__)

SPAN_KINDS = ("llm", "tool", "agent", "other")


@dataclass
class Span:
    trace_id: str
    span_id: str
    parent_span_id: str | None
    name: str
    kind: str
    start: str
    end: str | None = None
    status: str = "ok"
    attributes: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "trace_id": self.trace_id,
            "span_id": self.span_id,
            "parent_span_id": self.parent_span_id,
            "name": self.name,
            "kind": self.kind,
            "start": self.start,
            "end": self.end,
            "status": self.status,
            "attributes": dict(self.attributes),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Span":
        return cls(
            trace_id=data["trace_id"],
            span_id=data["span_id"],
            parent_span_id=data.get("parent_span_id"),
            name=data["name"],
            kind=data.get("kind", "other"),
            start=data["start"],
            end=data.get("end"),
            status=data.get("status", "ok"),
            attributes=data.get("attributes", {}),
        )


class SpanSink(Protocol):
    def emit(self, span: Span) -> None: ...


class InMemorySpanSink:
    """Collects spans in a list; handy for tests and local inspection."""

    def __init__(self) -> None:
        self.spans: list[Span] = []
        self._lock = threading.Lock()

    def emit(self, span: Span) -> None:
        with self._lock:
            self.spans.append(span)

    def by_kind(self, kind: str) -> list[Span]:
        return [s for s in self.spans if s.kind == kind]

    def clear(self) -> None:
        with self._lock:
            self.spans.clear()


_sinks: list[SpanSink] = []
_dropped_emits = 0

# (trace_id, span_id) of the currently open span, per task.
_current: contextvars.ContextVar[tuple[str, str] | None] = contextvars.ContextVar(
    "agentloom_current_span", default=None
)


def add_span_sink(sink: SpanSink) -> None:
    _sinks.append(sink)


def remove_span_sink(sink: SpanSink) -> None:
    if sink in _sinks:
        _sinks.remove(sink)


def dropped_emit_count() -> int:
    """Number of span emissions that failed and were swallowed."""
    return _dropped_emits


def current_span_context() -> tuple[str, str] | None:
    return _current.get()


def _emit(span: Span) -> None:
    global _dropped_emits
    for sink in list(_sinks):
        try:
            sink.emit(span)
        except Exception:
            _dropped_emits += 1
            log.debug("span sink %r failed", sink, exc_info=True)


@contextmanager
def span(name: str, kind: str = "other", attributes: dict[str, Any] | None = None) -> Iterator[Span]:
    """Open a span for the duration of the block.

    Nesting is tracked per asyncio task via contextvars, so concurrent
    tasks get independent parent chains.
    """
    if kind not in SPAN_KINDS:
        kind = "other"
    parent = _current.get()
    if parent is None:
        trace_id = uuid.uuid4().hex
        parent_span_id = None
    else:
        trace_id, parent_span_id = parent
    record = Span(
        trace_id=trace_id,
        span_id=uuid.uuid4().hex[:16],
        parent_span_id=parent_span_id,
        name=name,
        kind=kind,
        start=utc_now(),
        attributes=dict(attributes or {}),
    )
    token = _current.set((trace_id, record.span_id))
    try:
        yield record
    except BaseException as exc:
        record.status = "error"
        record.attributes.setdefault("error", f"{type(exc).__name__}: {exc}")
        raise
    finally:
        _current.reset(token)
        record.end = utc_now()
        _emit(record)
