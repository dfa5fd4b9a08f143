"""Studio server: session registry, event relay, and eval result serving.

Each run has an append-only event log with a per-run total order (one
lock serializes ingestion and fan-out). Apps stream events in over one
persistent connection and receive control events (interrupt, user input)
back over the same connection; browser clients subscribe per run and get
the full backlog followed by the live tail. Slow subscribers are
disconnected rather than allowed to block ingestion.
"""

from __future__ import annotations

import asyncio
import json
import logging
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException, Query, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from ..errors import StorageError
from ..eval import EvalStorage, aggregate

log = logging.getLogger(__name__)

EVENT_TYPES = ("message", "span", "status", "interrupt", "user_input")
CONTROL_TYPES = ("interrupt", "user_input")
SUBSCRIBER_BUFFER = 1000


@dataclass
class _Subscriber:
    queue: asyncio.Queue
    dropped: bool = False


@dataclass
class RunSession:
    run_id: str
    name: str
    connected: bool = False
    events: list[dict[str, Any]] = field(default_factory=list)
    subscribers: dict[int, _Subscriber] = field(default_factory=dict)
    control_queue: asyncio.Queue = field(default_factory=asyncio.Queue)
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    _next_subscriber: int = 0

    async def ingest(self, event_type: str, payload: Any, dump_path: Path | None = None) -> dict:
        async with self.lock:
            envelope = {"seq": len(self.events), "type": event_type, "payload": payload}
            self.events.append(envelope)
            for subscriber in self.subscribers.values():
                if subscriber.dropped:
                    continue
                try:
                    subscriber.queue.put_nowait(envelope)
                except asyncio.QueueFull:
                    subscriber.dropped = True
                    log.warning("dropping slow subscriber of run %s", self.run_id)
            if dump_path is not None:
                try:
                    with open(dump_path, "a", encoding="utf-8") as fh:
                        fh.write(json.dumps(envelope, ensure_ascii=False) + "\n")
                except OSError:
                    log.exception("cannot dump event for run %s", self.run_id)
        return envelope

    async def attach_subscriber(self, from_seq: int = 0) -> tuple[int, list[dict], asyncio.Queue]:
        """Atomically snapshot the backlog and register a live queue."""
        async with self.lock:
            self._next_subscriber += 1
            sid = self._next_subscriber
            queue: asyncio.Queue = asyncio.Queue(maxsize=SUBSCRIBER_BUFFER)
            backlog = self.events[from_seq:]
            self.subscribers[sid] = _Subscriber(queue=queue)
            return sid, backlog, queue

    def detach_subscriber(self, sid: int) -> None:
        self.subscribers.pop(sid, None)

    def spans(self) -> list[dict[str, Any]]:
        message_ids = {
            e["payload"].get("id")
            for e in self.events
            if e["type"] == "message" and isinstance(e["payload"], dict)
        }
        out = []
        for event in self.events:
            if event["type"] != "span":
                continue
            span = dict(event["payload"])
            linked = span.get("attributes", {}).get("msg_id")
            span["linked_msg_id"] = linked if linked in message_ids else None
            out.append(span)
        return out


def link_span_to_message(session: RunSession, span: dict[str, Any]) -> str | None:
    """Resolve a span's ``msg_id`` attribute against the run's message log."""
    msg_id = span.get("attributes", {}).get("msg_id")
    if msg_id is None:
        return None
    for event in session.events:
        if event["type"] == "message" and isinstance(event["payload"], dict):
            if event["payload"].get("id") == msg_id:
                return msg_id
    return None


class StudioState:
    def __init__(self, eval_root: str | Path | None = None, dump_dir: str | Path | None = None) -> None:
        self.runs: dict[str, RunSession] = {}
        self.eval_root = Path(eval_root) if eval_root else None
        self.dump_dir = Path(dump_dir) if dump_dir else None
        if self.dump_dir:
            self.dump_dir.mkdir(parents=True, exist_ok=True)

    def dump_path(self, run_id: str) -> Path | None:
        return (self.dump_dir / f"{run_id}.jsonl") if self.dump_dir else None

    def get_run(self, run_id: str) -> RunSession:
        run = self.runs.get(run_id)
        if run is None:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id!r}")
        return run


def _validate_event(raw: Any) -> tuple[str, Any] | str:
    """Returns (type, payload) or a rejection reason string."""
    if not isinstance(raw, dict):
        return "event must be a JSON object"
    event_type = raw.get("type")
    if event_type not in EVENT_TYPES:
        return f"unknown event type {event_type!r}"
    return event_type, raw.get("payload")


def create_app(state: StudioState | None = None, ui_dist: str | Path | None = None) -> FastAPI:
    state = state or StudioState()
    app = FastAPI(title="agentloom studio")
    app.state.studio = state

    @app.get("/api/health")
    async def health() -> dict:
        return {"ok": True, "runs": len(state.runs)}

    @app.post("/api/runs")
    async def register_run(body: dict) -> dict:
        run_id = body.get("run_id") or uuid.uuid4().hex[:12]
        if run_id not in state.runs:
            state.runs[run_id] = RunSession(run_id=run_id, name=body.get("name", run_id))
        return {"run_id": run_id}

    @app.get("/api/runs")
    async def list_runs() -> list[dict]:
        return [
            {
                "run_id": run.run_id,
                "name": run.name,
                "connected": run.connected,
                "events": len(run.events),
            }
            for run in state.runs.values()
        ]

    @app.get("/api/runs/{run_id}/events")
    async def run_events(run_id: str, from_seq: int = Query(0, alias="from")) -> dict:
        run = state.get_run(run_id)
        return {"run_id": run_id, "events": run.events[from_seq:]}

    @app.get("/api/runs/{run_id}/spans")
    async def run_spans(run_id: str) -> dict:
        run = state.get_run(run_id)
        return {"run_id": run_id, "spans": run.spans()}

    @app.websocket("/ws/app/{run_id}")
    async def app_socket(ws: WebSocket, run_id: str) -> None:
        run = state.runs.get(run_id)
        if run is None:
            await ws.close(code=4404)
            return
        await ws.accept()
        run.connected = True
        await run.ingest("status", {"connected": True}, state.dump_path(run_id))

        async def pump_control() -> None:
            while True:
                control = await run.control_queue.get()
                await ws.send_json(control)

        control_task = asyncio.create_task(pump_control())
        try:
            while True:
                try:
                    raw = await ws.receive_json()
                except json.JSONDecodeError:
                    await ws.send_json({"type": "error", "reason": "malformed JSON"})
                    continue
                validated = _validate_event(raw)
                if isinstance(validated, str):
                    await ws.send_json({"type": "error", "reason": validated})
                    continue
                event_type, payload = validated
                await run.ingest(event_type, payload, state.dump_path(run_id))
        except WebSocketDisconnect:
            pass
        finally:
            control_task.cancel()
            run.connected = False
            await run.ingest("status", {"connected": False}, state.dump_path(run_id))

    @app.websocket("/ws/ui/{run_id}")
    async def ui_socket(ws: WebSocket, run_id: str) -> None:
        run = state.runs.get(run_id)
        if run is None:
            await ws.close(code=4404)
            return
        await ws.accept()
        try:
            from_seq = int(ws.query_params.get("from", 0))
        except (TypeError, ValueError):
            from_seq = 0
        sid, backlog, queue = await run.attach_subscriber(from_seq)

        async def pump_events() -> None:
            for envelope in backlog:
                await ws.send_json(envelope)
            while True:
                envelope = await queue.get()
                await ws.send_json(envelope)
                subscriber = run.subscribers.get(sid)
                if subscriber is not None and subscriber.dropped and queue.empty():
                    await ws.close(code=4408, reason="subscriber too slow")
                    return

        async def pump_control() -> None:
            # UI -> server control events: log them and relay to the app
            while True:
                raw = await ws.receive_json()
                if not isinstance(raw, dict) or raw.get("type") not in CONTROL_TYPES:
                    await ws.send_json({"type": "error", "reason": "not a control event"})
                    continue
                control = {"type": raw["type"], "payload": raw.get("payload")}
                await run.ingest(control["type"], control["payload"], state.dump_path(run_id))
                run.control_queue.put_nowait(control)

        sender = asyncio.create_task(pump_events())
        receiver = asyncio.create_task(pump_control())
        try:
            done, pending = await asyncio.wait(
                {sender, receiver}, return_when=asyncio.FIRST_COMPLETED
            )
            for task in pending:
                task.cancel()
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            receiver.cancel()
            run.detach_subscriber(sid)

    # -- evaluation results -------------------------------------------------

    def _storage() -> EvalStorage:
        if state.eval_root is None:
            raise HTTPException(status_code=404, detail="no evaluation storage configured")
        return EvalStorage(state.eval_root)

    @app.get("/api/eval/benchmarks")
    async def eval_benchmarks() -> list[str]:
        return _storage().benchmarks()

    @app.get("/api/eval/{benchmark}/aggregate")
    async def eval_aggregate(benchmark: str, seed: int = 0) -> dict:
        try:
            report = aggregate(_storage(), benchmark, seed=seed)
        except StorageError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return report.to_dict()

    @app.get("/api/eval/{benchmark}/items/{task_id}/trajectories")
    async def eval_trajectories(benchmark: str, task_id: str) -> dict:
        storage = _storage()
        task_dir = storage.root / benchmark / task_id
        if not task_dir.exists():
            raise HTTPException(status_code=404, detail=f"unknown task {task_id!r}")
        repeats: dict[str, Any] = {}
        for repeat_dir in sorted(task_dir.iterdir(), key=lambda p: p.name):
            if not repeat_dir.is_dir():
                continue
            try:
                solution = storage.load_solution(benchmark, task_id, int(repeat_dir.name))
            except (StorageError, ValueError) as exc:
                raise HTTPException(status_code=500, detail=f"{repeat_dir}: {exc}") from exc
            repeats[repeat_dir.name] = solution.to_dict()
        return {"benchmark": benchmark, "task_id": task_id, "repeats": repeats}

    # -- static UI ------------------------------------------------------------

    if ui_dist and Path(ui_dist).exists():
        # registered last: /api and /ws routes above win, everything else
        # falls through to the bundle (index.html at /)
        app.mount("/", StaticFiles(directory=Path(ui_dist), html=True), name="ui")

    return app
