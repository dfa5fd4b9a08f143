"""App-side studio connection.

``studio_init`` registers the run, installs forwarding hooks on the given
agents, and opens one persistent connection that streams messages and
spans out and carries interrupt / user-input control events back in.
Forwarding is fire-and-forget: if the studio is down the app runs
unaffected, with up to 1000 events buffered across reconnects.
"""

from __future__ import annotations

import asyncio
import json
import logging
from collections import deque
from typing import Any, Iterable

import httpx
import websockets

from ..agent.base import AgentBase
from ..agent.user import QueueInput, UserAgent
from ..message import Msg
from ..tracing import Span, add_span_sink, remove_span_sink

log = logging.getLogger(__name__)

BUFFER_LIMIT = 1000
RECONNECT_DELAYS = (0.5, 1.0, 2.0, 5.0)


class _ForwardingSpanSink:
    def __init__(self, handle: "StudioHandle") -> None:
        self.handle = handle

    def emit(self, span: Span) -> None:
        self.handle.enqueue("span", span.to_dict())


class StudioHandle:
    """Live connection state; close() detaches all hooks and sinks."""

    def __init__(
        self,
        studio_url: str,
        run_id: str,
        agents: list[AgentBase],
        user_agents: list[UserAgent],
        enabled: bool = True,
    ) -> None:
        self.studio_url = studio_url.rstrip("/")
        self.run_id = run_id
        self.agents = agents
        self.user_agents = user_agents
        self.enabled = enabled
        self.connected = False
        self._buffer: deque[dict[str, Any]] = deque(maxlen=BUFFER_LIMIT)
        self._wakeup = asyncio.Event()
        self._closed = False
        self._hook_ids: list[tuple[AgentBase, str]] = []
        self._span_sink: _ForwardingSpanSink | None = None
        self._runner: asyncio.Task | None = None

    # -- event production ----------------------------------------------------

    def enqueue(self, event_type: str, payload: Any) -> None:
        if not self.enabled or self._closed:
            return
        self._buffer.append({"type": event_type, "payload": payload})
        self._wakeup.set()

    def _install_hooks(self) -> None:
        def forward_print(agent: AgentBase, payload: Any) -> None:
            try:
                msg = payload.get("msg") if isinstance(payload, dict) else payload
                if isinstance(msg, Msg):
                    body = msg.to_dict()
                    body["stream_done"] = bool(
                        payload.get("last", True) if isinstance(payload, dict) else True
                    )
                    self.enqueue("message", body)
            except Exception:
                log.debug("studio forward hook failed", exc_info=True)

        def forward_reply(agent: AgentBase, reply: Any) -> None:
            try:
                if isinstance(reply, Msg):
                    body = reply.to_dict()
                    body["stream_done"] = True
                    self.enqueue("message", body)
            except Exception:
                log.debug("studio forward hook failed", exc_info=True)

        for agent in self.agents:
            self._hook_ids.append((agent, agent.register_hook("print", "pre", forward_print)))
        for user in self.user_agents:
            self._hook_ids.append((user, user.register_hook("reply", "post", forward_reply)))
        self._span_sink = _ForwardingSpanSink(self)
        add_span_sink(self._span_sink)

    # -- control handling ------------------------------------------------------

    def _handle_control(self, control: dict[str, Any]) -> None:
        control_type = control.get("type")
        payload = control.get("payload") or {}
        target = payload.get("agent")
        if control_type == "interrupt":
            text = payload.get("text")
            steer = Msg(target or "user", text, "user") if text else None
            for agent in self.agents:
                if target and agent.name != target:
                    continue
                interrupt = getattr(agent, "interrupt", None)
                if callable(interrupt):
                    interrupt(steer)
        elif control_type == "user_input":
            text = payload.get("text", "")
            for user in self.user_agents:
                if target and user.name != target:
                    continue
                if isinstance(user.input_source, QueueInput):
                    user.input_source.put(text)

    # -- connection loop -----------------------------------------------------------

    async def _run(self) -> None:
        ws_url = self.studio_url.replace("http", "ws", 1) + f"/ws/app/{self.run_id}"
        delay_index = 0
        while not self._closed:
            try:
                async with websockets.connect(ws_url, open_timeout=5) as ws:
                    self.connected = True
                    delay_index = 0
                    await self._pump(ws)
            except asyncio.CancelledError:
                raise
            except Exception as exc:
                if self._closed:
                    return
                self.connected = False
                delay = RECONNECT_DELAYS[min(delay_index, len(RECONNECT_DELAYS) - 1)]
                delay_index += 1
                log.warning("studio connection lost (%s); retrying in %.1fs", exc, delay)
                await asyncio.sleep(delay)
            else:
                self.connected = False

    async def _pump(self, ws: Any) -> None:
        async def sender() -> None:
            while True:
                while self._buffer:
                    event = self._buffer.popleft()
                    await ws.send(json.dumps(event))
                self._wakeup.clear()
                await self._wakeup.wait()

        async def receiver() -> None:
            async for raw in ws:
                try:
                    control = json.loads(raw)
                except json.JSONDecodeError:
                    continue
                if isinstance(control, dict):
                    self._handle_control(control)

        send_task = asyncio.create_task(sender())
        recv_task = asyncio.create_task(receiver())
        try:
            done, pending = await asyncio.wait(
                {send_task, recv_task}, return_when=asyncio.FIRST_COMPLETED
            )
            for task in pending:
                task.cancel()
            for task in done:
                exc = task.exception()
                if exc is not None and not isinstance(exc, asyncio.CancelledError):
                    raise exc
        finally:
            send_task.cancel()
            recv_task.cancel()

    async def close(self) -> None:
        self._closed = True
        if self._runner is not None:
            self._runner.cancel()
            try:
                await self._runner
            except (asyncio.CancelledError, Exception):
                pass
        for agent, hook_id in self._hook_ids:
            try:
                agent.remove_hook(hook_id)
            except Exception:
                pass
        self._hook_ids.clear()
        if self._span_sink is not None:
            remove_span_sink(self._span_sink)
            self._span_sink = None
        self.connected = False

    async def drain(self, timeout: float = 2.0) -> None:
        """Wait until the outgoing buffer is flushed (best effort)."""
        deadline = asyncio.get_event_loop().time() + timeout
        while self._buffer and asyncio.get_event_loop().time() < deadline:
            await asyncio.sleep(0.02)


async def studio_init(
    studio_url: str,
    run_name: str,
    agents: Iterable[AgentBase] = (),
    user_agents: Iterable[UserAgent] = (),
    run_id: str | None = None,
) -> StudioHandle:
    """Connect this application to a studio server.

    On any connection failure the returned handle is a disabled no-op:
    the studio must never break the application.
    """
    agents = list(agents)
    user_agents = list(user_agents)
    try:
        async with httpx.AsyncClient(timeout=5.0) as client:
            response = await client.post(
                f"{studio_url.rstrip('/')}/api/runs",
                json={"name": run_name, **({"run_id": run_id} if run_id else {})},
            )
            response.raise_for_status()
            run_id = response.json()["run_id"]
    except Exception as exc:
        log.warning("studio at %s unreachable (%s); continuing without it", studio_url, exc)
        return StudioHandle(studio_url, run_id or "offline", agents, user_agents, enabled=False)

    handle = StudioHandle(studio_url, run_id, agents, user_agents, enabled=True)
    handle._install_hooks()
    handle._runner = asyncio.create_task(handle._run())
    return handle
