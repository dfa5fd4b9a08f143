"""MCP clients over a stdio JSON-RPC transport.

Two session styles: the stateful client holds one persistent subprocess
session across many tool calls (connect once, close once), while the
stateless client spins up a fresh session around every call. Both turn
remote tools into local async callables that register like any other tool.
"""

from __future__ import annotations

import asyncio
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Awaitable, Callable, Sequence

from ..errors import (
    McpLaunchError,
    McpProtocolError,
    McpSessionStateError,
    ToolExecutionError,
    TransportError,
)
from ..message import ContentBlock, validate_block

log = logging.getLogger(__name__)

PROTOCOL_VERSION = "2024-11-05"
CLIENT_INFO = {"name": "agentloom", "version": "0.1.0"}


@dataclass
class StdioServerConfig:
    """How to launch and talk to a stdio MCP server."""

    command: str
    args: Sequence[str] = ()
    env: dict[str, str] | None = None
    request_timeout_seconds: float = 30.0

    def __post_init__(self) -> None:
        if not self.command:
            raise McpLaunchError("server command must be non-empty")


@dataclass
class RemoteToolDescriptor:
    name: str
    description: str
    input_schema: dict[str, Any]


@dataclass
class McpCallResult:
    blocks: list[ContentBlock]
    is_error: bool = False

    def text(self) -> str:
        return "\n".join(
            b["text"] for b in self.blocks if b.get("type") == "text"  # type: ignore[typeddict-item]
        )


class _StdioConnection:
    """One subprocess speaking newline-delimited JSON-RPC 2.0."""

    def __init__(self, config: StdioServerConfig) -> None:
        self.config = config
        self.process: asyncio.subprocess.Process | None = None
        self._next_id = 0
        self._lock = asyncio.Lock()  # one in-flight request at a time
        self.server_info: dict[str, Any] = {}
        self.open = False

    async def start(self) -> None:
        env = dict(os.environ)
        if self.config.env:
            env.update(self.config.env)
        try:
            self.process = await asyncio.create_subprocess_exec(
                self.config.command,
                *self.config.args,
                stdin=asyncio.subprocess.PIPE,
                stdout=asyncio.subprocess.PIPE,
                stderr=asyncio.subprocess.DEVNULL,
                env=env,
            )
        except (OSError, ValueError) as exc:
            raise McpLaunchError(f"cannot launch {self.config.command!r}: {exc}") from exc
        self.open = True

    async def request(self, method: str, params: dict[str, Any] | None = None) -> Any:
        if not self.open or self.process is None:
            raise McpSessionStateError("connection is not open")
        async with self._lock:
            self._next_id += 1
            request_id = self._next_id
            frame = {"jsonrpc": "2.0", "id": request_id, "method": method}
            if params is not None:
                frame["params"] = params
            await self._write(frame)
            try:
                line = await asyncio.wait_for(
                    self.process.stdout.readline(), self.config.request_timeout_seconds
                )
            except asyncio.TimeoutError:
                raise McpProtocolError(f"timed out waiting for {method!r} response") from None
            if not line:
                self.open = False
                raise TransportError("server closed the stream mid-session")
            try:
                response = json.loads(line)
            except json.JSONDecodeError as exc:
                raise McpProtocolError(f"malformed JSON-RPC frame: {exc}") from None
            if response.get("id") != request_id:
                raise McpProtocolError(
                    f"response id {response.get('id')!r} does not match request id {request_id}"
                )
            if "error" in response:
                err = response["error"]
                raise McpProtocolError(f"server error {err.get('code')}: {err.get('message')}")
            return response.get("result")

    async def notify(self, method: str, params: dict[str, Any] | None = None) -> None:
        if not self.open or self.process is None:
            raise McpSessionStateError("connection is not open")
        frame: dict[str, Any] = {"jsonrpc": "2.0", "method": method}
        if params is not None:
            frame["params"] = params
        await self._write(frame)

    async def _write(self, frame: dict[str, Any]) -> None:
        assert self.process is not None and self.process.stdin is not None
        try:
            self.process.stdin.write((json.dumps(frame) + "\n").encode("utf-8"))
            await self.process.stdin.drain()
        except (ConnectionResetError, BrokenPipeError, OSError) as exc:
            self.open = False
            raise TransportError(f"cannot write to server: {exc}") from exc

    async def initialize(self) -> None:
        result = await self.request(
            "initialize",
            {
                "protocolVersion": PROTOCOL_VERSION,
                "clientInfo": CLIENT_INFO,
                "capabilities": {"tools": {}},
            },
        )
        self.server_info = (result or {}).get("serverInfo", {})
        await self.notify("notifications/initialized")

    async def close(self, grace_seconds: float = 5.0) -> None:
        if self.process is None:
            return
        self.open = False
        process = self.process
        try:
            if process.stdin is not None:
                try:
                    frame = {"jsonrpc": "2.0", "method": "notifications/shutdown"}
                    process.stdin.write((json.dumps(frame) + "\n").encode("utf-8"))
                    await process.stdin.drain()
                    process.stdin.close()
                except (ConnectionResetError, BrokenPipeError, OSError, RuntimeError):
                    pass
            await asyncio.wait_for(process.wait(), grace_seconds)
        except asyncio.TimeoutError:
            process.kill()
            await process.wait()
        finally:
            self.process = None


def _result_blocks(result: Any) -> McpCallResult:
    content = (result or {}).get("content", [])
    blocks: list[ContentBlock] = []
    for i, item in enumerate(content):
        if isinstance(item, dict) and item.get("type") == "text":
            blocks.append({"type": "text", "text": item.get("text", "")})
        else:
            blocks.append(validate_block(item, f"content[{i}]"))
    return McpCallResult(blocks=blocks, is_error=bool((result or {}).get("isError")))


def _parse_descriptors(result: Any) -> list[RemoteToolDescriptor]:
    tools = (result or {}).get("tools")
    if not isinstance(tools, list):
        raise McpProtocolError("tools/list result lacks a tools array")
    out = []
    for tool in tools:
        if not isinstance(tool, dict) or "name" not in tool:
            raise McpProtocolError(f"malformed tool descriptor: {tool!r}")
        out.append(
            RemoteToolDescriptor(
                name=tool["name"],
                description=tool.get("description", ""),
                input_schema=tool.get("inputSchema", {"type": "object", "properties": {}}),
            )
        )
    return out


class StatefulMcpClient:
    """Persistent session: one initialize handshake for the whole lifetime."""

    def __init__(self, config: StdioServerConfig, client_id: str | None = None) -> None:
        self.config = config
        self.client_id = client_id or f"stateful-{id(self):x}"
        self._conn: _StdioConnection | None = None

    @property
    def server_info(self) -> dict[str, Any]:
        return self._conn.server_info if self._conn else {}

    @property
    def is_open(self) -> bool:
        return self._conn is not None and self._conn.open

    async def connect(self) -> None:
        if self._conn is not None and self._conn.open:
            raise McpSessionStateError("client is already connected")
        conn = _StdioConnection(self.config)
        await conn.start()
        try:
            await conn.initialize()
        except Exception:
            await conn.close(grace_seconds=1.0)
            raise
        self._conn = conn

    async def close(self) -> None:
        if self._conn is None or self._conn.process is None:
            raise McpSessionStateError("client is not connected")
        await self._conn.close()

    def _require(self) -> _StdioConnection:
        if self._conn is None or not self._conn.open:
            raise McpSessionStateError("client is not connected")
        return self._conn

    async def list_tools(self) -> list[RemoteToolDescriptor]:
        return _parse_descriptors(await self._require().request("tools/list"))

    async def call_tool(self, name: str, arguments: dict[str, Any]) -> McpCallResult:
        result = await self._require().request(
            "tools/call", {"name": name, "arguments": arguments}
        )
        return _result_blocks(result)

    def get_callable(self, tool_name: str) -> Callable[..., Awaitable[list[ContentBlock]]]:
        return _make_proxy(self, tool_name)

    async def __aenter__(self) -> "StatefulMcpClient":
        await self.connect()
        return self

    async def __aexit__(self, *exc: Any) -> None:
        if self.is_open:
            await self.close()


class StatelessMcpClient:
    """Ephemeral sessions: spawn, initialize, call, shut down, every time."""

    def __init__(self, config: StdioServerConfig, client_id: str | None = None) -> None:
        self.config = config
        self.client_id = client_id or f"stateless-{id(self):x}"

    async def _with_session(self, action: Callable[[_StdioConnection], Awaitable[Any]]) -> Any:
        conn = _StdioConnection(self.config)
        await conn.start()
        try:
            await conn.initialize()
            return await action(conn)
        finally:
            await conn.close()

    async def list_tools(self) -> list[RemoteToolDescriptor]:
        result = await self._with_session(lambda c: c.request("tools/list"))
        return _parse_descriptors(result)

    async def call_tool(self, name: str, arguments: dict[str, Any]) -> McpCallResult:
        result = await self._with_session(
            lambda c: c.request("tools/call", {"name": name, "arguments": arguments})
        )
        return _result_blocks(result)

    def get_callable(self, tool_name: str) -> Callable[..., Awaitable[list[ContentBlock]]]:
        return _make_proxy(self, tool_name)


def _make_proxy(client: Any, tool_name: str) -> Callable[..., Awaitable[list[ContentBlock]]]:
    """Local async callable forwarding keyword arguments to the remote tool."""

    async def proxy(**kwargs: Any) -> list[ContentBlock]:
        result = await client.call_tool(tool_name, kwargs)
        if result.is_error:
            raise ToolExecutionError(result.text() or f"remote tool {tool_name!r} failed")
        return result.blocks

    proxy.__name__ = tool_name
    proxy.__qualname__ = tool_name
    proxy.__doc__ = f"Proxy for remote MCP tool {tool_name!r}."
    return proxy


async def stateless_call(
    config: StdioServerConfig, tool_name: str, arguments: dict[str, Any]
) -> McpCallResult:
    """One-shot convenience: fresh session around a single tool call."""
    return await StatelessMcpClient(config).call_tool(tool_name, arguments)
