from __future__ import annotations

import asyncio
import json
import sys

import pytest

from agentloom.errors import (
    McpLaunchError,
    McpSessionStateError,
    ToolExecutionError,
    TransportError,
)
from agentloom.mcp import (
    StatefulMcpClient,
    StatelessMcpClient,
    StdioServerConfig,
    stateless_call,
)
from agentloom.tool import Toolkit

pytestmark = pytest.mark.anyio


@pytest.fixture()
def server_script(tmp_path):
    """Write a scripted-server config; returns (config, counter_path, wire_path)."""

    def make(tools=None, extra=None):
        counter = tmp_path / "inits.log"
        wire = tmp_path / "wire.log"
        script = {
            "server_name": "scripted-tests",
            "version": "1.0",
            "init_counter_file": str(counter),
            "wire_log_file": str(wire),
            "tools": tools
            if tools is not None
            else [
                {
                    "name": "search",
                    "description": "Search the corpus.",
                    "input_schema": {
                        "type": "object",
                        "properties": {"query": {"type": "string"}},
                        "required": ["query"],
                    },
                    "result_text": "results for {query}",
                },
                {
                    "name": "fetch",
                    "description": "Fetch a page.",
                    "input_schema": {"type": "object", "properties": {"url": {"type": "string"}}},
                    "result_text": "page at {url}",
                },
                {
                    "name": "echo",
                    "description": "Echo arguments as JSON.",
                    "input_schema": {"type": "object", "properties": {}},
                    "result_text": "{json}",
                },
                {
                    "name": "broken",
                    "description": "Always errors.",
                    "input_schema": {"type": "object", "properties": {}},
                    "result_text": "remote exploded",
                    "is_error": True,
                },
                {
                    "name": "die",
                    "description": "Kills the server.",
                    "input_schema": {"type": "object", "properties": {}},
                    "crash": True,
                },
            ],
        }
        script.update(extra or {})
        path = tmp_path / "script.json"
        path.write_text(json.dumps(script))
        config = StdioServerConfig(
            command=sys.executable,
            args=["-m", "agentloom.mcp.scripted_server", str(path)],
            request_timeout_seconds=10.0,
        )
        return config, counter, wire

    return make


def init_count(counter_path) -> int:
    if not counter_path.exists():
        return 0
    return len(counter_path.read_text().splitlines())


class TestStatefulClient:
    async def test_connect_list_call_close_single_initialize(self, server_script):
        config, counter, _ = server_script()
        client = StatefulMcpClient(config)
        await client.connect()
        try:
            assert client.server_info["name"] == "scripted-tests"
            tools = await client.list_tools()
            assert [t.name for t in tools][:2] == ["search", "fetch"]
            first = await client.call_tool("search", {"query": "cats"})
            second = await client.call_tool("search", {"query": "dogs"})
            assert first.text() == "results for cats"
            assert second.text() == "results for dogs"
        finally:
            await client.close()
        assert init_count(counter) == 1

    async def test_double_close_is_state_error(self, server_script):
        config, _, _ = server_script()
        client = StatefulMcpClient(config)
        await client.connect()
        await client.close()
        with pytest.raises(McpSessionStateError):
            await client.close()

    async def test_call_before_connect_is_state_error(self, server_script):
        config, _, _ = server_script()
        client = StatefulMcpClient(config)
        with pytest.raises(McpSessionStateError):
            await client.list_tools()

    async def test_server_crash_fails_call_and_closes_session(self, server_script):
        config, _, _ = server_script()
        client = StatefulMcpClient(config)
        await client.connect()
        with pytest.raises(TransportError):
            await client.call_tool("die", {})
        assert not client.is_open
        with pytest.raises(McpSessionStateError):
            await client.call_tool("search", {"query": "x"})

    async def test_spawn_failure_is_launch_error(self):
        config = StdioServerConfig(command="/nonexistent/never-a-binary")
        client = StatefulMcpClient(config)
        with pytest.raises(McpLaunchError):
            await client.connect()


class TestStatelessClient:
    async def test_each_call_initializes_fresh_session(self, server_script):
        config, counter, _ = server_script()
        client = StatelessMcpClient(config)
        for query in ("a", "b", "c"):
            result = await client.call_tool("search", {"query": query})
            assert result.text() == f"results for {query}"
        assert init_count(counter) == 3

    async def test_result_equals_stateful_result(self, server_script):
        config, _, _ = server_script()
        stateless = StatelessMcpClient(config)
        stateful = StatefulMcpClient(config)
        await stateful.connect()
        try:
            a = await stateless.call_tool("search", {"query": "same"})
            b = await stateful.call_tool("search", {"query": "same"})
        finally:
            await stateful.close()
        assert a.blocks == b.blocks

    async def test_concurrent_calls_do_not_interleave(self, server_script):
        config, counter, _ = server_script()
        client = StatelessMcpClient(config)
        queries = [f"q{i}" for i in range(5)]
        results = await asyncio.gather(
            *(client.call_tool("search", {"query": q}) for q in queries)
        )
        assert [r.text() for r in results] == [f"results for {q}" for q in queries]
        assert init_count(counter) == 5

    async def test_one_shot_helper(self, server_script):
        config, _, _ = server_script()
        result = await stateless_call(config, "fetch", {"url": "http://x"})
        assert result.text() == "page at http://x"


class TestToolDiscovery:
    async def test_descriptors_parsed_verbatim(self, server_script):
        schema = {"type": "object", "properties": {"q": {"type": "string"}}, "required": ["q"]}
        config, _, _ = server_script(
            tools=[{"name": "only", "description": "The only tool.", "input_schema": schema,
                    "result_text": "ok"}]
        )
        (descriptor,) = await StatelessMcpClient(config).list_tools()
        assert descriptor.name == "only"
        assert descriptor.description == "The only tool."
        assert descriptor.input_schema == schema

    async def test_empty_server(self, server_script):
        config, _, _ = server_script(tools=[])
        assert await StatelessMcpClient(config).list_tools() == []


class TestProxies:
    async def test_proxy_returns_blocks(self, server_script):
        config, _, _ = server_script()
        client = StatefulMcpClient(config)
        await client.connect()
        try:
            proxy = client.get_callable("search")
            blocks = await proxy(query="x")
            assert blocks == [{"type": "text", "text": "results for x"}]
        finally:
            await client.close()

    async def test_proxy_wrappable_in_local_function(self, server_script):
        config, _, _ = server_script()
        client = StatelessMcpClient(config)
        proxy = client.get_callable("search")

        async def search_upper(query: str) -> str:
            """Search then uppercase."""
            blocks = await proxy(query=query)
            return "".join(b["text"] for b in blocks).upper()

        toolkit = Toolkit()
        toolkit.register_tool_function(search_upper)
        chunks = [
            c async for c in toolkit.call_tool_function(
                {"type": "tool_use", "id": "1", "name": "search_upper", "input": {"query": "up"}}
            )
        ]
        assert chunks[0].text == "RESULTS FOR UP"

    async def test_remote_error_raises_tool_execution_error(self, server_script):
        config, _, _ = server_script()
        proxy = StatelessMcpClient(config).get_callable("broken")
        with pytest.raises(ToolExecutionError, match="remote exploded"):
            await proxy()

    async def test_arguments_serialize_byte_equal_on_wire(self, server_script):
        config, _, wire = server_script()
        arguments = {"query": "exact bytes", "n": 3, "flag": True}
        client = StatelessMcpClient(config)
        result = await client.call_tool("echo", arguments)
        assert json.loads(result.text()) == arguments

        call_frames = [
            json.loads(line)
            for line in wire.read_text().splitlines()
            if '"tools/call"' in line
        ]
        assert len(call_frames) == 1
        assert call_frames[0]["params"]["arguments"] == arguments
        # byte-equality of the arguments object as sent vs. re-serialized
        raw = next(line for line in wire.read_text().splitlines() if '"tools/call"' in line)
        sent = json.dumps(json.loads(raw)["params"]["arguments"])
        assert sent == json.dumps(arguments)

    async def test_registered_proxies_via_toolkit(self, server_script):
        config, counter, _ = server_script()
        client = StatefulMcpClient(config, client_id="webtools")
        await client.connect()
        try:
            toolkit = Toolkit()
            count = await toolkit.register_mcp_client(client, tool_filter=["search", "fetch"])
            assert count == 2
            chunks = [
                c async for c in toolkit.call_tool_function(
                    {"type": "tool_use", "id": "1", "name": "fetch", "input": {"url": "u"}}
                )
            ]
            assert chunks[0].text == "page at u"
            assert toolkit.remove_mcp_clients(["webtools"]) == 2
        finally:
            await client.close()
        assert init_count(counter) == 1


class TestSessionCountLaw:
    async def test_stateful_one_init_for_five_calls(self, server_script):
        config, counter, _ = server_script()
        client = StatefulMcpClient(config)
        await client.connect()
        try:
            for i in range(5):
                await client.call_tool("search", {"query": str(i)})
        finally:
            await client.close()
        assert init_count(counter) == 1

    async def test_stateless_five_inits_for_five_calls(self, server_script):
        config, counter, _ = server_script()
        client = StatelessMcpClient(config)
        for i in range(5):
            await client.call_tool("search", {"query": str(i)})
        assert init_count(counter) == 5


class TestProtocolViolations:
    async def test_mismatched_response_id_is_protocol_error(self):
        # a server that answers every request with the wrong id
        bad_server = (
            "import sys, json\n"
            "for line in sys.stdin:\n"
            "    frame = json.loads(line)\n"
            "    if frame.get('id') is not None:\n"
            "        sys.stdout.write(json.dumps({'jsonrpc': '2.0', 'id': 999,\n"
            "            'result': {'serverInfo': {'name': 'bad', 'version': '0'}}}) + '\\n')\n"
            "        sys.stdout.flush()\n"
        )
        config = StdioServerConfig(command=sys.executable, args=["-c", bad_server],
                                   request_timeout_seconds=5.0)
        from agentloom.errors import McpProtocolError

        client = StatefulMcpClient(config)
        with pytest.raises(McpProtocolError, match="does not match"):
            await client.connect()

    async def test_malformed_frame_is_protocol_error(self):
        garbage_server = (
            "import sys\n"
            "for line in sys.stdin:\n"
            "    sys.stdout.write('this is not json\\n')\n"
            "    sys.stdout.flush()\n"
        )
        config = StdioServerConfig(command=sys.executable, args=["-c", garbage_server],
                                   request_timeout_seconds=5.0)
        from agentloom.errors import McpProtocolError

        client = StatefulMcpClient(config)
        with pytest.raises(McpProtocolError, match="malformed"):
            await client.connect()
