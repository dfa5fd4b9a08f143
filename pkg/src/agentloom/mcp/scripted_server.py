"""Scripted stdio MCP server for offline runs and tests.

Serves canned tool definitions and results from a JSON script file:

    {
      "server_name": "scripted",
      "version": "0.1",
      "init_counter_file": "/tmp/inits.log",   // optional: one line per initialize
      "wire_log_file": "/tmp/wire.log",        // optional: raw request frames
      "tools": [
        {
          "name": "search",
          "description": "Search the corpus.",
          "input_schema": {"type": "object", "properties": {"query": {"type": "string"}},
                            "required": ["query"]},
          "result_text": "results for {query}",  // .format(**arguments); "{json}" -> compact args
          "is_error": false,
          "sleep_ms": 0
        }
      ]
    }

Run as: python -m agentloom.mcp.scripted_server script.json
Kept dependency-free on purpose: it must start fast as a subprocess.
"""

from __future__ import annotations

import json
import sys
import time
from typing import Any


def _render(template: str, arguments: dict[str, Any]) -> str:
    if "{json}" in template:
        return template.replace(
            "{json}", json.dumps(arguments, sort_keys=True, separators=(",", ":"))
        )
    try:
        return template.format(**arguments)
    except (KeyError, IndexError, ValueError):
        return template


class ScriptedServer:
    def __init__(self, script: dict[str, Any]) -> None:
        self.script = script
        self.tools = {t["name"]: t for t in script.get("tools", [])}
        self.initialized = False

    def _count_init(self) -> None:
        path = self.script.get("init_counter_file")
        if path:
            with open(path, "a", encoding="utf-8") as fh:
                fh.write("initialize\n")

    def _log_wire(self, line: str) -> None:
        path = self.script.get("wire_log_file")
        if path:
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(line.rstrip("\n") + "\n")

    def handle(self, frame: dict[str, Any]) -> dict[str, Any] | None:
        method = frame.get("method", "")
        request_id = frame.get("id")
        if method == "initialize":
            self._count_init()
            self.initialized = True
            return {
                "jsonrpc": "2.0",
                "id": request_id,
                "result": {
                    "protocolVersion": frame.get("params", {}).get("protocolVersion", ""),
                    "serverInfo": {
                        "name": self.script.get("server_name", "scripted"),
                        "version": self.script.get("version", "0.0"),
                    },
                    "capabilities": {"tools": {}},
                },
            }
        if method == "notifications/initialized":
            return None
        if method == "notifications/shutdown":
            raise SystemExit(0)
        if method == "tools/list":
            return {
                "jsonrpc": "2.0",
                "id": request_id,
                "result": {
                    "tools": [
                        {
                            "name": t["name"],
                            "description": t.get("description", ""),
                            "inputSchema": t.get(
                                "input_schema", {"type": "object", "properties": {}}
                            ),
                        }
                        for t in self.script.get("tools", [])
                    ]
                },
            }
        if method == "tools/call":
            params = frame.get("params", {})
            name = params.get("name")
            arguments = params.get("arguments", {})
            tool = self.tools.get(name)
            if tool is None:
                return {
                    "jsonrpc": "2.0",
                    "id": request_id,
                    "result": {
                        "content": [{"type": "text", "text": f"unknown tool: {name}"}],
                        "isError": True,
                    },
                }
            if tool.get("sleep_ms"):
                time.sleep(tool["sleep_ms"] / 1000)
            if tool.get("crash"):
                raise SystemExit(1)
            text = _render(tool.get("result_text", ""), arguments)
            return {
                "jsonrpc": "2.0",
                "id": request_id,
                "result": {
                    "content": [{"type": "text", "text": text}],
                    "isError": bool(tool.get("is_error")),
                },
            }
        if request_id is not None:
            return {
                "jsonrpc": "2.0",
                "id": request_id,
                "error": {"code": -32601, "message": f"method not found: {method}"},
            }
        return None

    def serve_forever(self) -> None:
        for line in sys.stdin:
            line = line.strip()
            if not line:
                continue
            self._log_wire(line)
            try:
                frame = json.loads(line)
            except json.JSONDecodeError:
                continue
            response = self.handle(frame)
            if response is not None:
                sys.stdout.write(json.dumps(response) + "\n")
                sys.stdout.flush()


def main(argv: list[str] | None = None) -> int:
    argv = argv if argv is not None else sys.argv[1:]
    if len(argv) != 1:
        sys.stderr.write("usage: python -m agentloom.mcp.scripted_server SCRIPT.json\n")
        return 2
    with open(argv[0], "r", encoding="utf-8") as fh:
        script = json.load(fh)
    try:
        ScriptedServer(script).serve_forever()
    except SystemExit as exc:
        return int(exc.code or 0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
