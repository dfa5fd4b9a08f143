"""The Toolkit: schema'd callables, activation groups, unified execution.

All registered tools, whether plain functions, async generators, or MCP
proxies, are executed through one asynchronous chunk stream. If a running
tool is cancelled, everything it produced so far stays with the consumer
and a final notice chunk is appended, so agents keep partial progress.
"""

from __future__ import annotations

import asyncio
import inspect
import logging
import time
from dataclasses import dataclass, field
from typing import Any, AsyncIterator, Callable, Iterable, Sequence

from ..errors import (
    GroupNotFoundError,
    ProtectedGroupError,
    ToolConflictError,
    ToolNotFoundError,
    ValidationError,
)
from ..message import ContentBlock, ToolUseBlock
from ..state import StateModule
from .schema import ToolSchema, extension_fragment, schema_from_callable

log = logging.getLogger(__name__)

BASIC_GROUP = "basic"
META_TOOL_NAME = "reset_equipped_tools"
INTERRUPT_NOTICE = "The tool execution was interrupted by the user."
TIMEOUT_NOTICE = "The tool execution timed out."
DEFAULT_TOOL_TIMEOUT = 300.0

_META_SCHEMA = ToolSchema(
    name=META_TOOL_NAME,
    description=(
        "Change which tool groups are equipped. Activate a group to gain its "
        "tools for the current task stage; deactivate groups you no longer need."
    ),
    parameters={
        "type": "object",
        "properties": {
            "group_activations": {
                "type": "object",
                "description": "Mapping of tool group name to desired active state.",
                "additionalProperties": {"type": "boolean"},
            }
        },
        "required": ["group_activations"],
    },
)


@dataclass
class ToolGroup:
    name: str
    description: str
    active: bool = False
    notes: str = ""


@dataclass
class ToolResultChunk:
    blocks: list[ContentBlock] = field(default_factory=list)
    is_last: bool = False
    interrupted: bool = False

    @property
    def text(self) -> str:
        return "".join(
            b["text"] for b in self.blocks if b.get("type") == "text"  # type: ignore[typeddict-item]
        )


@dataclass
class ToolEntry:
    schema: ToolSchema
    callable: Callable[..., Any]
    preset_args: dict[str, Any] = field(default_factory=dict)
    postprocess: Callable[[ToolResultChunk], ToolResultChunk | None] | None = None
    group: str = BASIC_GROUP
    origin: str = "local"
    timeout: float = DEFAULT_TOOL_TIMEOUT
    extend_model: Any = None
    published: ToolSchema = field(init=False)

    def __post_init__(self) -> None:
        published = self.schema.copy()
        props = published.parameters.get("properties", {})
        required = published.parameters.get("required", [])
        for key in self.preset_args:
            props.pop(key, None)
            if key in required:
                required.remove(key)
        extra_props, extra_required = extension_fragment(self.extend_model)
        props.update(extra_props)
        for name in extra_required:
            if name not in required:
                required.append(name)
        published.parameters["properties"] = props
        if required:
            published.parameters["required"] = required
        elif "required" in published.parameters:
            del published.parameters["required"]
        self.published = published


def _normalize_blocks(item: Any) -> list[ContentBlock]:
    if item is None:
        return []
    if isinstance(item, ToolResultChunk):
        return item.blocks
    if isinstance(item, str):
        return [{"type": "text", "text": item}]
    if isinstance(item, dict) and "type" in item:
        return [item]  # a single content block
    if isinstance(item, (list, tuple)):
        out: list[ContentBlock] = []
        for part in item:
            out.extend(_normalize_blocks(part))
        return out
    return [{"type": "text", "text": str(item)}]


async def _iter_sync(gen: Iterable[Any]) -> AsyncIterator[Any]:
    for item in gen:
        yield item
        await asyncio.sleep(0)  # cooperative suspension point between yields


def _is_coroutine_callable(fn: Callable[..., Any]) -> bool:
    return inspect.iscoroutinefunction(fn) or inspect.iscoroutinefunction(
        getattr(fn, "__call__", None)
    )


async def _reap(task: "asyncio.Future[Any]") -> None:
    task.cancel()
    try:
        await task
    except (Exception, asyncio.CancelledError):
        pass


async def _await_with_deadline(awaitable: Any, deadline: float) -> Any:
    """Await with an absolute deadline, raising asyncio.TimeoutError.

    Unlike asyncio.wait_for on older Pythons, an external cancellation is
    never swallowed, even when it races with the result becoming ready;
    interruption must always win over a completed-but-undelivered value.
    """
    task = asyncio.ensure_future(awaitable)
    try:
        done, pending = await asyncio.wait(
            {task}, timeout=max(deadline - time.monotonic(), 0.0)
        )
    except asyncio.CancelledError:
        await _reap(task)
        raise
    if pending:
        await _reap(task)
        raise asyncio.TimeoutError
    return task.result()


class Toolkit(StateModule):
    """Registry and executor for tool functions.

    Tools live in named groups; only tools in active groups are published
    to the model. The "basic" group always exists and is always active.
    """

    def __init__(self) -> None:
        super().__init__()
        self.groups: dict[str, ToolGroup] = {
            BASIC_GROUP: ToolGroup(BASIC_GROUP, "Always-available tools", active=True)
        }
        self._entries: dict[str, ToolEntry] = {}
        self.register_state(
            "groups",
            to_state=lambda groups: {name: g.active for name, g in groups.items()},
            from_state=self._restore_group_state,
        )

    def _restore_group_state(self, activations: dict[str, bool]) -> dict[str, ToolGroup]:
        for name, active in activations.items():
            if name == BASIC_GROUP:
                continue
            if name in self.groups:
                self.groups[name].active = active
            else:
                self.groups[name] = ToolGroup(name, "", active=active)
        return self.groups

    # -- registration ----------------------------------------------------

    def register_tool_function(
        self,
        fn: Callable[..., Any] | ToolEntry,
        schema: ToolSchema | dict[str, Any] | None = None,
        preset_args: dict[str, Any] | None = None,
        postprocess: Callable[[ToolResultChunk], ToolResultChunk | None] | None = None,
        group: str | None = None,
        extend_model: Any = None,
        timeout: float | None = None,
        name: str | None = None,
        description: str | None = None,
    ) -> None:
        """Register a callable; the schema is derived when not supplied.

        ``preset_args`` are merged into every call and hidden from the
        published schema (preset values win over model-supplied ones, so
        credentials cannot be overridden). ``extend_model`` merges extra
        properties into the published schema, e.g. a "thinking" parameter.
        """
        if isinstance(fn, ToolEntry):
            self._store(fn)
            return
        if isinstance(schema, dict):
            schema = ToolSchema(
                name=schema["name"],
                description=schema.get("description", ""),
                parameters=schema.get("parameters", {"type": "object", "properties": {}}),
            )
        if schema is None:
            schema = schema_from_callable(fn, name=name, description=description)
        preset_args = dict(preset_args or {})
        if preset_args and not isinstance(fn, ToolEntry):
            known = schema.parameters.get("properties", {})
            signature_params: set[str] = set(known)
            try:
                signature_params |= set(inspect.signature(fn).parameters)
            except (TypeError, ValueError):
                pass
            for key in preset_args:
                if key not in signature_params:
                    raise ValidationError(
                        f"preset argument {key!r} is not a parameter of {schema.name!r}"
                    )
        entry = ToolEntry(
            schema=schema,
            callable=fn,
            preset_args=preset_args,
            postprocess=postprocess,
            group=group or BASIC_GROUP,
            timeout=timeout if timeout is not None else DEFAULT_TOOL_TIMEOUT,
            extend_model=extend_model,
        )
        self._store(entry)

    def _store(self, entry: ToolEntry) -> None:
        if entry.schema.name in self._entries or entry.schema.name == META_TOOL_NAME:
            raise ToolConflictError(f"tool {entry.schema.name!r} is already registered")
        if entry.group not in self.groups:
            raise GroupNotFoundError(f"tool group {entry.group!r} does not exist")
        self._entries[entry.schema.name] = entry

    def remove_tool_function(self, name: str) -> None:
        if name not in self._entries:
            raise ToolNotFoundError(f"no tool named {name!r}")
        del self._entries[name]

    def has_tool(self, name: str) -> bool:
        return name in self._entries

    @property
    def tool_names(self) -> list[str]:
        return list(self._entries)

    # -- groups -----------------------------------------------------------

    def create_tool_group(
        self, name: str, description: str, active: bool = False, notes: str = ""
    ) -> None:
        if name in self.groups:
            raise ToolConflictError(f"tool group {name!r} already exists")
        self.groups[name] = ToolGroup(name, description, active=active, notes=notes)

    def update_tool_groups(self, group_names: Sequence[str], active: bool) -> None:
        for name in group_names:
            if name == BASIC_GROUP:
                raise ProtectedGroupError('the "basic" group cannot be deactivated')
            if name not in self.groups:
                raise GroupNotFoundError(f"tool group {name!r} does not exist")
        for name in group_names:
            self.groups[name].active = active

    def remove_tool_groups(self, group_names: Sequence[str]) -> None:
        for name in group_names:
            if name == BASIC_GROUP:
                raise ProtectedGroupError('the "basic" group cannot be removed')
            if name not in self.groups:
                raise GroupNotFoundError(f"tool group {name!r} does not exist")
        for name in group_names:
            del self.groups[name]
            for tool_name in [t for t, e in self._entries.items() if e.group == name]:
                del self._entries[tool_name]

    def reset_equipped_tools(self, group_activations: dict[str, bool]) -> str:
        """Flip group activations; the next schema listing reflects them."""
        unknown = [g for g in group_activations if g not in self.groups]
        if unknown:
            raise GroupNotFoundError(f"unknown tool groups: {', '.join(sorted(unknown))}")
        protected = [g for g in group_activations if g == BASIC_GROUP]
        if protected:
            raise ProtectedGroupError('the "basic" group cannot be reconfigured')
        for name, active in group_activations.items():
            self.groups[name].active = bool(active)
        active_names = sorted(name for name, g in self.groups.items() if g.active)
        return "Equipped tool groups are now: " + ", ".join(active_names)

    # -- schemas ----------------------------------------------------------

    def get_json_schemas(self) -> list[ToolSchema]:
        """Schemas of tools in active groups, in registration order.

        The group-switching meta tool is appended whenever at least one
        group is inactive, so the model can re-equip itself.
        """
        schemas = [
            entry.published
            for entry in self._entries.values()
            if self.groups[entry.group].active
        ]
        if any(not g.active for g in self.groups.values()):
            schemas.append(_META_SCHEMA)
        return schemas

    def get_function_call_schemas(self) -> list[dict[str, Any]]:
        return [s.to_function_call_schema() for s in self.get_json_schemas()]

    # -- execution ----------------------------------------------------------

    async def call_tool_function(
        self, tool_call: ToolUseBlock | dict[str, Any]
    ) -> AsyncIterator[ToolResultChunk]:
        """Execute one tool call as a stream of result chunks.

        Agent-level faults (unknown tool, inactive group, tool exception,
        timeout) never raise: they surface as an error chunk the model can
        read. Cooperative cancellation preserves already-yielded chunks and
        appends an interruption notice.
        """
        name = tool_call.get("name", "")
        args = dict(tool_call.get("input") or {})

        entry = self._entries.get(name)
        if entry is None and name == META_TOOL_NAME:
            entry = ToolEntry(schema=_META_SCHEMA, callable=self.reset_equipped_tools)
        if entry is None:
            yield ToolResultChunk(
                blocks=[{"type": "text", "text": f"Error: tool {name!r} is not registered."}],
                is_last=True,
            )
            return
        group = self.groups.get(entry.group)
        if group is not None and not group.active:
            yield ToolResultChunk(
                blocks=[
                    {
                        "type": "text",
                        "text": (
                            f"Error: tool {name!r} belongs to the deactivated group "
                            f"{entry.group!r}. Activate the group first."
                        ),
                    }
                ],
                is_last=True,
            )
            return

        merged = {**args, **entry.preset_args}
        deadline = time.monotonic() + entry.timeout

        def _post(chunk: ToolResultChunk) -> ToolResultChunk:
            if entry.postprocess is None:
                return chunk
            try:
                replaced = entry.postprocess(chunk)
            except Exception as exc:
                log.warning("postprocess for %s failed: %s", name, exc)
                return chunk
            return replaced if replaced is not None else chunk

        fn = entry.callable
        stream: AsyncIterator[Any] | None = None
        try:
            try:
                if inspect.isasyncgenfunction(fn):
                    stream = fn(**merged)
                elif inspect.isgeneratorfunction(fn):
                    stream = _iter_sync(fn(**merged))
                else:
                    if _is_coroutine_callable(fn):
                        awaitable = fn(**merged)
                    else:
                        awaitable = asyncio.to_thread(fn, **merged)
                    value = await _await_with_deadline(awaitable, deadline)
                    if inspect.isawaitable(value):
                        value = await _await_with_deadline(value, deadline)
                    if inspect.isasyncgen(value):
                        stream = value
                    elif inspect.isgenerator(value):
                        stream = _iter_sync(value)
                    else:
                        yield _post(
                            ToolResultChunk(blocks=_normalize_blocks(value), is_last=True)
                        )
                        return

                while True:
                    try:
                        item = await _await_with_deadline(stream.__anext__(), deadline)
                    except StopAsyncIteration:
                        break
                    yield _post(ToolResultChunk(blocks=_normalize_blocks(item)))
            finally:
                aclose = getattr(stream, "aclose", None)
                if aclose is not None:
                    try:
                        await asyncio.shield(aclose())
                    except (Exception, asyncio.CancelledError):
                        pass
        except asyncio.CancelledError:
            yield _post(
                ToolResultChunk(
                    blocks=[{"type": "text", "text": INTERRUPT_NOTICE}],
                    is_last=True,
                    interrupted=True,
                )
            )
            return
        except asyncio.TimeoutError:
            yield _post(
                ToolResultChunk(
                    blocks=[{"type": "text", "text": TIMEOUT_NOTICE}],
                    is_last=True,
                    interrupted=True,
                )
            )
            return
        except Exception as exc:
            yield _post(
                ToolResultChunk(
                    blocks=[
                        {
                            "type": "text",
                            "text": f"Error executing tool {name!r}: {type(exc).__name__}: {exc}",
                        }
                    ],
                    is_last=True,
                )
            )
            return
        yield _post(ToolResultChunk(blocks=[], is_last=True))

    # -- MCP --------------------------------------------------------------

    async def register_mcp_client(
        self,
        client: Any,
        group: str | None = None,
        tool_filter: Iterable[str] | None = None,
    ) -> int:
        """Register proxy tools for every tool the MCP client exposes."""
        wanted = set(tool_filter) if tool_filter is not None else None
        descriptors = await client.list_tools()
        selected = [d for d in descriptors if wanted is None or d.name in wanted]
        for descriptor in selected:
            if descriptor.name in self._entries:
                raise ToolConflictError(
                    f"remote tool {descriptor.name!r} collides with a registered tool"
                )
        for descriptor in selected:
            schema = ToolSchema(
                name=descriptor.name,
                description=descriptor.description,
                parameters=descriptor.input_schema,
            )
            entry = ToolEntry(
                schema=schema,
                callable=client.get_callable(descriptor.name),
                group=group or BASIC_GROUP,
                origin=f"mcp:{client.client_id}",
            )
            self._store(entry)
        return len(selected)

    def remove_mcp_clients(self, client_ids: Sequence[str]) -> int:
        removed = 0
        for client_id in client_ids:
            origin = f"mcp:{client_id}"
            matching = [name for name, e in self._entries.items() if e.origin == origin]
            if not matching:
                raise ToolNotFoundError(f"no tools registered from MCP client {client_id!r}")
            for name in matching:
                del self._entries[name]
            removed += len(matching)
        return removed
