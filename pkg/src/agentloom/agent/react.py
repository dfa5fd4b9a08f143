"""The reasoning-acting agent.

One reply runs a loop of at most ``max_iters`` iterations: a reasoning
step (model call with the active tool schemas) followed by an acting step
(tool execution, optionally in parallel). The loop ends when the model
calls the finish function; if the budget runs out, a final forced pass
without tools produces a best-effort answer.

``interrupt()`` may be called from any task while a reply is in flight.
The loop is cancelled at the next suspension point, partial model output
and preserved tool chunks are written to memory as annotated
observations, and ``handle_interrupt`` decides what to answer.
"""

from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass, field
from typing import Any, Sequence

from ..errors import AgentLoomError, ValidationError
from ..memory import LONG_TERM_MODES, LongTermMemoryBase, ShortTermMemory
from ..message import ContentBlock, Msg, ToolUseBlock, utc_now
from ..model import ChatBackend, ChatResponse, FormatterBase, GenerateOptions
from ..tool import Toolkit, ToolResultChunk
from ..tracing import span
from .base import AgentBase

log = logging.getLogger(__name__)

DEFAULT_FINISH_FUNCTION = "generate_response"
DEFAULT_INTERRUPT_ACK = (
    "I noticed you have interrupted me. What can I do for you?"
)
INTERRUPT_ANNOTATION = "interrupted by user"

STATE_SCHEMA_VERSION = 1


@dataclass
class InterruptContext:
    """Everything the agent knows about one interruption."""

    at: str  # "reasoning" | "acting" | "idle"
    tool_ids: list[str] = field(default_factory=list)
    partial: ChatResponse | None = None
    preserved: list[Msg] = field(default_factory=list)
    user_payload: Msg | None = None
    timestamp: str = field(default_factory=utc_now)


class ReActAgent(AgentBase):
    def __init__(
        self,
        name: str,
        sys_prompt: str,
        model: ChatBackend,
        formatter: FormatterBase,
        toolkit: Toolkit | None = None,
        memory: ShortTermMemory | None = None,
        long_term_memory: LongTermMemoryBase | None = None,
        long_term_memory_mode: str = "both",
        max_iters: int = 10,
        parallel_tool_call: bool = False,
        finish_function_name: str = DEFAULT_FINISH_FUNCTION,
        interrupt_ack_text: str = DEFAULT_INTERRUPT_ACK,
    ) -> None:
        super().__init__(name)
        if max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if long_term_memory_mode not in LONG_TERM_MODES:
            raise ValidationError(
                f"long_term_memory_mode must be one of {LONG_TERM_MODES}"
            )
        self.sys_prompt = sys_prompt
        self.model = model
        self.formatter = formatter
        self.toolkit = toolkit if toolkit is not None else Toolkit()
        self.memory = memory if memory is not None else ShortTermMemory()
        self.long_term_memory = long_term_memory
        self.long_term_memory_mode = long_term_memory_mode
        self.max_iters = max_iters
        self.parallel_tool_call = parallel_tool_call
        self.finish_function_name = finish_function_name
        self.interrupt_ack_text = interrupt_ack_text
        self.register_state("sys_prompt")

        if not self.toolkit.has_tool(finish_function_name):
            self.toolkit.register_tool_function(
                self._finish_function,
                schema={
                    "name": finish_function_name,
                    "description": (
                        "Call this function when the task is solved to deliver "
                        "your final response to the user."
                    ),
                    "parameters": {
                        "type": "object",
                        "properties": {
                            "response": {
                                "type": "string",
                                "description": "The final response text.",
                            }
                        },
                        "required": ["response"],
                    },
                },
            )
        if self.long_term_memory is not None and self.long_term_memory_mode in (
            "agent_control",
            "both",
        ):
            for tool_name in ("record_to_memory", "retrieve_from_memory"):
                if not self.toolkit.has_tool(tool_name):
                    self.toolkit.register_tool_function(
                        getattr(self.long_term_memory, tool_name)
                    )

        # interruption machinery
        self._replying = False
        self._loop_task: asyncio.Task | None = None
        self._phase = "idle"
        self._interrupt_requested = False
        self._interrupt_payload: Msg | None = None
        self._partial_response: ChatResponse | None = None
        self._acting_calls: list[ToolUseBlock] = []
        self._acting_buffers: dict[str, list[ToolResultChunk]] = {}

    @staticmethod
    def _finish_function(response: str) -> str:
        return "Successfully generated the response."

    # -- reply loop ---------------------------------------------------------

    async def reply(self, msg: Msg | None = None) -> Msg:
        if self._replying:
            raise AgentLoomError(f"agent {self.name!r} already has a reply in flight")
        self._replying = True
        try:
            payload = await self._apply_hooks("pre_reply", {"msg": msg})
            msg = payload.get("msg") if isinstance(payload, dict) else payload
            if msg is not None:
                self.memory.add(msg)
                await self.print(msg)

            ltm_context = self._long_term_context(msg)
            self._interrupt_requested = False
            self._interrupt_payload = None
            self._partial_response = None
            self._acting_calls = []
            self._acting_buffers = {}

            with span(f"{self.name}.reply", "agent", {"agent": self.name}):
                self._loop_task = asyncio.create_task(self._run_loop(ltm_context))
                try:
                    final = await self._loop_task
                except asyncio.CancelledError:
                    if not self._interrupt_requested:
                        raise  # cancelled from outside; propagate untouched
                    context = self._build_interrupt_context()
                    self._record_interrupt_context(context)
                    final = await self.handle_interrupt(context)
                finally:
                    self._loop_task = None
                    self._phase = "idle"

            final = await self._apply_hooks("post_reply", final)
            self.memory.add(final)
            if not self.already_printed(final.id):
                await self.print(final)
            self._record_long_term(msg, final)
            return final
        finally:
            self._replying = False

    async def _run_loop(self, ltm_context: Msg | None) -> Msg:
        for _ in range(self.max_iters):
            if self._interrupt_requested:
                raise asyncio.CancelledError()
            response = await self._reasoning(ltm_context)
            tool_calls = response.tool_calls
            if not tool_calls:
                text = response.get_text_content()
                if text:
                    # tool-free answer: treat as the final response
                    return self._response_msg(response)
                continue
            assistant_msg = Msg(
                self.name, response.content, "assistant", id=response.id
            )
            self.memory.add(assistant_msg)
            finish_call = next(
                (c for c in tool_calls if c["name"] == self.finish_function_name), None
            )
            await self._acting(tool_calls)
            if finish_call is not None:
                response_text = str(finish_call["input"].get("response", ""))
                return Msg(self.name, response_text, "assistant")
        # iteration budget exhausted: one forced pass without tools
        summary = await self._reasoning(ltm_context, allow_tools=False)
        return self._response_msg(summary)

    def _response_msg(self, response: ChatResponse) -> Msg:
        content: str | list[ContentBlock]
        text = response.get_text_content()
        if all(b["type"] == "text" for b in response.content):
            content = text
        else:
            content = response.content
        return Msg(self.name, content, "assistant", id=response.id)

    async def _reasoning(
        self, ltm_context: Msg | None, allow_tools: bool = True
    ) -> ChatResponse:
        self._phase = "reasoning"
        prompt_msgs = [Msg(self.name, self.sys_prompt, "system")]
        if ltm_context is not None:
            prompt_msgs.append(ltm_context)
        prompt_msgs.extend(self.memory.get_all())
        if not allow_tools:
            prompt_msgs.append(
                Msg(
                    self.name,
                    "The step budget is exhausted. Summarize what you know and "
                    "answer the user now, without calling any tools.",
                    "system",
                )
            )
        prompt = self.formatter.format(prompt_msgs)
        schemas = self.toolkit.get_json_schemas() if allow_tools else []
        options = GenerateOptions(tools=schemas, stream=self.model.streaming)

        payload = await self._apply_hooks(
            "pre_reasoning", {"prompt": prompt, "options": options}
        )
        prompt = payload.get("prompt", prompt)
        options = payload.get("options", options)

        if self.model.streaming:
            response: ChatResponse | None = None
            async for chunk in self.model.generate_stream(prompt, options):
                response = chunk
                self._partial_response = chunk
                await self.print(
                    Msg(self.name, chunk.content, "assistant", id=chunk.id), last=False
                )
            assert response is not None, "stream produced no chunks"
            await self.print(
                Msg(self.name, response.content, "assistant", id=response.id), last=True
            )
        else:
            response = await self.model.generate(prompt, options)
            await self.print(Msg(self.name, response.content, "assistant", id=response.id))

        response = await self._apply_hooks("post_reasoning", response)
        self._partial_response = None
        return response

    async def _acting(self, tool_calls: Sequence[ToolUseBlock]) -> list[Msg]:
        self._phase = "acting"
        payload = await self._apply_hooks("pre_acting", {"tool_calls": list(tool_calls)})
        tool_calls = payload.get("tool_calls") if isinstance(payload, dict) else payload
        self._acting_calls = list(tool_calls)
        self._acting_buffers = {c["id"]: [] for c in tool_calls}

        async def run_one(call: ToolUseBlock) -> Msg:
            buffer = self._acting_buffers[call["id"]]
            with span(f"tool {call['name']}", "tool", {"tool": call["name"]}):
                async for chunk in self.toolkit.call_tool_function(call):
                    buffer.append(chunk)
            return self._tool_result_msg(call, buffer)

        if self.parallel_tool_call and len(tool_calls) > 1:
            results = list(await asyncio.gather(*(run_one(c) for c in tool_calls)))
        else:
            results = []
            for call in tool_calls:
                results.append(await run_one(call))
                if self._interrupt_requested:
                    # the cancellation was absorbed by the tool stream; resume it
                    raise asyncio.CancelledError()
        if self._interrupt_requested:
            raise asyncio.CancelledError()

        results = await self._apply_hooks("post_acting", results)
        self.memory.add(results)
        self._acting_calls = []
        self._acting_buffers = {}
        for result in results:
            await self.print(result)
        return results

    def _tool_result_msg(self, call: ToolUseBlock, chunks: list[ToolResultChunk]) -> Msg:
        output: list[ContentBlock] = []
        interrupted = False
        for chunk in chunks:
            output.extend(chunk.blocks)
            interrupted = interrupted or chunk.interrupted
        block: ContentBlock = {
            "type": "tool_result",
            "id": call["id"],
            "name": call["name"],
            "output": output,
        }
        metadata = {"interrupted": True, "annotation": INTERRUPT_ANNOTATION} if interrupted else None
        return Msg("system", [block], "system", metadata=metadata)

    # -- observation ----------------------------------------------------------

    async def observe(self, msgs: Msg | list[Msg] | None) -> None:
        if msgs is None:
            return
        items = [msgs] if isinstance(msgs, Msg) else list(msgs)
        payload = await self._apply_hooks("pre_observe", {"msgs": items})
        items = payload.get("msgs") if isinstance(payload, dict) else payload
        self.memory.add(items)
        await self._apply_hooks("post_observe", items)

    # -- interruption ----------------------------------------------------------

    def interrupt(self, user_payload: Msg | None = None) -> bool:
        """Request cancellation of the in-flight reply.

        Safe to call from any task. Returns False (a no-op) when the agent
        is idle.
        """
        task = self._loop_task
        if task is None or task.done():
            log.info("interrupt ignored: agent %r is idle", self.name)
            return False
        self._interrupt_requested = True
        self._interrupt_payload = user_payload
        task.cancel()
        return True

    def _build_interrupt_context(self) -> InterruptContext:
        preserved = []
        if self._acting_calls:
            preserved = [
                self._tool_result_msg(
                    call,
                    self._acting_buffers.get(call["id"])
                    or [
                        ToolResultChunk(
                            blocks=[{"type": "text", "text": "The tool execution was interrupted by the user."}],
                            is_last=True,
                            interrupted=True,
                        )
                    ],
                )
                for call in self._acting_calls
            ]
        return InterruptContext(
            at=self._phase if self._phase in ("reasoning", "acting") else "idle",
            tool_ids=[c["id"] for c in self._acting_calls],
            partial=self._partial_response,
            preserved=preserved,
            user_payload=self._interrupt_payload,
        )

    def _record_interrupt_context(self, context: InterruptContext) -> None:
        """Write the interruption into memory as annotated observations."""
        annotation = {"interrupted": True, "annotation": INTERRUPT_ANNOTATION}
        if context.at == "reasoning" and context.partial is not None and context.partial.content:
            self.memory.add(
                Msg(
                    self.name,
                    context.partial.content,
                    "assistant",
                    metadata=annotation,
                    id=context.partial.id,
                )
            )
        for msg in context.preserved:
            if msg.metadata is None:
                msg.metadata = dict(annotation)
            self.memory.add(msg)
        self.memory.add(
            Msg(
                "system",
                f"[The agent was {INTERRUPT_ANNOTATION} during the {context.at} step "
                f"at {context.timestamp}.]",
                "system",
                metadata=annotation,
            )
        )
        if context.user_payload is not None:
            self.memory.add(context.user_payload)

    async def handle_interrupt(self, context: InterruptContext) -> Msg:
        """Default reaction to an interruption: a fixed acknowledgment.

        Override to resume the loop, consult the model, or act on
        ``context.user_payload``.
        """
        return Msg(self.name, self.interrupt_ack_text, "assistant")

    # -- long-term memory -------------------------------------------------------

    def _long_term_context(self, msg: Msg | None) -> Msg | None:
        if self.long_term_memory is None or self.long_term_memory_mode == "agent_control":
            return None
        query = [msg] if msg is not None else self.memory.get_all()[-3:]
        try:
            notes = self.long_term_memory.retrieve(query)
        except Exception:
            log.exception("long-term retrieve failed; continuing without context")
            return None
        if not notes:
            return None
        listing = "\n".join(f"- {note}" for note in notes)
        return Msg(
            "system", f"Relevant notes from long-term memory:\n{listing}", "system"
        )

    def _record_long_term(self, incoming: Msg | None, final: Msg) -> None:
        if self.long_term_memory is None or self.long_term_memory_mode == "agent_control":
            return
        msgs = [m for m in (incoming, final) if m is not None]
        try:
            self.long_term_memory.record(msgs)
        except Exception:
            log.exception("long-term record failed; reply is unaffected")

    # -- state -----------------------------------------------------------------

    def state_dict(self) -> dict[str, Any]:
        state = super().state_dict()
        state["schema_version"] = STATE_SCHEMA_VERSION
        return state

    def load_state_dict(self, state: dict[str, Any], strict: bool = True) -> None:
        state = dict(state)
        version = state.pop("schema_version", STATE_SCHEMA_VERSION)
        if version != STATE_SCHEMA_VERSION:
            raise ValidationError(f"unsupported agent state schema version {version!r}")
        super().load_state_dict(state, strict=strict)
