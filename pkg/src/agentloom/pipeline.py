"""Multi-agent composition: pipelines, the message hub, agent-as-tool.

Pipelines route one message through agents in order. A :class:`MsgHub` is
a scoped broadcast domain: while it is open, whatever a participant
replies is observed by every other participant automatically.
"""

from __future__ import annotations

from typing import Awaitable, Callable, Sequence

from .errors import NotFoundError, ValidationError
from .message import Msg
from .agent.base import AgentBase
from .tool.schema import ToolSchema
from .tool.toolkit import ToolEntry

Predicate = Callable[[Msg | None], bool]


async def sequential_pipeline(agents: Sequence[AgentBase], msg: Msg | None = None) -> Msg | None:
    """Run agents in order, each one's reply feeding the next."""
    if not agents:
        raise ValidationError("sequential_pipeline needs at least one agent")
    for agent in agents:
        msg = await agent.reply(msg)
    return msg


class SequentialPipeline:
    """Reusable object form of :func:`sequential_pipeline`."""

    def __init__(self, agents: Sequence[AgentBase]) -> None:
        if not agents:
            raise ValidationError("SequentialPipeline needs at least one agent")
        self.agents = list(agents)

    async def __call__(self, msg: Msg | None = None) -> Msg | None:
        return await sequential_pipeline(self.agents, msg)


async def branch_pipeline(
    condition: Predicate,
    then_agents: Sequence[AgentBase],
    else_agents: Sequence[AgentBase] = (),
    msg: Msg | None = None,
) -> Msg | None:
    """Route the message through one of two agent chains."""
    chosen = then_agents if condition(msg) else else_agents
    if not chosen:
        return msg
    return await sequential_pipeline(chosen, msg)


async def loop_pipeline(
    body_agents: Sequence[AgentBase],
    stop: Predicate,
    max_rounds: int,
    msg: Msg | None = None,
) -> Msg | None:
    """Repeat the body chain until ``stop(msg)`` or the round cap."""
    if max_rounds < 1:
        raise ValidationError("max_rounds must be >= 1")
    for _ in range(max_rounds):
        msg = await sequential_pipeline(body_agents, msg)
        if stop(msg):
            break
    return msg


class MsgHub:
    """Centralized broadcast scope for a group conversation.

    Usage::

        async with MsgHub([alice, bob], announcement=greeting):
            await alice()
            await bob()

    Propagation is wired through temporary post-reply hooks, so exiting
    the scope restores every participant's hook registry exactly.
    A producer never re-observes its own message.
    """

    def __init__(self, participants: Sequence[AgentBase], announcement: Msg | None = None) -> None:
        names = [id(p) for p in participants]
        if len(set(names)) != len(names):
            raise ValidationError("hub participants must be distinct")
        self.participants = list(participants)
        self.announcement = announcement
        self._hook_ids: dict[int, str] = {}
        self._open = False

    def _install(self, agent: AgentBase) -> None:
        async def propagate(producer: AgentBase, reply: Msg) -> None:
            for other in list(self.participants):
                if other is not producer:
                    await other.observe(reply)

        self._hook_ids[id(agent)] = agent.register_hook("reply", "post", propagate)

    def _uninstall(self, agent: AgentBase) -> None:
        hook_id = self._hook_ids.pop(id(agent), None)
        if hook_id is not None:
            agent.remove_hook(hook_id)

    async def __aenter__(self) -> "MsgHub":
        self._open = True
        for agent in self.participants:
            self._install(agent)
        if self.announcement is not None:
            await self.broadcast(self.announcement)
        return self

    async def __aexit__(self, *exc: object) -> None:
        for agent in list(self.participants):
            self._uninstall(agent)
        self._open = False

    async def broadcast(self, msg: Msg) -> None:
        """Deliver a message to every current participant."""
        for agent in list(self.participants):
            await agent.observe(msg)

    def add(self, agent: AgentBase) -> None:
        if agent in self.participants:
            return
        self.participants.append(agent)
        if self._open:
            self._install(agent)

    def delete(self, agent: AgentBase) -> None:
        if agent not in self.participants:
            raise NotFoundError(f"agent {agent.name!r} is not a hub participant")
        self.participants.remove(agent)
        if self._open:
            self._uninstall(agent)


def agent_as_tool(agent: AgentBase, name: str | None = None, description: str | None = None) -> ToolEntry:
    """Wrap an agent as a callable tool with a single ``query`` parameter.

    Register the returned entry with ``toolkit.register_tool_function``;
    invoking it routes the query to the wrapped agent and returns the
    text of its reply.
    """
    tool_name = name or f"ask_{agent.name}"
    schema = ToolSchema(
        name=tool_name,
        description=description or f"Ask the agent {agent.name!r} to handle a task.",
        parameters={
            "type": "object",
            "properties": {
                "query": {"type": "string", "description": "The request to hand over."}
            },
            "required": ["query"],
        },
    )

    async def call_agent(query: str) -> str:
        reply = await agent.reply(Msg("user", query, "user"))
        return reply.get_text_content() or ""

    call_agent.__name__ = tool_name
    return ToolEntry(schema=schema, callable=call_agent)
