"""Human participant: wraps an input source (console, queue, studio relay)."""

from __future__ import annotations

import asyncio
from typing import Protocol

from ..errors import EndOfInputError
from ..message import Msg
from .base import AgentBase


class InputSource(Protocol):
    async def get(self) -> str: ...


class ConsoleInput:
    """Reads lines from stdin without blocking the event loop."""

    def __init__(self, prompt: str = "") -> None:
        self.prompt = prompt

    async def get(self) -> str:
        try:
            return await asyncio.to_thread(input, self.prompt)
        except EOFError:
            raise EndOfInputError("console input closed") from None


class QueueInput:
    """Programmatic input source; push lines with :meth:`put`."""

    _CLOSED = object()

    def __init__(self) -> None:
        self._queue: asyncio.Queue = asyncio.Queue()

    def put(self, text: str) -> None:
        self._queue.put_nowait(text)

    def close(self) -> None:
        self._queue.put_nowait(self._CLOSED)

    async def get(self) -> str:
        item = await self._queue.get()
        if item is self._CLOSED:
            raise EndOfInputError("input queue closed")
        return item


class UserAgent(AgentBase):
    """Turns incoming lines from a human into user-role messages."""

    def __init__(self, name: str = "user", input_source: InputSource | None = None) -> None:
        super().__init__(name)
        self.input_source = input_source or ConsoleInput(prompt=f"{name}: ")

    async def reply(self, msg: Msg | None = None) -> Msg:
        payload = await self._apply_hooks("pre_reply", {"msg": msg})
        del payload  # the human, not the incoming message, decides the reply
        text = await self.input_source.get()
        reply = Msg(self.name, text, "user")
        reply = await self._apply_hooks("post_reply", reply)
        return reply

    async def observe(self, msgs: Msg | list[Msg] | None) -> None:
        # a human reads the console; nothing to store
        await self._apply_hooks("pre_observe", {"msgs": msgs})
        await self._apply_hooks("post_observe", msgs)
