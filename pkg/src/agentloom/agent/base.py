"""Agent base: identity, hook system, and console printing.

Hooks fire as pre/post events around reply, observe, reasoning, acting,
and print. A hook may return a replacement for the site's payload; pre
hooks rewrite inputs, post hooks rewrite outputs. Hook failures are
logged and skipped - observability code must never kill the agent.
"""

from __future__ import annotations

import inspect
import logging
import sys
from typing import Any, Callable

from ..errors import ValidationError
from ..message import Msg
from ..state import StateModule

log = logging.getLogger(__name__)

HOOK_SITES = ("reply", "observe", "reasoning", "acting", "print")
HOOK_POSITIONS = ("pre", "post")

Hook = Callable[["AgentBase", Any], Any]


class AgentBase(StateModule):
    def __init__(self, name: str) -> None:
        super().__init__()
        self.name = name
        self.register_state("name")
        self._hooks: dict[str, dict[str, Hook]] = {
            f"{pos}_{site}": {} for pos in HOOK_POSITIONS for site in HOOK_SITES
        }
        self._hook_seq = 0
        self._print_progress: dict[str, int] = {}
        self._completed_prints: set[str] = set()

    # -- hooks -------------------------------------------------------------

    def register_hook(self, site: str, position: str, hook: Hook) -> str:
        if site not in HOOK_SITES:
            raise ValidationError(f"unknown hook site {site!r}")
        if position not in HOOK_POSITIONS:
            raise ValidationError(f"hook position must be 'pre' or 'post', got {position!r}")
        self._hook_seq += 1
        hook_id = f"{position}_{site}#{self._hook_seq}"
        self._hooks[f"{position}_{site}"][hook_id] = hook
        return hook_id

    def remove_hook(self, hook_id: str) -> None:
        for hooks in self._hooks.values():
            if hook_id in hooks:
                del hooks[hook_id]
                return
        raise ValidationError(f"unknown hook id {hook_id!r}")

    async def _apply_hooks(self, key: str, payload: Any) -> Any:
        for hook_id, hook in list(self._hooks[key].items()):
            try:
                result = hook(self, payload)
                if inspect.isawaitable(result):
                    result = await result
            except Exception:
                log.exception("hook %s raised; skipping it", hook_id)
                continue
            if result is not None:
                payload = result
        return payload

    # -- printing ----------------------------------------------------------

    async def print(self, msg: Msg, last: bool = True) -> None:
        """Show a message on the console, streaming-aware.

        For cumulative streaming updates call with ``last=False`` and the
        same msg id; only the new suffix is written. Pre-print hooks may
        replace the payload; a payload with ``msg=None`` suppresses
        console output (e.g. to redirect to a UI).
        """
        payload: Any = {"msg": msg, "last": last}
        payload = await self._apply_hooks("pre_print", payload)
        shown = payload.get("msg") if isinstance(payload, dict) else payload
        if shown is not None:
            self._console_write(shown, payload.get("last", last) if isinstance(payload, dict) else last)
        if last:
            if len(self._completed_prints) > 4096:
                self._completed_prints.clear()
            self._completed_prints.add(msg.id)
        await self._apply_hooks("post_print", payload)

    def already_printed(self, msg_id: str) -> bool:
        return msg_id in self._completed_prints

    def _console_write(self, msg: Msg, last: bool) -> None:
        text = msg.get_text_content()
        printed = self._print_progress.get(msg.id, -1)
        if printed < 0:
            sys.stdout.write(f"{msg.name}: ")
            printed = 0
        if text is not None:
            sys.stdout.write(text[printed:])
            self._print_progress[msg.id] = len(text)
        else:
            self._print_progress[msg.id] = 0
        if last:  # tool blocks appear once, with the final write
            for block in msg.get_content_blocks("tool_use"):
                sys.stdout.write(f"[tool call: {block['name']}({block['input']})]")  # type: ignore[typeddict-item]
            for block in msg.get_content_blocks("tool_result"):
                preview = " ".join(
                    b.get("text", "") for b in block["output"] if b.get("type") == "text"  # type: ignore[typeddict-item]
                )
                if len(preview) > 200:
                    preview = preview[:197] + "..."
                sys.stdout.write(f"[{block['name']} result: {preview}]")  # type: ignore[typeddict-item]
        if last:
            sys.stdout.write("\n")
            self._print_progress.pop(msg.id, None)
        sys.stdout.flush()

    # -- core surface --------------------------------------------------------

    async def reply(self, msg: Msg | None = None) -> Msg:
        raise NotImplementedError

    async def observe(self, msgs: Msg | list[Msg] | None) -> None:
        raise NotImplementedError

    async def __call__(self, msg: Msg | None = None) -> Msg:
        return await self.reply(msg)
