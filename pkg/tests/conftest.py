from __future__ import annotations

import random
import string

import pytest

from agentloom.message import Msg


@pytest.fixture(scope="session")
def anyio_backend():
    return "asyncio"


def random_msg(rng: random.Random, depth: int = 0) -> Msg:
    """Structured random message generator for round-trip checks."""

    def word(max_len: int = 12) -> str:
        return "".join(rng.choices(string.ascii_letters + string.digits + " ~!?é中", k=rng.randint(0, max_len)))

    def block(depth: int) -> dict:
        choices = ["text", "thinking", "tool_use", "image", "audio", "video"]
        if depth < 2:
            choices.append("tool_result")
        kind = rng.choice(choices)
        if kind == "text":
            return {"type": "text", "text": word(40)}
        if kind == "thinking":
            return {"type": "thinking", "thinking": word(40)}
        if kind == "tool_use":
            return {
                "type": "tool_use",
                "id": "call_" + word(6).strip() + str(rng.randint(0, 10**6)),
                "name": rng.choice(["get_weather", "search", "calc"]),
                "input": {"a": rng.randint(-5, 5), "b": word(8), "flag": rng.random() < 0.5},
            }
        if kind == "tool_result":
            return {
                "type": "tool_result",
                "id": "call_" + str(rng.randint(0, 10**6)),
                "name": rng.choice(["get_weather", "search"]),
                "output": [block(depth + 1) for _ in range(rng.randint(0, 2))],
            }
        if rng.random() < 0.5:
            source = {"type": "url", "url": f"https://example.com/{rng.randint(0, 999)}.png"}
        else:
            source = {"type": "base64", "media_type": "image/png", "data": "aGVsbG8="}
        return {"type": kind, "source": source}

    if rng.random() < 0.4:
        content: object = word(60)
    else:
        content = [block(depth) for _ in range(rng.randint(0, 5))]
    metadata = None
    if rng.random() < 0.3:
        metadata = {"k": rng.randint(0, 9), "nested": {"x": word(5)}}
    return Msg(
        name=rng.choice(["Jarvis", "alice", "bob", "user", "system"]),
        content=content,  # type: ignore[arg-type]
        role=rng.choice(["user", "assistant", "system"]),
        metadata=metadata,
    )
