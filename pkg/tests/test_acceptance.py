"""Acceptance suite: one test per release criterion.

Every test is network-free (mock backend + scripted stdio server) and
prints a PASS line with its runtime when it succeeds. Run with
``pytest tests/test_acceptance.py -v -s`` to see the per-criterion lines.
"""

from __future__ import annotations

import asyncio
import json
import random
import sys
import time

import numpy as np
import pytest

from agentloom.agent import DEFAULT_INTERRUPT_ACK, ReActAgent
from agentloom.agent.react import INTERRUPT_ANNOTATION
from agentloom.errors import ValidationError
from agentloom.memory import ShortTermMemory
from agentloom.message import Msg
from agentloom.model import (
    ChatFormatter,
    MockBackend,
    ScriptedReply,
    streaming_prefix_ok,
    text_reply,
    tool_call_reply,
)
from agentloom.tool import INTERRUPT_NOTICE, META_TOOL_NAME, Toolkit

pytestmark = pytest.mark.anyio


def passed(name: str, started: float, note: str = "") -> None:
    elapsed = time.monotonic() - started
    suffix = f" ({note})" if note else ""
    print(f"ACCEPTANCE PASS: {name} in {elapsed:.2f}s{suffix}")


async def retry_timing(check, attempts: int = 3):
    """Re-run a timing-sensitive check to absorb scheduler jitter."""
    last_error: AssertionError | None = None
    for _ in range(attempts):
        try:
            await check()
            return
        except AssertionError as exc:
            last_error = exc
            await asyncio.sleep(0.05)
    raise last_error


PROMPT = [{"role": "user", "content": "go"}]


class TestStreamingContract:
    async def test_streaming_contract_200_random_chunkings(self):
        started = time.monotonic()
        rng = random.Random(2024)
        corpus = [
            "Hello! How can I help you?",
            "x" * 300 + " tail",
            "short",
            "многоязычный текст with mixed content 中文",
        ]
        for case in range(200):
            text = rng.choice(corpus)
            if len(text) > 1:
                n_cuts = rng.randint(0, min(15, len(text) - 1))
                cuts = sorted(rng.sample(range(1, len(text)), n_cuts)) if n_cuts else []
            else:
                cuts = []
            chunks = [text[a:b] for a, b in zip([0, *cuts], [*cuts, len(text)])]
            backend = MockBackend([text_reply(text, chunks=chunks), text_reply(text)])
            streamed = [c async for c in backend.generate_stream(PROMPT)]
            for earlier, later in zip(streamed, streamed[1:]):
                assert streaming_prefix_ok(earlier, later), f"prefix violated in case {case}"
            batch = await backend.generate(PROMPT)
            assert streamed[-1].content == batch.content, f"final != batch in case {case}"
        elapsed = time.monotonic() - started
        assert elapsed < 10.0, f"streaming contract took {elapsed:.1f}s (budget 10s)"
        passed("streaming contract (200 chunkings, prefix + final==batch)", started)


class TestInterruptionPreservation:
    async def test_cancel_at_every_yield_index_0_to_10(self):
        started = time.monotonic()
        for k in range(0, 11):
            toolkit = Toolkit()
            tool_started = asyncio.Event()

            async def counter():
                """Count forever, slowly."""
                tool_started.set()
                i = 0
                while True:
                    i += 1
                    yield f"chunk {i}"
                    await asyncio.sleep(0.003)

            toolkit.register_tool_function(counter)
            seen = []

            async def consume():
                call = {"type": "tool_use", "id": "c", "name": "counter", "input": {}}
                async for chunk in toolkit.call_tool_function(call):
                    seen.append(chunk)

            task = asyncio.create_task(consume())
            await tool_started.wait()
            while sum(1 for c in seen if not c.interrupted) < k:
                await asyncio.sleep(0.001)
            task.cancel()
            await asyncio.wait({task})

            content = [c for c in seen if not c.interrupted]
            notices = [c for c in seen if c.interrupted]
            assert len(content) == k, f"k={k}: held {len(content)} content chunks"
            assert len(notices) == 1, f"k={k}: {len(notices)} notices"
            assert "tool execution was interrupted" in notices[0].text
        elapsed = time.monotonic() - started
        assert elapsed < 5.0, f"interruption sweep took {elapsed:.1f}s (budget 5s)"
        passed("interruption preservation (k=0..10: k chunks + 1 notice)", started)


class TestMcpSessionCountLaw:
    async def test_stateful_one_init_stateless_five(self, tmp_path):
        from agentloom.mcp import StatefulMcpClient, StatelessMcpClient, StdioServerConfig

        started = time.monotonic()
        counter = tmp_path / "inits.log"
        script = tmp_path / "server.json"
        script.write_text(json.dumps({
            "server_name": "law",
            "init_counter_file": str(counter),
            "tools": [{
                "name": "ping",
                "description": "Ping.",
                "input_schema": {"type": "object", "properties": {}},
                "result_text": "pong",
            }],
        }))
        config = StdioServerConfig(
            command=sys.executable,
            args=["-m", "agentloom.mcp.scripted_server", str(script)],
        )

        stateful = StatefulMcpClient(config)
        await stateful.connect()
        try:
            for _ in range(5):
                assert (await stateful.call_tool("ping", {})).text() == "pong"
        finally:
            await stateful.close()
        stateful_inits = len(counter.read_text().splitlines())
        assert stateful_inits == 1, f"stateful client produced {stateful_inits} initializes"

        counter.write_text("")
        stateless = StatelessMcpClient(config)
        for _ in range(5):
            assert (await stateless.call_tool("ping", {})).text() == "pong"
        stateless_inits = len(counter.read_text().splitlines())
        assert stateless_inits == 5, f"stateless client produced {stateless_inits} initializes"

        elapsed = time.monotonic() - started
        assert elapsed < 5.0, f"session-count law took {elapsed:.1f}s (budget 5s)"
        passed("MCP session-count law (stateful=1, stateless=5 initializes)", started)


class TestParallelToolSpeedup:
    async def test_two_200ms_tools(self):
        started = time.monotonic()

        def build_agent(parallel: bool) -> ReActAgent:
            toolkit = Toolkit()

            async def nap_one(ms: int) -> str:
                """Nap."""
                await asyncio.sleep(ms / 1000)
                return "one"

            async def nap_two(ms: int) -> str:
                """Nap."""
                await asyncio.sleep(ms / 1000)
                return "two"

            toolkit.register_tool_function(nap_one)
            toolkit.register_tool_function(nap_two)
            script = [
                ScriptedReply(blocks=[
                    {"type": "tool_use", "id": "n1", "name": "nap_one", "input": {"ms": 200}},
                    {"type": "tool_use", "id": "n2", "name": "nap_two", "input": {"ms": 200}},
                ]),
                tool_call_reply("generate_response", {"response": "done"}),
            ]
            return ReActAgent(
                name="speed", sys_prompt="s", model=MockBackend(script),
                formatter=ChatFormatter(), toolkit=toolkit,
                memory=ShortTermMemory(), parallel_tool_call=parallel,
            )

        async def check_parallel():
            agent = build_agent(parallel=True)
            t0 = time.monotonic()
            await agent.reply(Msg("u", "go", "user"))
            elapsed = time.monotonic() - t0
            assert elapsed < 0.35, f"parallel took {elapsed * 1000:.0f}ms (limit 350ms)"

        async def check_sequential():
            agent = build_agent(parallel=False)
            t0 = time.monotonic()
            await agent.reply(Msg("u", "go", "user"))
            elapsed = time.monotonic() - t0
            assert elapsed > 0.40, f"sequential took {elapsed * 1000:.0f}ms (floor 400ms)"

        await retry_timing(check_parallel, attempts=3)
        await retry_timing(check_sequential, attempts=3)
        passed("parallel tool speedup (<350ms parallel, >400ms sequential)", started)


class TestGroupGating:
    async def test_100_random_activation_patterns(self):
        started = time.monotonic()
        rng = random.Random(404)
        for case in range(100):
            toolkit = Toolkit()
            groups = ["basic"]
            for g in range(rng.randint(1, 5)):
                name = f"group{g}"
                toolkit.create_tool_group(name, name, active=rng.random() < 0.5)
                groups.append(name)
            registered = []
            for t in range(rng.randint(0, 10)):
                group = rng.choice(groups)

                def tool_fn(x: int = 0) -> str:
                    """Tool."""
                    return "ok"

                toolkit.register_tool_function(tool_fn, name=f"tool{t}", group=group)
                registered.append((f"tool{t}", group))

            # random flips mid-case
            for name in groups[1:]:
                if rng.random() < 0.4:
                    toolkit.update_tool_groups([name], rng.random() < 0.5)

            published = [s.name for s in toolkit.get_json_schemas()]
            expected = [n for n, g in registered if toolkit.groups[g].active]
            if any(not g.active for g in toolkit.groups.values()):
                expected.append(META_TOOL_NAME)
            assert published == expected, f"case {case}: {published} != {expected}"

            inactive_tools = [n for n, g in registered if not toolkit.groups[g].active]
            if inactive_tools:
                name = rng.choice(inactive_tools)
                chunks = [
                    c async for c in toolkit.call_tool_function(
                        {"type": "tool_use", "id": "g", "name": name, "input": {}}
                    )
                ]
                assert chunks[-1].is_last
                assert "Error" in chunks[0].text and name in chunks[0].text
        passed("group gating (100 random patterns == brute-force filter)", started)


class TestReactTrajectoryIntegrity:
    async def test_50_scripted_conversations(self):
        started = time.monotonic()
        rng = random.Random(7777)
        tool_names = ["alpha", "beta", "gamma"]

        for case in range(50):
            toolkit = Toolkit()
            extra_active = rng.random() < 0.5
            toolkit.create_tool_group("extra", "extra tools", active=extra_active)
            for name in tool_names:
                def make(name=name):
                    def fn(x: int = 0) -> str:
                        """Tool."""
                        return f"{name} ran"
                    fn.__name__ = name
                    return fn
                toolkit.register_tool_function(
                    make(), name=name, group="extra" if name == "gamma" else None
                )

            max_iters = rng.randint(1, 4)
            iterations = rng.randint(0, max_iters)
            script = []
            issued_ids = []
            for i in range(iterations):
                calls = []
                for j in range(rng.randint(1, 3)):
                    call_id = f"c{case}-{i}-{j}"
                    issued_ids.append(call_id)
                    calls.append({
                        "type": "tool_use", "id": call_id,
                        "name": rng.choice(tool_names), "input": {"x": j},
                    })
                script.append(ScriptedReply(blocks=calls))
            ending = rng.choice(["finish", "text", "exhaust"])
            if ending == "finish" and iterations < max_iters:
                script.append(tool_call_reply("generate_response", {"response": "fin"},
                                              call_id=f"fin{case}"))
            elif ending == "text" and iterations < max_iters:
                script.append(text_reply("direct answer"))
            else:
                while len(script) < max_iters:
                    call_id = f"pad{case}-{len(script)}"
                    issued_ids.append(call_id)
                    script.append(ScriptedReply(blocks=[{
                        "type": "tool_use", "id": call_id, "name": "alpha", "input": {},
                    }]))
                script = script[:max_iters]
                issued_ids = [i for i in issued_ids
                              if not any(i in [b.get("id") for b in s.blocks]
                                         for s in script[max_iters:])]
                script.append(text_reply("forced summary"))

            backend = MockBackend(script)
            agent = ReActAgent(
                name="itg", sys_prompt="s", model=backend, formatter=ChatFormatter(),
                toolkit=toolkit, memory=ShortTermMemory(), max_iters=max_iters,
                parallel_tool_call=rng.random() < 0.5,
            )
            await agent.reply(Msg("u", f"case {case}", "user"))

            uses, results = {}, {}
            for m in agent.memory.get_all():
                for b in m.get_content_blocks("tool_use"):
                    uses[b["id"]] = b
                for b in m.get_content_blocks("tool_result"):
                    results[b["id"]] = b
            assert set(uses) == set(results), f"case {case}: unmatched tool ids"
            assert backend.call_count <= max_iters + 1, (
                f"case {case}: {backend.call_count} calls > {max_iters + 1}"
            )

            state = agent.state_dict()
            clone_toolkit = Toolkit()
            clone_toolkit.create_tool_group("extra", "extra tools", active=extra_active)
            clone = ReActAgent(
                name="itg", sys_prompt="s", model=MockBackend([text_reply("x")]),
                formatter=ChatFormatter(), toolkit=clone_toolkit,
                memory=ShortTermMemory(), max_iters=max_iters,
            )
            clone.load_state_dict(state)
            assert clone.state_dict() == state, f"case {case}: state round-trip not bit-equal"
            assert [m.to_dict() for m in clone.memory.get_all()] == [
                m.to_dict() for m in agent.memory.get_all()
            ]
            assert {n: g.active for n, g in clone.toolkit.groups.items()} == {
                n: g.active for n, g in agent.toolkit.groups.items()
            }
        passed("ReAct trajectory integrity (50 scripted conversations)", started)


class TestMsgHubPropagationLaw:
    async def test_departure_scenario(self):
        """Three agents introduce themselves; one leaves and says goodbye."""
        from agentloom.pipeline import MsgHub, sequential_pipeline
        from test_pipeline import AppendAgent

        started = time.monotonic()
        alice, bob, charlie = (AppendAgent(n) for n in ("alice", "bob", "charlie"))
        async with MsgHub(
            participants=[alice, bob, charlie],
            announcement=Msg("user", "Now introduce yourself in one sentence,"
                                     " including your name, age and career.", "user"),
        ) as hub:
            await sequential_pipeline([alice, bob, charlie])
            hub.delete(bob)
            await hub.broadcast(
                Msg("bob", "I have to start my homework now, see you later!", "assistant")
            )
            await alice.reply()
            await charlie.reply()

        farewell = "I have to start my homework now"
        for agent, should_have in ((alice, True), (charlie, True), (bob, False)):
            texts = [m.get_text_content() or "" for m in agent.memory.get_all()]
            assert any(farewell in t for t in texts) == should_have, agent.name
        # alice & charlie saw each other's post-departure replies; bob saw neither
        bob_names = {m.name for m in bob.memory.get_all() if m.role == "assistant"}
        assert "alice" in bob_names  # from the introduction round only
        post = [m for m in bob.memory.get_all() if m.name in ("alice", "charlie")]
        assert len(post) == 2  # intros only, nothing after deletion
        passed("MsgHub departure scenario (delete + broadcast + reactions)", started)

    async def test_random_hubs_propagation_law(self):
        from agentloom.pipeline import MsgHub
        from test_pipeline import AppendAgent

        started = time.monotonic()
        rng = random.Random(31337)
        for case in range(30):
            n = rng.randint(2, 5)
            agents = [AppendAgent(f"a{case}-{i}", str(i)) for i in range(n)]
            log: list[tuple[object, set, Msg]] = []
            async with MsgHub(list(agents)) as hub:
                deleted = False
                for _ in range(rng.randint(1, 10)):
                    if not deleted and len(hub.participants) > 1 and rng.random() < 0.35:
                        hub.delete(rng.choice(hub.participants))
                        deleted = True
                    speaker = rng.choice(hub.participants)
                    reply = await speaker.reply()
                    log.append((speaker, set(hub.participants), reply))

            for agent in agents:
                held = [m.id for m in agent.memory.get_all() if m.role == "assistant"]
                expected = [
                    reply.id for speaker, audience, reply in log
                    if speaker is agent or (agent in audience and speaker is not agent)
                ]
                assert held == expected, f"case {case}, agent {agent.name}"
        passed("MsgHub propagation law (30 random hubs with deletions)", started)


class TestEvalResumptionAndParallelEquivalence:
    async def test_kill_rerun_and_worker_equivalence(self, tmp_path):
        from agentloom.eval import (
            Benchmark,
            EvalStorage,
            ExactMatchMetric,
            GeneralEvaluator,
            ParallelEvaluator,
            SolutionOutput,
            Task,
        )

        started = time.monotonic()
        tasks = [
            Task(id=f"t{i:02d}", input=str(i), ground_truth=str(i * 3),
                 metrics=[ExactMatchMetric(str(i * 3))])
            for i in range(20)
        ]
        bench = Benchmark("twenty", tasks)

        def solution(task, pre_hook):
            pre_hook("solve")
            return SolutionOutput(success=True, output=str(int(task.input) * 3))

        class SimulatedCrash(BaseException):
            pass

        # kill-and-rerun at random points until complete
        rng = random.Random(99)
        storage = EvalStorage(tmp_path / "resume")
        runs = 0
        while True:
            runs += 1
            crash_after = rng.randint(1, 8)
            executed = 0

            def crashy(task, pre_hook):
                nonlocal executed
                executed += 1
                if executed > crash_after:
                    raise SimulatedCrash()
                return solution(task, pre_hook)

            try:
                await GeneralEvaluator(storage, repeats=2).run(bench, crashy)
                break
            except SimulatedCrash:
                continue
        assert runs > 1, "harness never crashed; crash injection broken"
        cells = list(storage.completed_cells("twenty"))
        assert len(cells) == 40 and len(set(cells)) == 40, "gaps or duplicates after resume"

        # identical results across worker counts
        outcomes = {}
        for workers in (1, 2, 4):
            ws = EvalStorage(tmp_path / f"w{workers}")
            await ParallelEvaluator(ws, repeats=2, workers=workers).run(bench, solution)
            outcomes[workers] = sorted(
                (task_id, repeat, tuple((r.name, r.value) for r in ws.load_evaluation("twenty", task_id, repeat)))
                for task_id, repeat in ws.completed_cells("twenty")
            )
        assert outcomes[1] == outcomes[2] == outcomes[4], "results differ across worker counts"

        # 8 sleep tasks, 4 workers, < 0.5x sequential
        sleep_tasks = [
            Task(id=f"s{i}", input="", ground_truth="", metrics=[ExactMatchMetric("")])
            for i in range(8)
        ]
        sleep_bench = Benchmark("sleepy", sleep_tasks)

        async def sleepy(task, pre_hook):
            await asyncio.sleep(0.15)
            return SolutionOutput(success=True, output="")

        async def check_speedup():
            t0 = time.monotonic()
            await GeneralEvaluator(EvalStorage(tmp_path / f"sq{time.monotonic_ns()}")).run(
                sleep_bench, sleepy
            )
            sequential = time.monotonic() - t0
            t0 = time.monotonic()
            await ParallelEvaluator(
                EvalStorage(tmp_path / f"pl{time.monotonic_ns()}"), workers=4
            ).run(sleep_bench, sleepy)
            parallel = time.monotonic() - t0
            assert parallel < 0.5 * sequential, (
                f"parallel {parallel:.2f}s vs sequential {sequential:.2f}s"
            )

        await retry_timing(check_speedup, attempts=3)
        elapsed = time.monotonic() - started
        assert elapsed < 30.0, f"eval acceptance took {elapsed:.1f}s (budget 30s)"
        passed("evaluation resumption + parallel equivalence + speedup", started)


class TestBootstrapCi:
    async def test_seeded_bootstrap_matches_oracle_on_10_vectors(self):
        from agentloom.eval import bootstrap_ci

        started = time.monotonic()
        rng = random.Random(1234)
        for case in range(10):
            scores = [rng.uniform(0, 1) for _ in range(rng.randint(2, 15))]
            seed = rng.randint(0, 99999)
            lo, hi = bootstrap_ci(scores, bootstrap_samples=1000, seed=seed)

            oracle_rng = np.random.default_rng(seed)
            indices = oracle_rng.integers(0, len(scores), size=(1000, len(scores)))
            means = sorted(
                sum(scores[j] for j in row) / len(scores) for row in indices.tolist()
            )

            def pct(vals, q):
                pos = q / 100 * (len(vals) - 1)
                low = int(pos)
                high = min(low + 1, len(vals) - 1)
                frac = pos - low
                return vals[low] * (1 - frac) + vals[high] * frac

            assert abs(lo - pct(means, 2.5)) < 1e-9, f"case {case} lower bound"
            assert abs(hi - pct(means, 97.5)) < 1e-9, f"case {case} upper bound"
        passed("bootstrap CI (B=1000, seeded, matches oracle to 1e-9)", started)


class TestStudioRelayLoop:
    async def test_headless_interrupt_relay_and_total_order(self, tmp_path):
        import uvicorn
        import websockets

        from agentloom.studio import StudioState, create_app, studio_init

        started = time.monotonic()
        state = StudioState()
        config = uvicorn.Config(create_app(state), host="127.0.0.1", port=0, log_level="error")
        server = uvicorn.Server(config)
        server_task = asyncio.create_task(server.serve())
        while not server.started:
            await asyncio.sleep(0.01)
        port = server.servers[0].sockets[0].getsockname()[1]
        base = f"http://127.0.0.1:{port}"
        ws_base = f"ws://127.0.0.1:{port}"

        text = "streaming a long scripted reply " * 4
        words = text.split()
        chunks = [w + " " for w in words[:-1]] + [words[-1]]
        agent = ReActAgent(
            name="Friday", sys_prompt="s",
            model=MockBackend([text_reply(text.strip(), chunks=[c for c in chunks])]),
            formatter=ChatFormatter(), toolkit=Toolkit(), memory=ShortTermMemory(),
        )
        # slow the stream so the interrupt lands mid-reply
        agent.model.script[0].latency_ms = 3000

        handle = await studio_init(base, "relay-acceptance", [agent])
        try:
            subscriber_logs: list[list[dict]] = [[], []]

            async def subscribe(index: int):
                async with websockets.connect(f"{ws_base}/ws/ui/{handle.run_id}") as ws:
                    while True:
                        subscriber_logs[index].append(json.loads(await ws.recv()))

            sub_tasks = [asyncio.create_task(subscribe(0)), asyncio.create_task(subscribe(1))]
            reply_task = asyncio.create_task(agent.reply(Msg("u", "question", "user")))
            while agent._partial_response is None:
                await asyncio.sleep(0.005)

            async with websockets.connect(f"{ws_base}/ws/ui/{handle.run_id}") as control_ws:
                await control_ws.send(json.dumps({"type": "interrupt", "payload": {}}))
                reply = await asyncio.wait_for(reply_task, timeout=5)

            assert reply.get_text_content() == DEFAULT_INTERRUPT_ACK
            annotated = [
                m for m in agent.memory.get_all()
                if m.metadata and m.metadata.get("annotation") == INTERRUPT_ANNOTATION
            ]
            assert annotated, "memory gained no interruption annotation"

            await handle.drain()
            await asyncio.sleep(0.3)
            for task in sub_tasks:
                task.cancel()
            a, b = subscriber_logs
            shared = min(len(a), len(b))
            assert shared > 0
            assert a[:shared] == b[:shared], "subscribers observed different orders"
            assert [e["seq"] for e in a[:shared]] == list(range(shared))
        finally:
            await handle.close()
            server.should_exit = True
            await server_task
        passed("studio relay loop (interrupt via control event, total order)", started)
