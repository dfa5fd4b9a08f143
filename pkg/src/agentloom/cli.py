"""Command-line entry points: chat, eval, report, studio.

All commands run fully offline when given the mock backend script and the
scripted MCP server; real model access is configured via environment
variables, never flags. A local ``agentloom.toml`` provides defaults that
flags override.
"""

from __future__ import annotations

import asyncio
import importlib
import json
import logging
import os
import re
import sys
from pathlib import Path
from typing import Any

import click

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .agent import ReActAgent, UserAgent
from .errors import AgentLoomError, ValidationError
from .eval import (
    Benchmark,
    EvalStorage,
    GeneralEvaluator,
    ParallelEvaluator,
    SolutionOutput,
    aggregate,
    write_report,
)
from .eval.evaluator import SolutionFn
from .memory import ShortTermMemory
from .message import Msg
from .model import ChatBackend, ChatFormatter, MockBackend, OpenAICompatibleBackend, trace_llm
from .studio import studio_init
from .tool import Toolkit

log = logging.getLogger(__name__)

CONFIG_FILE = "agentloom.toml"
TOY_BENCHMARK = Path(__file__).parent / "data" / "toy_benchmark.json"


def _load_config(path: str | None) -> dict[str, Any]:
    candidate = Path(path) if path else Path.cwd() / CONFIG_FILE
    if not candidate.exists():
        return {}
    with open(candidate, "rb") as fh:
        return tomllib.load(fh)


def _build_backend(
    config: dict[str, Any],
    mock_script: str | None,
    base_url: str | None,
    model_name: str | None,
    api_key_env: str | None,
) -> ChatBackend:
    if mock_script:
        return MockBackend.from_file(mock_script)
    model_cfg = config.get("model", {})
    base_url = base_url or model_cfg.get("base_url")
    model_name = model_name or model_cfg.get("model_name", "gpt-4o-mini")
    api_key_env = api_key_env or model_cfg.get("api_key_env", "OPENAI_API_KEY")
    if not base_url:
        raise click.UsageError(
            "no model configured: pass --mock-script for offline use, or set "
            "--base-url / [model].base_url in agentloom.toml"
        )
    api_key = os.environ.get(api_key_env)
    if not api_key:
        raise click.UsageError(
            f"environment variable {api_key_env} is not set; export your API key "
            f"there (keys are never passed as flags)"
        )
    return OpenAICompatibleBackend(base_url, api_key=api_key, model_name=model_name)


@click.group()
@click.option("--log-level", default="WARNING", show_default=True)
def main(log_level: str) -> None:
    """agentloom: agents, tools, evaluation, and a live studio."""
    logging.basicConfig(level=getattr(logging, log_level.upper(), logging.WARNING))


@main.command("chat")
@click.option("--config", "config_path", default=None, help=f"Path to {CONFIG_FILE}.")
@click.option("--mock-script", default=None, help="Scripted backend JSON for offline runs.")
@click.option("--base-url", default=None, help="OpenAI-compatible endpoint base URL.")
@click.option("--model-name", default=None)
@click.option("--api-key-env", default=None, help="Env var holding the API key.")
@click.option("--studio", "studio_url", default=None, help="Studio URL to attach to.")
@click.option("--parallel-tools", is_flag=True, help="Dispatch multiple tool calls concurrently.")
@click.option("--name", default="Friday", show_default=True, help="Assistant name.")
@click.option("--user", "user_name", default="user", show_default=True)
@click.option("--sys-prompt", default="You are a helpful assistant.", show_default=True)
def cmd_chat(
    config_path: str | None,
    mock_script: str | None,
    base_url: str | None,
    model_name: str | None,
    api_key_env: str | None,
    studio_url: str | None,
    parallel_tools: bool,
    name: str,
    user_name: str,
    sys_prompt: str,
) -> None:
    """Interactive chat: you and the agent take turns until you type exit."""
    config = _load_config(config_path)
    backend = _build_backend(config, mock_script, base_url, model_name, api_key_env)
    studio_url = studio_url or config.get("studio", {}).get("url")

    async def run() -> None:
        toolkit = Toolkit()
        toolkit.register_tool_function(_calculator)
        agent = ReActAgent(
            name=name,
            sys_prompt=sys_prompt,
            model=trace_llm(backend),
            formatter=ChatFormatter(),
            toolkit=toolkit,
            memory=ShortTermMemory(),
            parallel_tool_call=parallel_tools,
        )
        user = UserAgent(user_name)
        handle = None
        if studio_url:
            handle = await studio_init(studio_url, f"chat:{name}", [agent], [user])
        try:
            msg: Msg | None = None
            while True:
                msg = await user.reply(msg)
                if (msg.get_text_content() or "").strip() == "exit":
                    break
                msg = await agent.reply(msg)
        finally:
            if handle is not None:
                await handle.drain()
                await handle.close()

    try:
        asyncio.run(run())
    except (EOFError, KeyboardInterrupt):
        click.echo("")
    except AgentLoomError as exc:
        raise click.ClickException(str(exc)) from exc


def _calculator(expression: str) -> str:
    """Evaluate a basic arithmetic expression.

    Args:
        expression: Arithmetic over numbers with + - * / and parentheses.
    """
    if not re.fullmatch(r"[0-9+\-*/(). ]+", expression):
        raise ValidationError(f"unsupported expression: {expression!r}")
    value = eval(expression, {"__builtins__": {}}, {})  # noqa: S307 - input sanitized above
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    return str(value)


def _arith_solution(task: Any, pre_hook: Any) -> SolutionOutput:
    pre_hook("solve")
    try:
        answer = _calculator(str(task.input))
        return SolutionOutput(success=True, output=answer)
    except Exception as exc:
        return SolutionOutput(success=False, output={"error": str(exc)})


def _echo_solution(task: Any, pre_hook: Any) -> SolutionOutput:
    pre_hook("echo")
    return SolutionOutput(success=True, output=task.input)


def _resolve_solution(spec: str) -> SolutionFn:
    if spec == "arith":
        return _arith_solution
    if spec == "echo":
        return _echo_solution
    if ":" in spec:
        module_name, attr = spec.split(":", 1)
        module = importlib.import_module(module_name)
        return getattr(module, attr)
    raise click.UsageError(
        f"unknown solution {spec!r}: use 'arith', 'echo', or 'module:function'"
    )


@main.command("eval")
@click.option("--benchmark", "benchmark_path", default=None, help="Benchmark JSON (default: bundled toy).")
@click.option("--repeat", default=1, show_default=True, type=int)
@click.option("--workers", default=1, show_default=True, type=int)
@click.option("--storage", "storage_dir", required=True, type=click.Path())
@click.option("--solution", default="arith", show_default=True, help="arith | echo | module:function")
@click.option("--seed", default=0, show_default=True, type=int, help="Bootstrap seed.")
def cmd_eval(
    benchmark_path: str | None,
    repeat: int,
    workers: int,
    storage_dir: str,
    solution: str,
    seed: int,
) -> None:
    """Run a benchmark with checkpointed storage; reruns resume."""
    path = Path(benchmark_path) if benchmark_path else TOY_BENCHMARK
    try:
        benchmark = Benchmark.from_file(path)
    except ValidationError as exc:
        raise click.UsageError(str(exc)) from exc
    solution_fn = _resolve_solution(solution)
    storage = EvalStorage(storage_dir)
    if workers <= 1:
        evaluator: Any = GeneralEvaluator(storage, repeats=repeat)
    else:
        evaluator = ParallelEvaluator(storage, repeats=repeat, workers=workers)
    summary = asyncio.run(evaluator.run(benchmark, solution_fn))

    click.echo(f"benchmark: {summary.benchmark}")
    click.echo(f"executed: {summary.executed}  resumed: {summary.skipped} skipped")
    if summary.failed:
        click.echo(f"failed: {', '.join(summary.failed)}")
    report = aggregate(storage, benchmark.name, seed=seed)
    for name in sorted(report.metrics):
        agg = report.metrics[name]
        line = f"{name}: mean={agg.mean:.4f} ci95=[{agg.ci95[0]:.4f}, {agg.ci95[1]:.4f}]"
        if agg.pass_rate is not None:
            line += f" pass-rate={agg.pass_rate:.4f}"
        click.echo(line)


@main.command("report")
@click.option("--storage", "storage_dir", required=True, type=click.Path(exists=True))
@click.option("--benchmark", "benchmark_name", required=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True, type=int)
def cmd_report(storage_dir: str, benchmark_name: str, out_dir: str, seed: int) -> None:
    """Render aggregate results: JSON + CSV tables + PNG figures."""
    storage = EvalStorage(storage_dir)
    try:
        report = aggregate(storage, benchmark_name, seed=seed)
    except AgentLoomError as exc:
        raise click.UsageError(str(exc)) from exc
    written = write_report(report, out_dir)
    for path in written:
        click.echo(str(path))


@main.command("studio")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8901, show_default=True, type=int)
@click.option("--eval-storage", default=None, type=click.Path(), help="Serve eval results from here.")
@click.option("--ui-dist", default=None, type=click.Path(), help="Static UI bundle directory.")
@click.option("--dump-dir", default=None, type=click.Path(), help="Optional JSONL event dumps.")
def cmd_studio(
    host: str, port: int, eval_storage: str | None, ui_dist: str | None, dump_dir: str | None
) -> None:
    """Serve the studio API (and UI when a bundle is available)."""
    import uvicorn

    from .studio.server import StudioState, create_app

    default_dist = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    dist = ui_dist or (str(default_dist) if default_dist.exists() else None)
    state = StudioState(eval_root=eval_storage, dump_dir=dump_dir)
    app = create_app(state, ui_dist=dist)
    try:
        uvicorn.run(app, host=host, port=port, log_level="info")
    except SystemExit:
        raise
    except OSError as exc:
        click.echo(f"cannot bind {host}:{port}: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
