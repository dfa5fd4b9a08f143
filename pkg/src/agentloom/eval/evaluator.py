"""Sequential and worker-pool evaluators with checkpoint resumption.

A solution function takes ``(task, pre_hook)`` and returns (or awaits to)
a :class:`SolutionOutput`. The pre-hook is a progress callback taking a
phase string; evaluators call it so long-running solutions can report
where they are.

Both evaluators write the same storage artifacts: rerunning skips
completed (task, repeat) cells, so interrupted runs resume cleanly.
"""

from __future__ import annotations

import asyncio
import inspect
import logging
from dataclasses import dataclass, field
from typing import Any, Awaitable, Callable

from ..message import utc_now
from .storage import EvalStorage
from .task import Benchmark, MetricResult, SolutionOutput, Task

log = logging.getLogger(__name__)

PreHook = Callable[[str], None]
SolutionFn = Callable[[Task, PreHook], "SolutionOutput | Awaitable[SolutionOutput]"]


@dataclass
class RunSummary:
    benchmark: str
    tasks: int
    repeats: int
    executed: int = 0
    skipped: int = 0
    failed: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "benchmark": self.benchmark,
            "tasks": self.tasks,
            "repeats": self.repeats,
            "executed": self.executed,
            "skipped": self.skipped,
            "failed": list(self.failed),
        }


async def _call_solution(solution_fn: SolutionFn, task: Task, pre_hook: PreHook) -> SolutionOutput:
    result = solution_fn(task, pre_hook)
    if inspect.isawaitable(result):
        result = await result
    if not isinstance(result, SolutionOutput):
        raise TypeError(
            f"solution function must produce a SolutionOutput, got {type(result).__name__}"
        )
    return result


class _EvaluatorBase:
    def __init__(self, storage: EvalStorage, repeats: int = 1) -> None:
        self.storage = storage
        self.repeats = repeats

    async def _run_cell(
        self,
        benchmark: Benchmark,
        task: Task,
        repeat: int,
        solution_fn: SolutionFn,
        retries: int = 0,
    ) -> bool:
        """Execute one (task, repeat); returns True if the solution succeeded."""
        started_at = utc_now()

        def pre_hook(phase: str) -> None:
            log.debug("[%s/%s#%d] %s", benchmark.name, task.id, repeat, phase)

        solution: SolutionOutput | None = None
        attempt = 0
        while True:
            try:
                solution = await _call_solution(solution_fn, task, pre_hook)
                break
            except asyncio.CancelledError:
                raise
            except Exception as exc:
                if attempt < retries:
                    attempt += 1
                    log.warning(
                        "solution for %s#%d died (%s); retrying", task.id, repeat, exc
                    )
                    continue
                solution = SolutionOutput(
                    success=False, output={"error": f"{type(exc).__name__}: {exc}"}
                )
                break
        results: list[MetricResult] = [metric(solution) for metric in task.metrics]
        self.storage.save_solution(benchmark.name, task.id, repeat, solution)
        self.storage.save_evaluation(
            benchmark.name, task.id, repeat, results, started_at, utc_now()
        )
        return solution.success


class GeneralEvaluator(_EvaluatorBase):
    """Runs tasks one after another in the calling task; best for debugging."""

    async def run(self, benchmark: Benchmark, solution_fn: SolutionFn) -> RunSummary:
        summary = RunSummary(benchmark=benchmark.name, tasks=len(benchmark), repeats=self.repeats)
        for task in benchmark:
            for repeat in range(self.repeats):
                if self.storage.is_complete(benchmark.name, task.id, repeat):
                    summary.skipped += 1
                    continue
                ok = await self._run_cell(benchmark, task, repeat, solution_fn)
                summary.executed += 1
                if not ok:
                    summary.failed.append(f"{task.id}#{repeat}")
        return summary


class ParallelEvaluator(_EvaluatorBase):
    """In-process worker pool; same artifacts and summary as sequential.

    Workers are asyncio tasks pulling from a shared queue, so async
    solution functions overlap their waits; synchronous solution functions
    are offloaded to threads by the tool layer they use, not here. A
    solution that raises is retried once, then recorded as failed.
    """

    def __init__(self, storage: EvalStorage, repeats: int = 1, workers: int = 2) -> None:
        super().__init__(storage, repeats)
        if workers < 1:
            raise ValueError("workers must be >= 1")
        self.workers = workers

    async def run(self, benchmark: Benchmark, solution_fn: SolutionFn) -> RunSummary:
        summary = RunSummary(benchmark=benchmark.name, tasks=len(benchmark), repeats=self.repeats)
        queue: asyncio.Queue[tuple[Task, int]] = asyncio.Queue()
        for task in benchmark:
            for repeat in range(self.repeats):
                if self.storage.is_complete(benchmark.name, task.id, repeat):
                    summary.skipped += 1
                else:
                    queue.put_nowait((task, repeat))

        async def worker() -> None:
            while True:
                try:
                    task, repeat = queue.get_nowait()
                except asyncio.QueueEmpty:
                    return
                ok = await self._run_cell(benchmark, task, repeat, solution_fn, retries=1)
                summary.executed += 1
                if not ok:
                    summary.failed.append(f"{task.id}#{repeat}")

        await asyncio.gather(*(worker() for _ in range(self.workers)))
        summary.failed.sort()
        return summary
