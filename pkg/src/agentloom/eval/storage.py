"""Filesystem result storage with crash-safe resumption.

Layout: ``{root}/{benchmark}/{task_id}/{repeat}/solution.json`` plus
``evaluation.json``. A (task, repeat) cell counts as complete exactly when
its evaluation.json exists; files are written to a temp name and renamed,
so a crash can never leave a half-written completion marker.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Iterator

from ..errors import StorageError
from .task import MetricResult, SolutionOutput


def _atomic_write_json(path: Path, payload: Any) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False, indent=1)
        os.replace(tmp, path)
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc


class EvalStorage:
    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)

    def _cell(self, benchmark: str, task_id: str, repeat: int) -> Path:
        return self.root / benchmark / task_id / str(repeat)

    def solution_path(self, benchmark: str, task_id: str, repeat: int) -> Path:
        return self._cell(benchmark, task_id, repeat) / "solution.json"

    def evaluation_path(self, benchmark: str, task_id: str, repeat: int) -> Path:
        return self._cell(benchmark, task_id, repeat) / "evaluation.json"

    def is_complete(self, benchmark: str, task_id: str, repeat: int) -> bool:
        return self.evaluation_path(benchmark, task_id, repeat).exists()

    def save_solution(
        self, benchmark: str, task_id: str, repeat: int, solution: SolutionOutput
    ) -> None:
        _atomic_write_json(self.solution_path(benchmark, task_id, repeat), solution.to_dict())

    def save_evaluation(
        self,
        benchmark: str,
        task_id: str,
        repeat: int,
        results: list[MetricResult],
        started_at: str,
        finished_at: str,
    ) -> None:
        payload = {
            "results": [r.to_dict() for r in results],
            "meta": {"started_at": started_at, "finished_at": finished_at},
        }
        _atomic_write_json(self.evaluation_path(benchmark, task_id, repeat), payload)

    def load_solution(self, benchmark: str, task_id: str, repeat: int) -> SolutionOutput:
        path = self.solution_path(benchmark, task_id, repeat)
        try:
            return SolutionOutput.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise StorageError(f"cannot load {path}: {exc}") from exc

    def load_evaluation(self, benchmark: str, task_id: str, repeat: int) -> list[MetricResult]:
        path = self.evaluation_path(benchmark, task_id, repeat)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            return [MetricResult.from_dict(r) for r in data["results"]]
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise StorageError(f"cannot load {path}: {exc}") from exc

    def benchmarks(self) -> list[str]:
        if not self.root.exists():
            return []
        return sorted(p.name for p in self.root.iterdir() if p.is_dir())

    def completed_cells(self, benchmark: str) -> Iterator[tuple[str, int]]:
        """All (task_id, repeat) pairs that finished evaluation."""
        bench_dir = self.root / benchmark
        if not bench_dir.exists():
            return
        for task_dir in sorted(bench_dir.iterdir()):
            if not task_dir.is_dir():
                continue
            for repeat_dir in sorted(task_dir.iterdir(), key=lambda p: p.name):
                if repeat_dir.is_dir() and (repeat_dir / "evaluation.json").exists():
                    yield task_dir.name, int(repeat_dir.name)
