"""Evaluation primitives: tasks, solutions, metrics, benchmarks."""

from __future__ import annotations

import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Sequence

from ..errors import ValidationError
from ..message import Msg, utc_now


@dataclass
class MetricResult:
    name: str
    kind: str  # "categorical" | "numerical"
    value: str | None = None  # categorical label
    score: float | None = None  # numerical score
    success: bool | None = None
    message: str | None = None
    timestamp: str = field(default_factory=utc_now)

    def __post_init__(self) -> None:
        if self.kind not in ("categorical", "numerical"):
            raise ValidationError(f"unknown metric kind {self.kind!r}")
        if self.kind == "categorical" and self.value is None:
            raise ValidationError("categorical results need a value")
        if self.kind == "numerical" and self.score is None:
            raise ValidationError("numerical results need a score")

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"name": self.name, "kind": self.kind, "timestamp": self.timestamp}
        if self.kind == "categorical":
            out["value"] = self.value
        else:
            out["score"] = self.score
        if self.success is not None:
            out["success"] = self.success
        if self.message is not None:
            out["message"] = self.message
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MetricResult":
        return cls(
            name=data["name"],
            kind=data["kind"],
            value=data.get("value"),
            score=data.get("score"),
            success=data.get("success"),
            message=data.get("message"),
            timestamp=data.get("timestamp", utc_now()),
        )


@dataclass
class SolutionOutput:
    """What an agent produced for one task attempt."""

    success: bool
    output: Any
    trajectory: list[Msg] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "success": self.success,
            "output": self.output,
            "trajectory": [m.to_dict() for m in self.trajectory],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SolutionOutput":
        return cls(
            success=data["success"],
            output=data.get("output"),
            trajectory=[Msg.from_dict(m) for m in data.get("trajectory", [])],
        )


class Metric(ABC):
    """A callable turning a solution into a :class:`MetricResult`.

    Exceptions inside ``evaluate`` are captured as a categorical "error"
    result so one bad metric cannot abort a run.
    """

    name: str = "metric"
    kind: str = "categorical"
    labels: tuple[str, ...] = ()

    @abstractmethod
    def evaluate(self, solution: SolutionOutput) -> MetricResult: ...

    def __call__(self, solution: SolutionOutput) -> MetricResult:
        try:
            result = self.evaluate(solution)
        except Exception as exc:
            return MetricResult(
                name=self.name,
                kind="categorical",
                value="error",
                success=False,
                message=f"{type(exc).__name__}: {exc}",
            )
        if self.kind == "categorical" and self.labels and result.value not in self.labels:
            return MetricResult(
                name=self.name,
                kind="categorical",
                value="error",
                success=False,
                message=f"metric produced label {result.value!r} outside {self.labels}",
            )
        return result


def metric_eval(metric: Metric, solution: SolutionOutput) -> MetricResult:
    return metric(solution)


class ExactMatchMetric(Metric):
    """Categorical pass/fail on equality with the ground truth."""

    kind = "categorical"
    labels = ("pass", "fail")

    def __init__(self, ground_truth: Any, name: str = "exact_match") -> None:
        self.name = name
        self.ground_truth = ground_truth

    @staticmethod
    def _canon(value: Any) -> Any:
        return value.strip() if isinstance(value, str) else value

    def evaluate(self, solution: SolutionOutput) -> MetricResult:
        passed = self._canon(solution.output) == self._canon(self.ground_truth)
        return MetricResult(
            name=self.name,
            kind="categorical",
            value="pass" if passed else "fail",
            success=passed,
        )


class JaccardMetric(Metric):
    """Numerical token-set overlap with the ground truth text."""

    kind = "numerical"

    def __init__(self, ground_truth: Any, name: str = "jaccard", success_threshold: float = 1.0) -> None:
        self.name = name
        self.ground_truth = ground_truth
        self.success_threshold = success_threshold

    @staticmethod
    def _tokens(value: Any) -> set[str]:
        return set(str(value).lower().split())

    def evaluate(self, solution: SolutionOutput) -> MetricResult:
        truth = self._tokens(self.ground_truth)
        got = self._tokens(solution.output)
        union = truth | got
        score = len(truth & got) / len(union) if union else 1.0
        return MetricResult(
            name=self.name,
            kind="numerical",
            score=score,
            success=score >= self.success_threshold,
        )


METRIC_FACTORIES = {
    "exact_match": ExactMatchMetric,
    "jaccard": JaccardMetric,
}


@dataclass
class Task:
    """One evaluation unit: input, ground truth, and its metrics."""

    id: str
    input: Any
    ground_truth: Any
    metrics: list[Metric]
    tags: dict[str, Any] | None = None

    def __post_init__(self) -> None:
        if not self.metrics:
            raise ValidationError(f"task {self.id!r} needs at least one metric")


class Benchmark:
    """An ordered, indexable collection of tasks."""

    def __init__(self, name: str, tasks: Sequence[Task]) -> None:
        ids = [t.id for t in tasks]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"benchmark {name!r} has duplicate task ids")
        self.name = name
        self.tasks = list(tasks)

    def __iter__(self) -> Iterator[Task]:
        return iter(self.tasks)

    def __len__(self) -> int:
        return len(self.tasks)

    def __getitem__(self, index: int) -> Task:
        return self.tasks[index]

    @classmethod
    def from_file(cls, path: str | Path) -> "Benchmark":
        """Load the JSON benchmark format.

        ``{"name": str, "tasks": [{"id", "input", "ground_truth",
        "metric": "exact_match"|"jaccard", "tags"?}]}``
        """
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot load benchmark {path}: {exc}") from exc
        if not isinstance(data, dict) or "tasks" not in data:
            raise ValidationError(f"benchmark {path} must be an object with a tasks list")
        tasks = []
        for i, raw in enumerate(data["tasks"]):
            metric_name = raw.get("metric", "exact_match")
            factory = METRIC_FACTORIES.get(metric_name)
            if factory is None:
                raise ValidationError(
                    f"benchmark {path}: task[{i}] uses unknown metric {metric_name!r}"
                )
            tasks.append(
                Task(
                    id=str(raw["id"]),
                    input=raw["input"],
                    ground_truth=raw.get("ground_truth"),
                    metrics=[factory(raw.get("ground_truth"))],
                    tags=raw.get("tags"),
                )
            )
        return cls(name=data.get("name", path.stem), tasks=tasks)
