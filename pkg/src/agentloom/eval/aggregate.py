"""Aggregation over stored results: summary stats, cohorts, bootstrap CI.

This is a pure function of the storage contents plus the bootstrap seed,
so reruns reproduce identical reports.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..errors import StorageError
from .storage import EvalStorage
from .task import MetricResult

COHORT_CORRECT = "consistently_correct"
COHORT_INCORRECT = "consistently_incorrect"
COHORT_UNSTABLE = "unstable"


def bootstrap_ci(
    scores: Sequence[float],
    bootstrap_samples: int = 1000,
    seed: int = 0,
    confidence: float = 0.95,
) -> tuple[float, float]:
    """Percentile-method bootstrap CI of the mean with a seeded PRNG."""
    arr = np.asarray(list(scores), dtype=float)
    if arr.size == 0:
        raise ValueError("bootstrap_ci needs at least one score")
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, arr.size, size=(bootstrap_samples, arr.size))
    means = arr[indices].mean(axis=1)
    lower_q = (1.0 - confidence) / 2.0 * 100.0
    return (
        float(np.percentile(means, lower_q)),
        float(np.percentile(means, 100.0 - lower_q)),
    )


def _result_success(result: MetricResult) -> bool:
    if result.success is not None:
        return result.success
    if result.kind == "categorical":
        return result.value == "pass"
    return (result.score or 0.0) >= 1.0


def _result_score(result: MetricResult) -> float:
    if result.kind == "numerical":
        return float(result.score or 0.0)
    return 1.0 if _result_success(result) else 0.0


@dataclass
class MetricAggregate:
    name: str
    kind: str
    mean: float
    stddev: float
    ci95: tuple[float, float]
    per_repeat: dict[int, float]
    scores: list[float]
    pass_rate: float | None = None
    label_counts: dict[str, int] | None = None
    cohorts: dict[str, list[str]] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "name": self.name,
            "kind": self.kind,
            "mean": self.mean,
            "stddev": self.stddev,
            "ci95": list(self.ci95),
            "per_repeat": {str(k): v for k, v in sorted(self.per_repeat.items())},
            "scores": self.scores,
            "cohorts": self.cohorts,
        }
        if self.pass_rate is not None:
            out["pass_rate"] = self.pass_rate
        if self.label_counts is not None:
            out["label_counts"] = self.label_counts
        return out


@dataclass
class AggregateReport:
    benchmark: str
    seed: int
    bootstrap_samples: int
    repeats: list[int]
    task_count: int
    metrics: dict[str, MetricAggregate]
    items: dict[str, dict[str, dict[str, Any]]]

    def to_dict(self) -> dict[str, Any]:
        return {
            "benchmark": self.benchmark,
            "seed": self.seed,
            "bootstrap_samples": self.bootstrap_samples,
            "repeats": self.repeats,
            "task_count": self.task_count,
            "metrics": {name: agg.to_dict() for name, agg in sorted(self.metrics.items())},
            "items": self.items,
        }


def aggregate(
    storage: EvalStorage,
    benchmark: str,
    bootstrap_samples: int = 1000,
    seed: int = 0,
) -> AggregateReport:
    """Summarize all completed (task, repeat) cells of a benchmark."""
    cells = list(storage.completed_cells(benchmark))
    if not cells:
        raise StorageError(f"no completed results for benchmark {benchmark!r}")

    # metric -> task -> repeat -> MetricResult
    table: dict[str, dict[str, dict[int, MetricResult]]] = {}
    repeats: set[int] = set()
    tasks: list[str] = []
    for task_id, repeat in cells:
        repeats.add(repeat)
        if task_id not in tasks:
            tasks.append(task_id)
        for result in storage.load_evaluation(benchmark, task_id, repeat):
            table.setdefault(result.name, {}).setdefault(task_id, {})[repeat] = result

    metrics: dict[str, MetricAggregate] = {}
    items: dict[str, dict[str, dict[str, Any]]] = {}
    for metric_name, by_task in table.items():
        kinds = {r.kind for by_repeat in by_task.values() for r in by_repeat.values()}
        kind = "numerical" if kinds == {"numerical"} else "categorical"

        per_repeat: dict[int, list[float]] = {}
        all_scores: list[float] = []
        successes: list[bool] = []
        label_counts: dict[str, int] = {}
        cohorts: dict[str, list[str]] = {
            COHORT_CORRECT: [],
            COHORT_INCORRECT: [],
            COHORT_UNSTABLE: [],
        }
        for task_id in sorted(by_task):
            by_repeat = by_task[task_id]
            outcomes = []
            for repeat in sorted(by_repeat):
                result = by_repeat[repeat]
                score = _result_score(result)
                success = _result_success(result)
                per_repeat.setdefault(repeat, []).append(score)
                all_scores.append(score)
                successes.append(success)
                outcomes.append(success)
                if result.kind == "categorical" and result.value is not None:
                    label_counts[result.value] = label_counts.get(result.value, 0) + 1
                items.setdefault(task_id, {}).setdefault(metric_name, {"scores": {}})[
                    "scores"
                ][str(repeat)] = score
            if all(outcomes):
                cohort = COHORT_CORRECT
            elif not any(outcomes):
                cohort = COHORT_INCORRECT
            else:
                cohort = COHORT_UNSTABLE
            cohorts[cohort].append(task_id)
            items[task_id][metric_name]["cohort"] = cohort

        repeat_means = {
            repeat: float(np.mean(scores)) for repeat, scores in sorted(per_repeat.items())
        }
        repeat_scores = list(repeat_means.values())
        ci = bootstrap_ci(repeat_scores, bootstrap_samples=bootstrap_samples, seed=seed)
        metrics[metric_name] = MetricAggregate(
            name=metric_name,
            kind=kind,
            mean=float(np.mean(repeat_scores)),
            stddev=float(np.std(repeat_scores)),
            ci95=ci,
            per_repeat=repeat_means,
            scores=all_scores,
            pass_rate=(
                float(np.mean([1.0 if s else 0.0 for s in successes]))
                if kind == "categorical"
                else None
            ),
            label_counts=label_counts if kind == "categorical" else None,
            cohorts=cohorts,
        )

    return AggregateReport(
        benchmark=benchmark,
        seed=seed,
        bootstrap_samples=bootstrap_samples,
        repeats=sorted(repeats),
        task_count=len(tasks),
        metrics=metrics,
        items=items,
    )
