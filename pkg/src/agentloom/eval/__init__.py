from .aggregate import (
    COHORT_CORRECT,
    COHORT_INCORRECT,
    COHORT_UNSTABLE,
    AggregateReport,
    MetricAggregate,
    aggregate,
    bootstrap_ci,
)
from .evaluator import GeneralEvaluator, ParallelEvaluator, RunSummary
from .report import write_report
from .storage import EvalStorage
from .task import (
    Benchmark,
    ExactMatchMetric,
    JaccardMetric,
    Metric,
    MetricResult,
    SolutionOutput,
    Task,
    metric_eval,
)

__all__ = [
    "Task",
    "SolutionOutput",
    "Metric",
    "MetricResult",
    "ExactMatchMetric",
    "JaccardMetric",
    "metric_eval",
    "Benchmark",
    "EvalStorage",
    "GeneralEvaluator",
    "ParallelEvaluator",
    "RunSummary",
    "aggregate",
    "bootstrap_ci",
    "AggregateReport",
    "MetricAggregate",
    "write_report",
    "COHORT_CORRECT",
    "COHORT_INCORRECT",
    "COHORT_UNSTABLE",
]
