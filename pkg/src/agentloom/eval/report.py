"""Render an aggregate report to files: JSON, CSV tables, and figures.

Categorical metrics become label-frequency bar charts; numerical metrics
become score histograms with the bootstrap CI band. The delimited output
(metrics.csv / items.csv) carries the same numbers the figures show.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # render to files; no display needed
import matplotlib.pyplot as plt

from ..message import utc_now
from .aggregate import AggregateReport, MetricAggregate


def _categorical_figure(agg: MetricAggregate, path: Path) -> None:
    counts = agg.label_counts or {}
    labels = sorted(counts)
    values = [counts[label] for label in labels]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    bars = ax.bar(labels, values, color=["#4c9f70" if l == "pass" else "#c75d5d" for l in labels])
    ax.bar_label(bars)
    ax.set_ylabel("count")
    ax.set_title(f"{agg.name}: label frequencies (pass rate {agg.pass_rate:.2f})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _numerical_figure(agg: MetricAggregate, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.hist(agg.scores, bins=min(20, max(5, len(set(agg.scores)))), color="#5a7fb5", edgecolor="white")
    lo, hi = agg.ci95
    ax.axvspan(lo, hi, color="#e8c468", alpha=0.35, label=f"95% CI [{lo:.3f}, {hi:.3f}]")
    ax.axvline(agg.mean, color="#2f2f2f", linestyle="--", label=f"mean {agg.mean:.3f}")
    ax.set_xlabel("score")
    ax.set_ylabel("count")
    ax.set_title(f"{agg.name}: score distribution")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(report: AggregateReport, out_dir: str | Path) -> list[Path]:
    """Write aggregate.json, metrics.csv, items.csv, and one PNG per metric.

    Returns the paths written.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    json_path = out / "aggregate.json"
    payload = report.to_dict()
    payload["generated_at"] = utc_now()
    json_path.write_text(json.dumps(payload, indent=2, ensure_ascii=False), encoding="utf-8")
    written.append(json_path)

    metrics_csv = out / "metrics.csv"
    with open(metrics_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "kind", "mean", "stddev", "ci95_low", "ci95_high", "pass_rate"])
        for name in sorted(report.metrics):
            agg = report.metrics[name]
            writer.writerow(
                [
                    name,
                    agg.kind,
                    f"{agg.mean:.6f}",
                    f"{agg.stddev:.6f}",
                    f"{agg.ci95[0]:.6f}",
                    f"{agg.ci95[1]:.6f}",
                    "" if agg.pass_rate is None else f"{agg.pass_rate:.6f}",
                ]
            )
    written.append(metrics_csv)

    items_csv = out / "items.csv"
    with open(items_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task_id", "metric", "cohort", "scores"])
        for task_id in sorted(report.items):
            for metric_name, info in sorted(report.items[task_id].items()):
                scores = ";".join(
                    f"{repeat}={score:g}" for repeat, score in sorted(info["scores"].items())
                )
                writer.writerow([task_id, metric_name, info.get("cohort", ""), scores])
    written.append(items_csv)

    for name in sorted(report.metrics):
        agg = report.metrics[name]
        fig_path = out / f"{name}.png"
        if agg.kind == "categorical":
            _categorical_figure(agg, fig_path)
        else:
            _numerical_figure(agg, fig_path)
        written.append(fig_path)
    return written
