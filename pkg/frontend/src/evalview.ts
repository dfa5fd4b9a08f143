// Evaluation views. Every number shown comes straight from a server
// response field (String(...) of the JSON value); the client draws but
// never computes statistics - bar geometry only groups server-sent data.

import { AggregateReport, MetricAggregate, TrajectoryResponse, escapeHtml } from "./types.js";
import { renderBubble } from "./dialogue.js";

export const COHORT_LABELS: Record<string, string> = {
    consistently_correct: "consistently correct",
    consistently_incorrect: "consistently incorrect",
    unstable: "unstable",
};

function renderCategorical(agg: MetricAggregate): string {
    const counts = agg.label_counts ?? {};
    const labels = Object.keys(counts).sort();
    const max = Math.max(...labels.map((l) => counts[l]), 1);
    const bars = labels
        .map((label) => {
            const height = (counts[label] / max) * 100;
            return (
                `<div class="bar-wrap"><div class="bar label-${escapeHtml(label)}" ` +
                `style="height:${height.toFixed(1)}%"></div>` +
                `<span class="bar-count">${String(counts[label])}</span>` +
                `<span class="bar-label">${escapeHtml(label)}</span></div>`
            );
        })
        .join("");
    const passRate =
        agg.pass_rate === undefined
            ? ""
            : `<span class="stat">pass rate <b>${String(agg.pass_rate)}</b></span>`;
    const ci =
        `<span class="stat ci">95% CI <b>[${String(agg.ci95[0])}, ${String(agg.ci95[1])}]</b></span>`;
    return `<div class="chart categorical">${bars}</div>${passRate}${ci}`;
}

function renderNumerical(agg: MetricAggregate): string {
    const [ciLow, ciHigh] = agg.ci95;
    const values = [...agg.scores, ciLow, ciHigh, agg.mean];
    const lo = Math.min(...values);
    const hi = Math.max(...values);
    const range = hi - lo || 1;
    const bins = 10;
    const counts = new Array(bins).fill(0);
    for (const score of agg.scores) {
        const index = Math.min(Math.floor(((score - lo) / range) * bins), bins - 1);
        counts[index] += 1;
    }
    const maxCount = Math.max(...counts, 1);
    const bars = counts
        .map(
            (count) =>
                `<div class="bar hist" style="height:${((count / maxCount) * 100).toFixed(1)}%"></div>`,
        )
        .join("");
    const bandLeft = ((ciLow - lo) / range) * 100;
    const bandWidth = Math.max(((ciHigh - ciLow) / range) * 100, 0.5);
    return (
        `<div class="chart numerical">` +
        `<div class="hist-bars">${bars}</div>` +
        `<div class="ci-band" style="left:${bandLeft.toFixed(2)}%;width:${bandWidth.toFixed(2)}%"` +
        ` title="95% CI"></div>` +
        `</div>` +
        `<span class="stat">mean <b>${String(agg.mean)}</b></span>` +
        `<span class="stat">stddev <b>${String(agg.stddev)}</b></span>` +
        `<span class="stat ci">95% CI <b>[${String(ciLow)}, ${String(ciHigh)}]</b></span>`
    );
}

function renderCohorts(agg: MetricAggregate): string {
    const rows = Object.keys(COHORT_LABELS)
        .map((cohort) => {
            const items = agg.cohorts[cohort] ?? [];
            const cells = items
                .map((taskId) =>
                    cohort === "unstable"
                        ? `<button class="item unstable" data-task-id="${escapeHtml(taskId)}">${escapeHtml(taskId)}</button>`
                        : `<span class="item">${escapeHtml(taskId)}</span>`,
                )
                .join(" ");
            return (
                `<tr class="cohort-${escapeHtml(cohort)}"><th>${COHORT_LABELS[cohort]}</th>` +
                `<td class="count">${String(items.length)}</td><td>${cells}</td></tr>`
            );
        })
        .join("\n");
    return `<table class="cohorts"><tbody>\n${rows}\n</tbody></table>`;
}

export function renderEval(report: AggregateReport): string {
    const names = Object.keys(report.metrics).sort();
    if (names.length === 0) {
        return `<div class="eval empty">no results for ${escapeHtml(report.benchmark)}</div>`;
    }
    const sections = names
        .map((name) => {
            const agg = report.metrics[name];
            const chart = agg.kind === "categorical" ? renderCategorical(agg) : renderNumerical(agg);
            return (
                `<section class="metric" data-metric="${escapeHtml(name)}">` +
                `<h3>${escapeHtml(name)} <span class="kind">${agg.kind}</span></h3>` +
                `${chart}${renderCohorts(agg)}</section>`
            );
        })
        .join("\n");
    return (
        `<div class="eval" data-benchmark="${escapeHtml(report.benchmark)}">` +
        `<h2>${escapeHtml(report.benchmark)}</h2>` +
        `<p class="meta">tasks ${String(report.task_count)}, repeats ${String(report.repeats.length)}, ` +
        `bootstrap ${String(report.bootstrap_samples)} (seed ${String(report.seed)})</p>` +
        `\n${sections}\n</div>`
    );
}

export function renderTrajectories(response: TrajectoryResponse): string {
    const repeats = Object.keys(response.repeats).sort();
    const columns = repeats
        .map((repeat) => {
            const info = response.repeats[repeat];
            const bubbles = info.trajectory
                .map((msg) =>
                    renderBubble({
                        msgId: msg.id,
                        name: msg.name,
                        role: msg.role,
                        content: msg.content,
                        frozen: true,
                        interrupted: Boolean(msg.metadata && (msg.metadata as any).interrupted),
                    }),
                )
                .join("\n");
            const outcome = info.success ? "ok" : "failed";
            return (
                `<div class="trajectory" data-repeat="${escapeHtml(repeat)}">` +
                `<h4>repeat ${escapeHtml(repeat)} <span class="outcome-${outcome}">${outcome}</span></h4>` +
                `<div class="output">output: <code>${escapeHtml(JSON.stringify(info.output))}</code></div>` +
                `${bubbles}</div>`
            );
        })
        .join("\n");
    return (
        `<div class="trajectory-compare" data-task-id="${escapeHtml(response.task_id)}">` +
        `<h3>${escapeHtml(response.task_id)}</h3>` +
        `<div class="columns">${columns}</div></div>`
    );
}
