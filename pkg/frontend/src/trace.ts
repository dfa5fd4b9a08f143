// Trace waterfall: spans as horizontal bars, nested by parent, ordered
// by start time. Bar geometry is proportional to the span durations the
// server reported; clicking a linked row navigates to its message.

import { SpanPayload, escapeHtml } from "./types.js";

export interface WaterfallRow {
    span: SpanPayload;
    depth: number;
    offsetPct: number;
    widthPct: number;
    orphan: boolean;
}

function parseInstant(value: string | null): number {
    if (!value) return NaN;
    const ms = Date.parse(value);
    return Number.isNaN(ms) ? NaN : ms;
}

export function buildWaterfall(spans: SpanPayload[]): WaterfallRow[] {
    if (spans.length === 0) return [];
    const byId = new Map(spans.map((s) => [s.span_id, s]));
    const starts = spans.map((s) => parseInstant(s.start)).filter((v) => !Number.isNaN(v));
    const ends = spans.map((s) => parseInstant(s.end ?? s.start)).filter((v) => !Number.isNaN(v));
    const t0 = Math.min(...starts);
    const t1 = Math.max(...ends, t0 + 1);
    const total = Math.max(t1 - t0, 1);

    const children = new Map<string | null, SpanPayload[]>();
    const roots: SpanPayload[] = [];
    const orphans = new Set<string>();
    for (const span of spans) {
        const parent = span.parent_span_id;
        if (parent && byId.has(parent)) {
            const siblings = children.get(parent) ?? [];
            siblings.push(span);
            children.set(parent, siblings);
        } else {
            if (parent && !byId.has(parent)) orphans.add(span.span_id);
            roots.push(span);
        }
    }
    const byStart = (a: SpanPayload, b: SpanPayload) =>
        parseInstant(a.start) - parseInstant(b.start) || a.span_id.localeCompare(b.span_id);

    const rows: WaterfallRow[] = [];
    const walk = (span: SpanPayload, depth: number) => {
        const start = parseInstant(span.start);
        const end = parseInstant(span.end ?? span.start);
        rows.push({
            span,
            depth,
            offsetPct: ((start - t0) / total) * 100,
            widthPct: Math.max(((end - start) / total) * 100, 0.5),
            orphan: orphans.has(span.span_id),
        });
        for (const child of (children.get(span.span_id) ?? []).sort(byStart)) {
            walk(child, depth + 1);
        }
    };
    for (const root of roots.sort(byStart)) {
        walk(root, 0);
    }
    return rows;
}

export function renderTrace(spans: SpanPayload[]): string {
    const rows = buildWaterfall(spans);
    if (rows.length === 0) {
        return `<div class="trace empty">no spans yet</div>`;
    }
    const html = rows
        .map((row) => {
            const classes = ["span-row", `kind-${row.span.kind}`];
            if (row.span.status === "error") classes.push("error");
            const linked = row.span.linked_msg_id
                ? ` data-msg-id="${escapeHtml(row.span.linked_msg_id)}"`
                : "";
            const orphanBadge = row.orphan
                ? `<span class="badge warning" title="parent span missing">orphan</span>`
                : "";
            const errorText =
                row.span.status === "error"
                    ? ` title="${escapeHtml(String(row.span.attributes?.error ?? "error"))}"`
                    : "";
            return (
                `<div class="${classes.join(" ")}" data-span-id="${escapeHtml(row.span.span_id)}"${linked}${errorText}>` +
                `<span class="span-label" style="padding-left:${row.depth * 16}px">` +
                `${escapeHtml(row.span.name)}${orphanBadge}</span>` +
                `<span class="span-track"><span class="span-bar" ` +
                `style="margin-left:${row.offsetPct.toFixed(3)}%;width:${row.widthPct.toFixed(3)}%"></span></span>` +
                `</div>`
            );
        })
        .join("\n");
    return `<div class="trace">\n${html}\n</div>`;
}
