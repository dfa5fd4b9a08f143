// Wire shapes served by the studio server. The UI renders these verbatim
// and computes no statistics of its own.

export type EventType = "message" | "span" | "status" | "interrupt" | "user_input";

export interface EventEnvelope {
    seq: number;
    type: EventType;
    payload: any;
}

export interface TextBlock { type: "text"; text: string }
export interface ThinkingBlock { type: "thinking"; thinking: string }
export interface ToolUseBlock { type: "tool_use"; id: string; name: string; input: Record<string, unknown> }
export interface ToolResultBlock { type: "tool_result"; id: string; name: string; output: ContentBlock[] }
export interface MediaBlock { type: "image" | "audio" | "video"; source: { type: "url"; url: string } | { type: "base64"; media_type: string; data: string } }

export type ContentBlock = TextBlock | ThinkingBlock | ToolUseBlock | ToolResultBlock | MediaBlock;

export interface MessagePayload {
    id: string;
    name: string;
    role: "user" | "assistant" | "system";
    content: string | ContentBlock[];
    metadata?: Record<string, unknown> | null;
    timestamp: string;
    stream_done?: boolean;
}

export interface SpanPayload {
    trace_id: string;
    span_id: string;
    parent_span_id: string | null;
    name: string;
    kind: "llm" | "tool" | "agent" | "other";
    start: string;
    end: string | null;
    status: "ok" | "error";
    attributes: Record<string, unknown>;
    linked_msg_id?: string | null;
}

export interface MetricAggregate {
    name: string;
    kind: "categorical" | "numerical";
    mean: number;
    stddev: number;
    ci95: [number, number];
    per_repeat: Record<string, number>;
    scores: number[];
    pass_rate?: number;
    label_counts?: Record<string, number>;
    cohorts: Record<string, string[]>;
}

export interface AggregateReport {
    benchmark: string;
    seed: number;
    bootstrap_samples: number;
    repeats: number[];
    task_count: number;
    metrics: Record<string, MetricAggregate>;
    items: Record<string, Record<string, { cohort: string; scores: Record<string, number> }>>;
}

export interface TrajectoryResponse {
    benchmark: string;
    task_id: string;
    repeats: Record<string, { success: boolean; output: unknown; trajectory: MessagePayload[] }>;
}

export interface RunInfo {
    run_id: string;
    name: string;
    connected: boolean;
    events: number;
}

export function escapeHtml(value: string): string {
    return value
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;")
        .replace(/'/g, "&#39;");
}
