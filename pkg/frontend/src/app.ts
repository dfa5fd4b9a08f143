// Browser wiring: connects the pure views to the studio server.
// State flows one way: websocket events -> reducer -> render -> innerHTML.

import { controlAvailability, makeInterruptEvent, makeUserInputEvent } from "./controls.js";
import { DialogueState, initialDialogueState, reduceEvents, renderDialogue } from "./dialogue.js";
import { renderEval, renderTrajectories } from "./evalview.js";
import { renderTrace } from "./trace.js";
import { AggregateReport, EventEnvelope, RunInfo, SpanPayload, TrajectoryResponse } from "./types.js";

const el = (id: string) => document.getElementById(id) as HTMLElement;

class RunView {
    state: DialogueState = initialDialogueState();
    socket: WebSocket | null = null;
    closed = false;
    reconnectDelay = 500;

    constructor(public runId: string) {}

    connect(): void {
        if (this.closed) return;
        const from = this.state.lastSeq + 1;
        const proto = location.protocol === "https:" ? "wss" : "ws";
        this.socket = new WebSocket(`${proto}://${location.host}/ws/ui/${this.runId}?from=${from}`);
        this.socket.onmessage = (event) => {
            const envelope = JSON.parse(event.data) as EventEnvelope;
            reduceEvents(this.state, [envelope]);
            this.render();
            if (envelope.type === "span") {
                void this.refreshTrace();
            }
        };
        this.socket.onclose = () => {
            if (this.closed) return;
            this.state.connected = false;
            this.render();
            setTimeout(() => this.connect(), this.reconnectDelay);
            this.reconnectDelay = Math.min(this.reconnectDelay * 2, 5000);
        };
        this.socket.onopen = () => {
            this.reconnectDelay = 500;
        };
    }

    close(): void {
        this.closed = true;
        this.socket?.close();
    }

    send(event: { type: string; payload: unknown }): void {
        if (this.socket && this.socket.readyState === WebSocket.OPEN) {
            this.socket.send(JSON.stringify(event));
        }
    }

    render(): void {
        el("dialogue-pane").innerHTML = renderDialogue(this.state);
        const availability = controlAvailability(this.state.connected);
        const interruptButton = el("interrupt-button") as HTMLButtonElement;
        const inputBox = el("input-box") as HTMLInputElement;
        interruptButton.disabled = availability.disabled;
        interruptButton.title = availability.tooltip;
        inputBox.disabled = availability.disabled;
        inputBox.title = availability.tooltip;
        const pane = el("dialogue-pane");
        pane.scrollTop = pane.scrollHeight;
    }

    async refreshTrace(): Promise<void> {
        const response = await fetch(`/api/runs/${this.runId}/spans`);
        const body = (await response.json()) as { spans: SpanPayload[] };
        el("trace-pane").innerHTML = renderTrace(body.spans);
    }
}

let current: RunView | null = null;

async function showRuns(): Promise<void> {
    const response = await fetch("/api/runs");
    const runs = (await response.json()) as RunInfo[];
    const listing = runs
        .map(
            (run) =>
                `<button class="run ${run.connected ? "live" : ""}" data-run-id="${run.run_id}">` +
                `${run.name} <span class="count">${run.events} events</span></button>`,
        )
        .join("");
    el("run-list").innerHTML = listing || `<p class="empty">no runs yet</p>`;
    for (const button of document.querySelectorAll<HTMLButtonElement>("#run-list .run")) {
        button.onclick = () => openRun(button.dataset.runId!);
    }
}

function openRun(runId: string): void {
    current?.close();
    current = new RunView(runId);
    current.connect();
    void current.refreshTrace();
    el("run-title").textContent = runId;
}

async function showEval(): Promise<void> {
    const response = await fetch("/api/eval/benchmarks");
    if (!response.ok) {
        el("eval-pane").innerHTML = `<p class="empty">no evaluation storage configured</p>`;
        return;
    }
    const benchmarks = (await response.json()) as string[];
    if (benchmarks.length === 0) {
        el("eval-pane").innerHTML = `<p class="empty">no benchmarks found</p>`;
        return;
    }
    const reports = await Promise.all(
        benchmarks.map(async (name) => {
            const body = await fetch(`/api/eval/${name}/aggregate`);
            return (await body.json()) as AggregateReport;
        }),
    );
    el("eval-pane").innerHTML = reports.map(renderEval).join("\n");
    for (const button of document.querySelectorAll<HTMLButtonElement>("#eval-pane .item.unstable")) {
        button.onclick = async () => {
            const section = button.closest(".eval") as HTMLElement;
            const benchmark = section.dataset.benchmark!;
            const response = await fetch(
                `/api/eval/${benchmark}/items/${button.dataset.taskId}/trajectories`,
            );
            const body = (await response.json()) as TrajectoryResponse;
            el("compare-pane").innerHTML = renderTrajectories(body);
            el("compare-pane").scrollIntoView({ behavior: "smooth" });
        };
    }
}

function wireControls(): void {
    (el("interrupt-button") as HTMLButtonElement).onclick = () => {
        const steer = (el("steer-box") as HTMLInputElement).value.trim();
        current?.send(makeInterruptEvent(steer || undefined));
        (el("steer-box") as HTMLInputElement).value = "";
    };
    (el("input-box") as HTMLInputElement).onkeydown = (event) => {
        if (event.key === "Enter") {
            const box = el("input-box") as HTMLInputElement;
            if (box.value.trim()) {
                current?.send(makeUserInputEvent(box.value));
                box.value = "";
            }
        }
    };
    // span <-> message navigation: click a linked span, highlight its bubble
    el("trace-pane").addEventListener("click", (event) => {
        const row = (event.target as HTMLElement).closest<HTMLElement>(".span-row[data-msg-id]");
        if (!row) return;
        const bubble = document.querySelector<HTMLElement>(
            `.bubble[data-msg-id="${row.dataset.msgId}"]`,
        );
        if (bubble) {
            bubble.scrollIntoView({ behavior: "smooth", block: "center" });
            bubble.classList.add("highlight");
            setTimeout(() => bubble.classList.remove("highlight"), 1500);
        }
    });
    el("dialogue-pane").addEventListener("click", (event) => {
        const bubble = (event.target as HTMLElement).closest<HTMLElement>(".bubble[data-msg-id]");
        if (!bubble) return;
        const row = document.querySelector<HTMLElement>(
            `.span-row[data-msg-id="${bubble.dataset.msgId}"]`,
        );
        if (row) {
            row.scrollIntoView({ behavior: "smooth", block: "center" });
            row.classList.add("highlight");
            setTimeout(() => row.classList.remove("highlight"), 1500);
        }
    });
}

export function boot(): void {
    wireControls();
    void showRuns();
    void showEval();
    setInterval(() => void showRuns(), 5000);
}

if (typeof document !== "undefined" && document.getElementById("run-list")) {
    boot();
}
