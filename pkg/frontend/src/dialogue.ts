// Live dialogue view. Rendering is a pure function of the reduced event
// log, so replaying a recorded log always reproduces the same DOM.

import {
    ContentBlock,
    EventEnvelope,
    MessagePayload,
    escapeHtml,
} from "./types.js";

export interface Bubble {
    msgId: string;
    name: string;
    role: string;
    content: string | ContentBlock[];
    frozen: boolean;
    interrupted: boolean;
}

export interface DialogueState {
    bubbles: Bubble[];
    lastSeq: number;
    connected: boolean | null;
    eventCount: number;
}

export function initialDialogueState(): DialogueState {
    return { bubbles: [], lastSeq: -1, connected: null, eventCount: 0 };
}

function upsertBubble(state: DialogueState, payload: MessagePayload): void {
    const done = payload.stream_done !== false;
    const interrupted = Boolean(
        payload.metadata && (payload.metadata as any).interrupted,
    );
    const existing = state.bubbles.find((b) => b.msgId === payload.id);
    if (existing) {
        // cumulative chunk contract: replace in place, never append
        existing.content = payload.content;
        existing.frozen = existing.frozen || done;
        existing.interrupted = existing.interrupted || interrupted;
        return;
    }
    state.bubbles.push({
        msgId: payload.id,
        name: payload.name,
        role: payload.role,
        content: payload.content,
        frozen: done,
        interrupted,
    });
}

export function reduceEvents(
    state: DialogueState,
    events: EventEnvelope[],
): DialogueState {
    for (const event of events) {
        if (event.seq <= state.lastSeq) {
            continue; // duplicate delivery (e.g. replay overlap after reconnect)
        }
        state.lastSeq = event.seq;
        state.eventCount += 1;
        switch (event.type) {
            case "message":
                upsertBubble(state, event.payload as MessagePayload);
                break;
            case "status":
                state.connected = Boolean(event.payload?.connected);
                break;
            case "interrupt": {
                // annotate whatever was still streaming when the user hit stop
                const streaming = [...state.bubbles].reverse().find((b) => !b.frozen);
                if (streaming) {
                    streaming.interrupted = true;
                }
                const text = event.payload?.text;
                if (text) {
                    state.bubbles.push({
                        msgId: `interrupt-${event.seq}`,
                        name: "user",
                        role: "user",
                        content: String(text),
                        frozen: true,
                        interrupted: false,
                    });
                }
                break;
            }
            case "user_input":
                state.bubbles.push({
                    msgId: `input-${event.seq}`,
                    name: "user",
                    role: "user",
                    content: String(event.payload?.text ?? ""),
                    frozen: true,
                    interrupted: false,
                });
                break;
            case "span":
                break; // spans feed the trace view, not the dialogue
        }
    }
    return state;
}

function renderBlock(block: ContentBlock): string {
    switch (block.type) {
        case "text":
            return `<p class="text">${escapeHtml(block.text)}</p>`;
        case "thinking":
            // collapsed by default; reasoning is available but not prominent
            return (
                `<details class="thinking"><summary>thinking</summary>` +
                `<pre>${escapeHtml(block.thinking)}</pre></details>`
            );
        case "tool_use":
            return (
                `<div class="tool-use"><span class="tool-name">${escapeHtml(block.name)}</span>` +
                `<pre class="tool-input">${escapeHtml(JSON.stringify(block.input, null, 2))}</pre></div>`
            );
        case "tool_result": {
            const inner = block.output.map(renderBlock).join("");
            return (
                `<div class="tool-result"><span class="tool-name">${escapeHtml(block.name)}</span>` +
                `<div class="tool-output">${inner}</div></div>`
            );
        }
        default: {
            const media = block as Extract<ContentBlock, { type: "image" | "audio" | "video" }>;
            const url =
                media.source.type === "url"
                    ? media.source.url
                    : `data:${media.source.media_type};base64,${media.source.data}`;
            if (media.type === "image") {
                return `<img class="media" src="${escapeHtml(url)}" alt="image">`;
            }
            return `<${media.type} class="media" controls src="${escapeHtml(url)}"></${media.type}>`;
        }
    }
}

function renderContent(content: string | ContentBlock[]): string {
    if (typeof content === "string") {
        return `<p class="text">${escapeHtml(content)}</p>`;
    }
    return content.map(renderBlock).join("");
}

export function renderBubble(bubble: Bubble): string {
    const classes = ["bubble", `role-${bubble.role}`];
    if (!bubble.frozen) classes.push("streaming");
    if (bubble.interrupted) classes.push("interrupted");
    const badge = bubble.interrupted
        ? `<span class="badge interrupted-badge">interrupted</span>`
        : "";
    return (
        `<div class="${classes.join(" ")}" data-msg-id="${escapeHtml(bubble.msgId)}">` +
        `<div class="meta"><span class="sender">${escapeHtml(bubble.name)}</span>${badge}</div>` +
        `<div class="content">${renderContent(bubble.content)}</div>` +
        `</div>`
    );
}

export function renderDialogue(state: DialogueState): string {
    const banner =
        state.connected === false
            ? `<div class="banner disconnected">app disconnected &mdash; resubscribing&hellip;</div>`
            : "";
    const bubbles = state.bubbles.map(renderBubble).join("\n");
    return `<div class="dialogue">${banner}\n${bubbles}\n</div>`;
}
