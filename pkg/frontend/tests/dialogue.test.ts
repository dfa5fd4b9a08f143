import { describe, expect, it } from "vitest";

import {
    initialDialogueState,
    reduceEvents,
    renderDialogue,
} from "../src/dialogue";
import { EventEnvelope } from "../src/types";

function messageEvent(seq: number, id: string, text: string, done: boolean): EventEnvelope {
    return {
        seq,
        type: "message",
        payload: {
            id,
            name: "Friday",
            role: "assistant",
            content: text,
            timestamp: "2026-01-01T00:00:00.000Z",
            stream_done: done,
        },
    };
}

describe("cumulative streaming", () => {
    it("updates one bubble in place, replacing not appending", () => {
        const state = initialDialogueState();
        reduceEvents(state, [
            messageEvent(0, "m1", "He", false),
            messageEvent(1, "m1", "Hello", false),
        ]);
        expect(state.bubbles).toHaveLength(1);
        expect(state.bubbles[0].content).toBe("Hello");
        expect(state.bubbles[0].frozen).toBe(false);
        const html = renderDialogue(state);
        expect(html.match(/data-msg-id="m1"/g)).toHaveLength(1);
        expect(html).toContain("Hello");
        expect(html).not.toContain("HeHello");
    });

    it("freezes the bubble when the stream finishes", () => {
        const state = initialDialogueState();
        reduceEvents(state, [
            messageEvent(0, "m1", "He", false),
            messageEvent(1, "m1", "Hello!", true),
        ]);
        expect(state.bubbles[0].frozen).toBe(true);
        expect(renderDialogue(state)).not.toContain("streaming");
    });
});

describe("block rendering", () => {
    it("tool use shows name and pretty-printed input", () => {
        const state = initialDialogueState();
        reduceEvents(state, [
            {
                seq: 0,
                type: "message",
                payload: {
                    id: "m1",
                    name: "Friday",
                    role: "assistant",
                    content: [
                        {
                            type: "tool_use",
                            id: "c1",
                            name: "get_weather",
                            input: { location: "Beijing" },
                        },
                    ],
                    timestamp: "t",
                    stream_done: true,
                },
            },
        ]);
        const html = renderDialogue(state);
        expect(html).toContain("get_weather");
        expect(html).toContain(JSON.stringify({ location: "Beijing" }, null, 2).replace(/"/g, "&quot;"));
    });

    it("thinking blocks are collapsed by default", () => {
        const state = initialDialogueState();
        reduceEvents(state, [
            {
                seq: 0,
                type: "message",
                payload: {
                    id: "m1",
                    name: "Friday",
                    role: "assistant",
                    content: [{ type: "thinking", thinking: "private plan" }],
                    timestamp: "t",
                    stream_done: true,
                },
            },
        ]);
        const html = renderDialogue(state);
        expect(html).toContain("<details");
        expect(html).not.toContain("<details open");
        expect(html).toContain("private plan");
    });

    it("escapes html in message content", () => {
        const state = initialDialogueState();
        reduceEvents(state, [messageEvent(0, "m1", "<script>alert(1)</script>", true)]);
        const html = renderDialogue(state);
        expect(html).not.toContain("<script>");
        expect(html).toContain("&lt;script&gt;");
    });
});

describe("status and interruption", () => {
    it("disconnect shows a banner", () => {
        const state = initialDialogueState();
        reduceEvents(state, [{ seq: 0, type: "status", payload: { connected: false } }]);
        expect(renderDialogue(state)).toContain("disconnected");
    });

    it("interrupt annotates the streaming bubble and shows steering text", () => {
        const state = initialDialogueState();
        reduceEvents(state, [
            messageEvent(0, "m1", "partial answer", false),
            { seq: 1, type: "interrupt", payload: { text: "answer in French" } },
        ]);
        expect(state.bubbles[0].interrupted).toBe(true);
        const html = renderDialogue(state);
        expect(html).toContain("interrupted-badge");
        expect(html).toContain("answer in French"); // steering appears as the next user message
    });

    it("user_input events render as user bubbles", () => {
        const state = initialDialogueState();
        reduceEvents(state, [
            { seq: 0, type: "user_input", payload: { text: "typed in browser" } },
        ]);
        expect(state.bubbles[0].role).toBe("user");
        expect(renderDialogue(state)).toContain("typed in browser");
    });
});

describe("sequence handling", () => {
    it("drops already-seen sequence numbers", () => {
        const state = initialDialogueState();
        const events = [
            messageEvent(0, "a", "first", true),
            messageEvent(1, "b", "second", true),
        ];
        reduceEvents(state, events);
        reduceEvents(state, events); // full replay
        reduceEvents(state, [events[1]]); // partial overlap
        expect(state.bubbles).toHaveLength(2);
        expect(state.lastSeq).toBe(1);
    });

    it("tracks lastSeq for resubscription", () => {
        const state = initialDialogueState();
        reduceEvents(state, [messageEvent(7, "a", "x", true)]);
        expect(state.lastSeq).toBe(7);
    });
});
