import { describe, expect, it } from "vitest";

import { controlAvailability, makeInterruptEvent, makeUserInputEvent } from "../src/controls";

describe("control event shapes", () => {
    it("interrupt button issues the documented control event", () => {
        expect(makeInterruptEvent()).toEqual({ type: "interrupt", payload: {} });
    });

    it("interrupt carries optional steering text", () => {
        expect(makeInterruptEvent("wrap it up")).toEqual({
            type: "interrupt",
            payload: { text: "wrap it up" },
        });
    });

    it("user input event carries the text", () => {
        expect(makeUserInputEvent("hello")).toEqual({
            type: "user_input",
            payload: { text: "hello" },
        });
    });

    it("events can target a named agent", () => {
        expect(makeInterruptEvent(undefined, "Friday").payload).toEqual({ agent: "Friday" });
        expect(makeUserInputEvent("hi", "Bob").payload).toEqual({ text: "hi", agent: "Bob" });
    });
});

describe("control availability", () => {
    it("enabled while connected", () => {
        expect(controlAvailability(true)).toEqual({ disabled: false, tooltip: "" });
    });

    it("disabled with tooltip when disconnected or unknown", () => {
        for (const connected of [false, null]) {
            const availability = controlAvailability(connected);
            expect(availability.disabled).toBe(true);
            expect(availability.tooltip.length).toBeGreaterThan(0);
        }
    });
});
