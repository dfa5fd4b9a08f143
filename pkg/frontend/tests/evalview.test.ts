import { describe, expect, it } from "vitest";

import { renderEval, renderTrajectories } from "../src/evalview";
import { AggregateReport, TrajectoryResponse } from "../src/types";

// Shaped exactly like the server's /api/eval/{bench}/aggregate response.
const REPORT: AggregateReport = {
    benchmark: "toy",
    seed: 0,
    bootstrap_samples: 1000,
    repeats: [0, 1],
    task_count: 3,
    metrics: {
        exact_match: {
            name: "exact_match",
            kind: "categorical",
            mean: 0.8333333333333334,
            stddev: 0.16666666666666666,
            ci95: [0.6666666666666666, 1],
            per_repeat: { "0": 1, "1": 0.6666666666666666 },
            scores: [1, 1, 1, 0, 1, 1],
            pass_rate: 0.8333333333333334,
            label_counts: { pass: 5, fail: 1 },
            cohorts: {
                consistently_correct: ["t0", "t2"],
                consistently_incorrect: [],
                unstable: ["t1"],
            },
        },
        jaccard: {
            name: "jaccard",
            kind: "numerical",
            mean: 0.7524,
            stddev: 0.1102,
            ci95: [0.642199999, 0.862600001],
            per_repeat: { "0": 0.8626, "1": 0.6422 },
            scores: [1, 0.5, 1, 0.25, 0.9, 0.86],
            cohorts: {
                consistently_correct: ["t0"],
                consistently_incorrect: ["t2"],
                unstable: ["t1"],
            },
        },
    },
    items: {
        t1: {
            exact_match: { cohort: "unstable", scores: { "0": 1, "1": 0 } },
        },
    },
};

describe("renderEval", () => {
    it("displays server CI values verbatim", () => {
        const html = renderEval(REPORT);
        // exact String() of the JSON numbers, no client-side rounding or math
        expect(html).toContain(`[${String(0.6666666666666666)}, ${String(1)}]`);
        expect(html).toContain(`[${String(0.642199999)}, ${String(0.862600001)}]`);
    });

    it("displays mean, stddev and pass rate verbatim", () => {
        const html = renderEval(REPORT);
        expect(html).toContain(String(REPORT.metrics.jaccard.mean));
        expect(html).toContain(String(REPORT.metrics.jaccard.stddev));
        expect(html).toContain(String(REPORT.metrics.exact_match.pass_rate));
    });

    it("categorical metrics become label-frequency bars", () => {
        const html = renderEval(REPORT);
        expect(html).toContain('class="bar label-pass"');
        expect(html).toContain('class="bar label-fail"');
        expect(html).toContain(">5<"); // pass count shown
        expect(html).toContain(">1<"); // fail count shown
    });

    it("numerical metrics get a histogram with the CI band", () => {
        const html = renderEval(REPORT);
        expect(html).toContain("hist-bars");
        expect(html).toContain("ci-band");
    });

    it("cohort table groups items and unstable ones are clickable", () => {
        const html = renderEval(REPORT);
        expect(html).toContain("consistently correct");
        expect(html).toContain("consistently incorrect");
        expect(html).toContain(`data-task-id="t1"`);
        // stable items are plain text, not buttons
        expect(html).not.toContain(`data-task-id="t0"`);
    });

    it("renders deterministically", () => {
        expect(renderEval(REPORT)).toBe(renderEval(REPORT));
    });
});

describe("renderTrajectories", () => {
    const RESPONSE: TrajectoryResponse = {
        benchmark: "toy",
        task_id: "t1",
        repeats: {
            "0": {
                success: true,
                output: "42",
                trajectory: [
                    { id: "a", name: "u", role: "user", content: "q", timestamp: "t" },
                    { id: "b", name: "agent", role: "assistant", content: "42", timestamp: "t" },
                ],
            },
            "1": {
                success: false,
                output: "41",
                trajectory: [
                    { id: "c", name: "u", role: "user", content: "q", timestamp: "t" },
                    { id: "d", name: "agent", role: "assistant", content: "41", timestamp: "t" },
                ],
            },
        },
    };

    it("shows both repeats side by side", () => {
        const html = renderTrajectories(RESPONSE);
        expect(html).toContain(`data-repeat="0"`);
        expect(html).toContain(`data-repeat="1"`);
        expect(html.match(/class="trajectory"/g)).toHaveLength(2);
        expect(html).toContain("outcome-ok");
        expect(html).toContain("outcome-failed");
    });

    it("renders each repeat's message list", () => {
        const html = renderTrajectories(RESPONSE);
        for (const id of ["a", "b", "c", "d"]) {
            expect(html).toContain(`data-msg-id="${id}"`);
        }
    });
});
