import { describe, expect, it } from "vitest";

import { buildInspectorModel, decodeObservation } from "../src/inspector.js";
import type { DatabaseDocument } from "../src/protocol.js";

describe("observation decoding", () => {
  it("decodes the canonical endpoints", () => {
    const first = decodeObservation(0);
    expect(first.full).toContain("0 hand(s) raised, close, gaze, not waving, approach");
    const last = decodeObservation(71);
    expect(last.full).toContain("2 hand(s) raised, far, no gaze, waving, leave");
  });

  it("produces 72 distinct column labels", () => {
    const labels = Array.from({ length: 72 }, (_, i) => decodeObservation(i).short);
    expect(new Set(labels).size).toBe(72);
  });

  it("rejects out-of-range indices", () => {
    expect(() => decodeObservation(-1)).toThrow();
    expect(() => decodeObservation(72)).toThrow();
  });
});

describe("inspector model", () => {
  it("builds a |states| x 72 grid from a database document", () => {
    const doc: DatabaseDocument = {
      format_version: 1,
      persona: { name: "TOY", description: "d", seed: 0 },
      motions: ["cry", "standstill"],
      states: [
        ["cry", "cry"],
        ["standstill", "neutral"],
      ],
      initial_state: 0,
      transitions: [Array(72).fill(1), Array(72).fill(0)],
    };
    const model = buildInspectorModel(doc);
    expect(model.columns).toHaveLength(72);
    expect(model.rows).toHaveLength(2);
    expect(model.rows[0].label).toBe("cry / cry");
    expect(model.rows[0].cells.every((c) => c === 1)).toBe(true);
    expect(model.stateLabels[1]).toBe("standstill / neutral");
  });
});
