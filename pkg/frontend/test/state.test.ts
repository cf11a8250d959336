// Unit tests for the pure snapshot -> view derivation.

import { describe, expect, it } from "vitest";
import { SessionSnapshot } from "../src/api.js";
import { deriveSessionView } from "../src/state.js";

function makeSnapshot(overrides: Partial<SessionSnapshot> = {}): SessionSnapshot {
  return {
    id: "abcdef1234567890",
    phase: "awaiting_annotation",
    step: 0,
    config: { total_steps: 8, alpha_c: 1, alpha_s: 12, budget: 5000 },
    pool: { c: 40000, s: 3000 },
    installment: { delta_c: 200, delta_s: 16 },
    strategy: { c: 200, s: 16 },
    spent: 392,
    budget: 5000,
    pending_requests: [],
    observations: {},
    sample_count: 0,
    history: [],
    created_at: "2026-08-23T00:00:00Z",
    updated_at: "2026-08-23T00:00:00Z",
    ...overrides,
  };
}

describe("deriveSessionView", () => {
  it("copies identity, step, and strategy through unchanged", () => {
    const view = deriveSessionView(makeSnapshot());
    expect(view.id).toBe("abcdef1234567890");
    expect(view.step).toBe(0);
    expect(view.totalSteps).toBe(8);
    expect(view.strategy).toEqual({ c: 200, s: 16 });
    expect(view.installment).toEqual({ deltaC: 200, deltaS: 16 });
  });

  it.each([
    ["awaiting_annotation", "Awaiting annotation", "canConfirm"],
    ["awaiting_evaluations", "Awaiting evaluations", "canEnterScores"],
    ["recommendation_ready", "Recommendation ready", "canAccept"],
    ["finished", "Finished", "isFinished"],
  ] as const)("phase %s enables exactly one capability", (phase, label, flag) => {
    const view = deriveSessionView(makeSnapshot({ phase }));
    expect(view.phaseLabel).toBe(label);
    const flags = {
      canConfirm: view.canConfirm,
      canEnterScores: view.canEnterScores,
      canAccept: view.canAccept,
      isFinished: view.isFinished,
    };
    for (const [name, value] of Object.entries(flags)) {
      expect(value, name).toBe(name === flag);
    }
  });

  it("computes the spent fraction from spent and budget", () => {
    const view = deriveSessionView(makeSnapshot({ spent: 1250, budget: 5000 }));
    expect(view.spentFraction).toBeCloseTo(0.25, 12);
  });

  it("clamps the spent fraction into [0, 1]", () => {
    expect(deriveSessionView(makeSnapshot({ spent: 9999, budget: 100 })).spentFraction).toBe(1);
    expect(deriveSessionView(makeSnapshot({ spent: -5, budget: 100 })).spentFraction).toBe(0);
  });

  it("treats a zero budget as zero spend fraction instead of dividing", () => {
    expect(deriveSessionView(makeSnapshot({ spent: 10, budget: 0 })).spentFraction).toBe(0);
  });

  it("counts pending and observed evaluation requests", () => {
    const pending = [
      { request_id: "t0-r0", c: 10, s: 1, classification_ids: [], segmentation_ids: [] },
      { request_id: "t0-r1", c: 20, s: 2, classification_ids: [], segmentation_ids: [] },
      { request_id: "t0-r2", c: 30, s: 3, classification_ids: [], segmentation_ids: [] },
    ];
    const view = deriveSessionView(
      makeSnapshot({
        phase: "awaiting_evaluations",
        pending_requests: pending,
        observations: { "t0-r0": 0.5 },
      }),
    );
    expect(view.pendingCount).toBe(3);
    expect(view.observedCount).toBe(1);
    expect(view.remainingCount).toBe(2);
  });

  it("formats history rows for display", () => {
    const view = deriveSessionView(
      makeSnapshot({
        history: [
          {
            step: 1,
            strategy: { c: 300, s: 20 },
            spent: 540,
            incumbent: 0.6125,
            best_ei: 0.01,
            delta: { c: 100, s: 4 },
            sample_count: 20,
          },
        ],
      }),
    );
    expect(view.historyRows).toEqual([
      { step: 1, strategy: "(300, 20)", spent: 540, incumbent: 0.6125, delta: "(+100, +4)" },
    ]);
  });
});
