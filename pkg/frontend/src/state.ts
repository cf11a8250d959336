// Pure derivation of display state from a session snapshot. No requests,
// no DOM: everything here is a function of the last fetched snapshot.

import type { Phase, SessionSnapshot } from "./api.js";

export interface SessionView {
  id: string;
  phase: Phase;
  phaseLabel: string;
  step: number;
  totalSteps: number;
  strategy: { c: number; s: number };
  installment: { deltaC: number; deltaS: number };
  spent: number;
  budget: number;
  spentFraction: number;
  observedCount: number;
  pendingCount: number;
  remainingCount: number;
  canConfirm: boolean;
  canEnterScores: boolean;
  canAccept: boolean;
  isFinished: boolean;
  historyRows: Array<{
    step: number;
    strategy: string;
    spent: number;
    incumbent: number;
    delta: string;
  }>;
}

const PHASE_LABELS: Record<Phase, string> = {
  awaiting_annotation: "Awaiting annotation",
  awaiting_evaluations: "Awaiting evaluations",
  recommendation_ready: "Recommendation ready",
  finished: "Finished",
};

function clamp01(value: number): number {
  if (value < 0) return 0;
  if (value > 1) return 1;
  return value;
}

export function deriveSessionView(snapshot: SessionSnapshot): SessionView {
  const observedCount = Object.keys(snapshot.observations).length;
  const pendingCount = snapshot.pending_requests.length;
  return {
    id: snapshot.id,
    phase: snapshot.phase,
    phaseLabel: PHASE_LABELS[snapshot.phase] ?? snapshot.phase,
    step: snapshot.step,
    totalSteps: Number(snapshot.config.total_steps),
    strategy: { c: snapshot.strategy.c, s: snapshot.strategy.s },
    installment: {
      deltaC: snapshot.installment.delta_c,
      deltaS: snapshot.installment.delta_s,
    },
    spent: snapshot.spent,
    budget: snapshot.budget,
    spentFraction: snapshot.budget > 0 ? clamp01(snapshot.spent / snapshot.budget) : 0,
    observedCount,
    pendingCount,
    remainingCount: pendingCount - observedCount,
    canConfirm: snapshot.phase === "awaiting_annotation",
    canEnterScores: snapshot.phase === "awaiting_evaluations",
    canAccept: snapshot.phase === "recommendation_ready",
    isFinished: snapshot.phase === "finished",
    historyRows: snapshot.history.map((entry) => ({
      step: entry.step,
      strategy: `(${entry.strategy.c}, ${entry.strategy.s})`,
      spent: entry.spent,
      incumbent: entry.incumbent,
      delta: `(+${entry.delta.c}, +${entry.delta.s})`,
    })),
  };
}
