"""Expected improvement and constrained strategy selection on the Pareto front.

Two selection problems are solved over the same candidate set: the best
expected improvement reachable with the full budget, and the cheapest
strategy whose expected improvement clears a per-step threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .gp import FittedGP, posterior_grid
from .strategy import CostModel, ScoredPoint, Strategy, cost, enumerate_feasible, pareto_front


@dataclass(frozen=True)
class AcquisitionContext:
    gp: FittedGP
    incumbent: float
    cost_model: CostModel
    current: Strategy
    total_steps: int
    step: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.incumbent <= 1.0:
            raise ValueError(f"incumbent must lie in [0, 1], got {self.incumbent}")
        if not 0 <= self.step < self.total_steps:
            raise ValueError(f"step {self.step} out of range for total_steps {self.total_steps}")


def expected_improvement(mean: float, variance: float, incumbent: float) -> float:
    """Closed-form EI of a Gaussian (mean, variance) over the incumbent.

    At zero variance this is the continuity limit max(mean - incumbent, 0).
    """
    if variance < 0:
        raise ValueError(f"variance must be non-negative, got {variance}")
    s = math.sqrt(variance)
    diff = mean - incumbent
    if s == 0.0:
        return max(diff, 0.0)
    z = diff / s
    cdf = 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
    pdf = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    return max(diff * cdf + s * pdf, 0.0)


def _expected_improvement_vec(
    means: np.ndarray, variances: np.ndarray, incumbent: float
) -> np.ndarray:
    s = np.sqrt(np.maximum(variances, 0.0))
    diff = means - incumbent
    out = np.maximum(diff, 0.0)
    pos = s > 0.0
    z = np.where(pos, diff / np.where(pos, s, 1.0), 0.0)
    cdf = 0.5 * (1.0 + erf(z / math.sqrt(2.0)))
    pdf = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    out = np.where(pos, np.maximum(diff * cdf + s * pdf, 0.0), out)
    return out


def acquisition_front(
    ctx: AcquisitionContext, strides: tuple[int, int] = (1, 1)
) -> list[ScoredPoint]:
    """Pareto front of (cost, EI) over feasible strategies >= current.

    Annotation counts never shrink, so candidates are restricted to the
    quadrant at or above the current strategy.
    """
    candidates = enumerate_feasible(
        ctx.cost_model, strides[0], strides[1], origin=ctx.current
    )
    if not candidates:
        raise ValueError("no feasible strategy dominates or equals the current one")
    means, variances = posterior_grid(ctx.gp, candidates)
    ei = _expected_improvement_vec(means, variances, ctx.incumbent)
    points = [
        ScoredPoint(strategy=cand, cost=cost(cand, ctx.cost_model), value=float(e))
        for cand, e in zip(candidates, ei)
    ]
    return pareto_front(points)


def best_expected_improvement(
    ctx: AcquisitionContext, strides: tuple[int, int] = (1, 1)
) -> tuple[Strategy, float]:
    """Max-EI feasible strategy at or above current; ties go to the cheapest."""
    front = acquisition_front(ctx, strides)
    best = front[-1]
    return best.strategy, best.value


def next_installment(
    ctx: AcquisitionContext, strides: tuple[int, int] = (1, 1)
) -> tuple[int, int]:
    """Cheapest increment whose EI reaches the per-step threshold.

    The threshold is best-EI / (total_steps - step). Walks the Pareto front
    in ascending cost; if no point clears the threshold (stride artifacts,
    numerics) falls back to the max-EI point.
    """
    front = acquisition_front(ctx, strides)
    u_star = front[-1].value
    theta = u_star / (ctx.total_steps - ctx.step)
    chosen = front[-1]
    for p in front:
        if p.value >= theta - 1e-15:
            chosen = p
            break
    return chosen.strategy.c - ctx.current.c, chosen.strategy.s - ctx.current.s
