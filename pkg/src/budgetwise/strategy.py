"""Discrete annotation-allocation lattice: costs, feasibility, Pareto fronts.

Everything here is a pure function over immutable values and is shared by
the optimizer, the simulation harness, and the advisor service.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class Strategy:
    """An allocation of `c` classification and `s` segmentation annotations."""

    c: int
    s: int

    def __post_init__(self) -> None:
        if self.c < 0 or self.s < 0:
            raise ValueError(f"strategy counts must be non-negative, got ({self.c}, {self.s})")

    def __add__(self, other: "Strategy") -> "Strategy":
        return Strategy(self.c + other.c, self.s + other.s)


@dataclass(frozen=True)
class CostModel:
    """Per-annotation costs and the total campaign budget.

    Costs are measured in class-label equivalents; typically
    ``alpha_s`` is much larger than ``alpha_c``.
    """

    alpha_c: float
    alpha_s: float
    budget: float

    def __post_init__(self) -> None:
        if self.alpha_c <= 0:
            raise ValueError(f"alpha_c must be positive, got {self.alpha_c}")
        if self.alpha_s <= 0:
            raise ValueError(f"alpha_s must be positive, got {self.alpha_s}")
        if self.budget <= 0:
            raise ValueError(f"budget must be positive, got {self.budget}")


@dataclass(frozen=True)
class ScoredPoint:
    """A strategy together with its cost and a value (score or acquisition)."""

    strategy: Strategy
    cost: float
    value: float


def cost(strategy: Strategy, model: CostModel) -> float:
    """Total annotation cost of a strategy: alpha_c*c + alpha_s*s."""
    return model.alpha_c * strategy.c + model.alpha_s * strategy.s


def is_feasible(strategy: Strategy, model: CostModel) -> bool:
    """True iff the strategy's cost does not exceed the budget (inclusive)."""
    return cost(strategy, model) <= model.budget


def enumerate_feasible(
    model: CostModel,
    stride_c: int = 1,
    stride_s: int = 1,
    origin: Strategy = Strategy(0, 0),
) -> list[Strategy]:
    """All feasible strategies on the sublattice origin + (i*stride_c, j*stride_s).

    Order is deterministic: row-major by s, then c ascending within a row.

    Raises:
        ValueError: if a stride is < 1 or the origin itself is infeasible.
    """
    if stride_c < 1 or stride_s < 1:
        raise ValueError(f"strides must be >= 1, got ({stride_c}, {stride_s})")
    if not is_feasible(origin, model):
        raise ValueError(
            f"origin ({origin.c}, {origin.s}) has cost {cost(origin, model)} "
            f"exceeding budget {model.budget}"
        )
    out: list[Strategy] = []
    s = origin.s
    while model.alpha_c * origin.c + model.alpha_s * s <= model.budget:
        remaining = model.budget - model.alpha_s * s - model.alpha_c * origin.c
        max_i = int(remaining // (model.alpha_c * stride_c))
        for i in range(max_i + 1):
            out.append(Strategy(origin.c + i * stride_c, s))
        s += stride_s
    return out


def pareto_front(points: list[ScoredPoint]) -> list[ScoredPoint]:
    """Non-dominated subset of (cost, value) points, as a strict staircase.

    A point p is dominated when another point has strictly smaller cost and
    greater-or-equal value, or equal cost and strictly greater value. The
    result is sorted by ascending cost with strictly ascending values; exact
    (cost, value) duplicates keep the lexicographically smallest (c, s).

    Raises:
        ValueError: on empty input.
    """
    if not points:
        raise ValueError("pareto_front requires at least one point")
    ordered = sorted(points, key=lambda p: (p.cost, -p.value, p.strategy.c, p.strategy.s))
    front: list[ScoredPoint] = []
    best = float("-inf")
    for p in ordered:
        if p.value > best:
            front.append(p)
            best = p.value
    return front
