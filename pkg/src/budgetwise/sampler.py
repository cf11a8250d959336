"""Utility-sample construction by subsampling the annotated pools.

The first sample always uses the full pool; the remaining draws pick a
random sub-strategy and materialize concrete subset identities so that a
human advisor can be told exactly which items to train on.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .gp import UtilitySample
from .strategy import Strategy

# Maps (classification subset, segmentation subset) to a score in [0, 1].
SubsetEvaluator = Callable[[Sequence[str], Sequence[str]], float]


@dataclass(frozen=True)
class AnnotatedPool:
    classification_ids: tuple[str, ...]
    segmentation_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.classification_ids)) != len(self.classification_ids):
            raise ValueError("duplicate classification ids in pool")
        if len(set(self.segmentation_ids)) != len(self.segmentation_ids):
            raise ValueError("duplicate segmentation ids in pool")

    @property
    def strategy(self) -> Strategy:
        return Strategy(len(self.classification_ids), len(self.segmentation_ids))


EMPTY_POOL = AnnotatedPool((), ())


def grow_pool(pool: AnnotatedPool, delta_c: int, delta_s: int) -> AnnotatedPool:
    """Extend the pool with `delta_c` / `delta_s` fresh sequential ids."""
    nc, ns = len(pool.classification_ids), len(pool.segmentation_ids)
    new_c = tuple(f"c{nc + i + 1}" for i in range(delta_c))
    new_s = tuple(f"s{ns + i + 1}" for i in range(delta_s))
    return AnnotatedPool(pool.classification_ids + new_c, pool.segmentation_ids + new_s)


@dataclass(frozen=True)
class SubsetPlan:
    """A sub-strategy together with the concrete subset to train on."""

    strategy: Strategy
    classification_subset: tuple[str, ...]
    segmentation_subset: tuple[str, ...]


def draw_subset_plans(
    pool: AnnotatedPool,
    m_count: int,
    rng_seed: int,
    weighted: bool = False,
) -> list[SubsetPlan]:
    """Plan `m_count` training subsets; the first covers the whole pool.

    Sub-strategies are drawn uniformly from [0, C] x [0, S]. With
    `weighted`, draws are instead proportional to the Euclidean norm of
    (C', S'), biasing toward larger subsets. Deterministic given the seed.
    """
    if m_count < 1:
        raise ValueError(f"m_count must be >= 1, got {m_count}")
    big_c = len(pool.classification_ids)
    big_s = len(pool.segmentation_ids)
    if big_c == 0 and big_s == 0:
        raise ValueError("pool is empty in both modalities")
    rng = np.random.default_rng(rng_seed)
    plans = [SubsetPlan(pool.strategy, pool.classification_ids, pool.segmentation_ids)]
    norm_max = float(np.hypot(big_c, big_s))
    for _ in range(m_count - 1):
        while True:
            cp = int(rng.integers(0, big_c + 1))
            sp = int(rng.integers(0, big_s + 1))
            if not weighted:
                break
            # Rejection sampling against the norm envelope.
            if rng.random() * norm_max <= float(np.hypot(cp, sp)):
                break
        sub_c = tuple(
            pool.classification_ids[i]
            for i in rng.choice(big_c, size=cp, replace=False)
        ) if big_c else ()
        sub_s = tuple(
            pool.segmentation_ids[i]
            for i in rng.choice(big_s, size=sp, replace=False)
        ) if big_s else ()
        plans.append(SubsetPlan(Strategy(cp, sp), sub_c, sub_s))
    return plans


def build_utility_samples(
    pool: AnnotatedPool,
    evaluator: SubsetEvaluator,
    m_count: int,
    rng_seed: int,
    weighted: bool = False,
) -> list[UtilitySample]:
    """Evaluate planned subsets into GP training samples.

    The first returned sample is always the full-pool evaluation.
    """
    plans = draw_subset_plans(pool, m_count, rng_seed, weighted=weighted)
    return [
        UtilitySample(
            strategy=plan.strategy,
            score=evaluator(plan.classification_subset, plan.segmentation_subset),
        )
        for plan in plans
    ]


def merge_samples(
    existing: list[UtilitySample], new: list[UtilitySample]
) -> list[UtilitySample]:
    """Order-preserving multiset union; duplicates are retained."""
    return list(existing) + list(new)
