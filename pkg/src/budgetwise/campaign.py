"""Campaign runners: the adaptive installment loop, fixed baselines, sweeps.

A campaign simulates an annotation effort against a performance surface:
annotate, evaluate subsamples, fit the GP, pick the next installment,
repeat for a fixed number of steps.
"""
from __future__ import annotations

import statistics
from dataclasses import dataclass, field, replace
from typing import Any, Iterable

import numpy as np

from . import gp as gpmod
from .acquisition import AcquisitionContext, acquisition_front, next_installment
from .gp import FittedGP, GPHyperparams, UtilitySample
from .sampler import EMPTY_POOL, build_utility_samples, grow_pool, merge_samples
from .strategy import CostModel, Strategy, cost
from .surfaces import PerformanceSurface, noisy_evaluate

FIXED_SPLITS = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))  # 0.50 .. 0.95

# Stream indices for per-iteration seed derivation.
_STREAM_SAMPLER = 0
_STREAM_NOISE = 1
_STREAM_GP = 2


@dataclass(frozen=True)
class GPConfig:
    learning_rate: float = 0.1
    iterations: int = 200


@dataclass(frozen=True)
class CampaignConfig:
    cost_model: CostModel
    initial_strategy: Strategy
    total_steps: int = 8
    m_count: int = 20
    gp: GPConfig = field(default_factory=GPConfig)
    noise_std: float = 0.005
    strides: tuple[int, int] = (1, 1)
    rng_seed: int = 0
    spend_remainder: bool = False
    weighted_sampling: bool = False

    def __post_init__(self) -> None:
        if self.total_steps < 1:
            raise ValueError(f"total_steps must be >= 1, got {self.total_steps}")
        if self.m_count < 1:
            raise ValueError(f"m_count must be >= 1, got {self.m_count}")
        if cost(self.initial_strategy, self.cost_model) > self.cost_model.budget:
            raise ValueError(
                f"initial strategy ({self.initial_strategy.c}, {self.initial_strategy.s}) "
                f"exceeds budget {self.cost_model.budget}"
            )


@dataclass(frozen=True)
class IterationRecord:
    step: int
    strategy: Strategy
    spent: float
    incumbent: float
    best_ei: float
    delta: tuple[int, int]
    hyperparams: dict[str, float]
    sample_count: int


@dataclass(frozen=True)
class CampaignTrajectory:
    method: str
    iterations: tuple[IterationRecord, ...]
    final_strategy: Strategy
    final_score: float
    spent: float
    truncated: bool

    def to_json(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "iterations": [
                {
                    "step": rec.step,
                    "strategy": {"c": rec.strategy.c, "s": rec.strategy.s},
                    "spent": rec.spent,
                    "incumbent": rec.incumbent,
                    "best_ei": rec.best_ei,
                    "delta": {"c": rec.delta[0], "s": rec.delta[1]},
                    "hyperparams": rec.hyperparams,
                    "sample_count": rec.sample_count,
                }
                for rec in self.iterations
            ],
            "final_strategy": {"c": self.final_strategy.c, "s": self.final_strategy.s},
            "final_score": self.final_score,
            "spent": self.spent,
            "truncated": self.truncated,
        }


class CampaignError(RuntimeError):
    """A campaign failed mid-run; carries the trajectory collected so far."""

    def __init__(self, message: str, partial: list[IterationRecord]):
        super().__init__(message)
        self.partial = tuple(partial)


def derive_seed(master_seed: int, step: int, stream: int) -> int:
    """Deterministic per-(iteration, stream) seed fan-out from a master seed."""
    ss = np.random.SeedSequence(master_seed % 2**63, spawn_key=(step, stream))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _cap_to_pool(
    strategy: Strategy, surface: PerformanceSurface
) -> tuple[Strategy, bool]:
    c = min(strategy.c, surface.max_c)
    s = min(strategy.s, surface.max_s)
    return Strategy(c, s), (c, s) != (strategy.c, strategy.s)


def run_adaptive(config: CampaignConfig, oracle: PerformanceSurface) -> CampaignTrajectory:
    """Adaptive installment loop: annotate, sample, fit, select, advance."""
    model = config.cost_model
    budget = model.budget
    pool = EMPTY_POOL
    samples: list[UtilitySample] = []
    hyperparams: GPHyperparams | None = None
    records: list[IterationRecord] = []
    truncated = False
    delta = (config.initial_strategy.c, config.initial_strategy.s)

    for t in range(config.total_steps):
        target = Strategy(pool.strategy.c + delta[0], pool.strategy.s + delta[1])
        capped, was_capped = _cap_to_pool(target, oracle)
        truncated = truncated or was_capped
        pool = grow_pool(pool, capped.c - pool.strategy.c, capped.s - pool.strategy.s)
        current = pool.strategy
        spent = cost(current, model)
        if spent > budget + 1e-9:
            raise CampaignError(
                f"spend {spent} exceeds budget {budget} at step {t}", records
            )

        noise_seed = derive_seed(config.rng_seed, t, _STREAM_NOISE)
        evaluator = lambda sub_c, sub_s: noisy_evaluate(  # noqa: E731
            oracle, len(sub_c), len(sub_s), config.noise_std, noise_seed
        )
        new_samples = build_utility_samples(
            pool,
            evaluator,
            config.m_count,
            derive_seed(config.rng_seed, t, _STREAM_SAMPLER),
            weighted=config.weighted_sampling,
        )
        samples = merge_samples(samples, new_samples)
        incumbent = new_samples[0].score

        init = hyperparams if hyperparams is not None else gpmod.initial_hyperparams(samples)
        try:
            fitted = gpmod.fit(
                samples,
                init,
                learning_rate=config.gp.learning_rate,
                iterations=config.gp.iterations,
                seed=derive_seed(config.rng_seed, t, _STREAM_GP),
            )
        except gpmod.GPFitError as exc:
            raise CampaignError(str(exc), records) from exc
        hyperparams = fitted.hyperparams

        ctx = AcquisitionContext(
            gp=fitted,
            incumbent=incumbent,
            cost_model=model,
            current=current,
            total_steps=config.total_steps,
            step=t,
        )
        front = acquisition_front(ctx, config.strides)
        best_ei = front[-1].value
        if config.spend_remainder and t == config.total_steps - 1:
            chosen = front[-1].strategy
            delta = (chosen.c - current.c, chosen.s - current.s)
        else:
            delta = next_installment(ctx, config.strides)

        records.append(
            IterationRecord(
                step=t,
                strategy=current,
                spent=spent,
                incumbent=incumbent,
                best_ei=best_ei,
                delta=delta,
                hyperparams=hyperparams.to_dict(),
                sample_count=len(samples),
            )
        )

    final_target = Strategy(pool.strategy.c + delta[0], pool.strategy.s + delta[1])
    final_strategy, was_capped = _cap_to_pool(final_target, oracle)
    truncated = truncated or was_capped
    final_spent = cost(final_strategy, model)
    assert final_spent <= budget + 1e-9
    return CampaignTrajectory(
        method="adaptive",
        iterations=tuple(records),
        final_strategy=final_strategy,
        final_score=oracle.evaluate(final_strategy.c, final_strategy.s),
        spent=final_spent,
        truncated=truncated,
    )


def fixed_split_strategy(split_fraction: float, model: CostModel) -> Strategy:
    """Spend `split_fraction` of the budget on segmentation, rest on classification."""
    s = int(split_fraction * model.budget // model.alpha_s)
    c = int((model.budget - model.alpha_s * s) // model.alpha_c)
    return Strategy(c, s)


def run_fixed(
    split_fraction: float, config: CampaignConfig, oracle: PerformanceSurface
) -> CampaignTrajectory:
    """One-shot baseline allocating the whole budget at a fixed split."""
    target = fixed_split_strategy(split_fraction, config.cost_model)
    final, truncated = _cap_to_pool(target, oracle)
    return CampaignTrajectory(
        method=f"fixed-{split_fraction:.2f}",
        iterations=(),
        final_strategy=final,
        final_score=oracle.evaluate(final.c, final.s),
        spent=cost(final, config.cost_model),
        truncated=truncated,
    )


def run_estimated_best_fixed(
    config: CampaignConfig, oracle: PerformanceSurface
) -> CampaignTrajectory:
    """Pick the best fixed split at the initial budget, then commit to it.

    Splits are scored on the oracle at budget B0 = cost of the initial
    strategy; ties go to the higher segmentation fraction.
    """
    b0 = cost(config.initial_strategy, config.cost_model)
    small_model = replace(config.cost_model, budget=b0)
    best_split = None
    best_score = float("-inf")
    for split in FIXED_SPLITS:
        probe, _ = _cap_to_pool(fixed_split_strategy(split, small_model), oracle)
        score = oracle.evaluate(probe.c, probe.s)
        if score >= best_score:  # later splits are higher-segmentation
            best_score = score
            best_split = split
    traj = run_fixed(best_split, config, oracle)
    return replace(traj, method="estimated-best-fixed")


@dataclass(frozen=True)
class SweepTask:
    method: str  # "adaptive", "fixed-<split>", or "estimated-best-fixed"
    config: CampaignConfig
    oracle: PerformanceSurface
    seeds: tuple[int, ...]


RESULT_COLUMNS = (
    "method",
    "surface",
    "alpha_c",
    "alpha_s",
    "budget",
    "steps",
    "seed",
    "final_c",
    "final_s",
    "spent",
    "final_score",
    "relative_score",
    "truncated",
    "error",
)


def relative_performance(score: float, full_supervision_score: float) -> float:
    """Score as a percentage of the fully supervised score."""
    if full_supervision_score == 0:
        raise ValueError("full supervision score must be non-zero")
    return 100.0 * score / full_supervision_score


def _run_task(method: str, config: CampaignConfig, oracle: PerformanceSurface) -> CampaignTrajectory:
    if method == "adaptive":
        return run_adaptive(config, oracle)
    if method == "estimated-best-fixed":
        return run_estimated_best_fixed(config, oracle)
    if method.startswith("fixed-"):
        return run_fixed(float(method.removeprefix("fixed-")), config, oracle)
    raise ValueError(f"unknown method {method!r}")


def run_one(task: SweepTask, seed: int, collect_trajectory: bool = False) -> dict[str, Any]:
    """Run a single (method, seed) pair into a result row; never raises.

    With `collect_trajectory` the row carries the trajectory JSON under the
    private key "_trajectory" (stripped before CSV output).
    """
    config = replace(task.config, rng_seed=seed)
    model = config.cost_model
    row: dict[str, Any] = {
        "method": task.method,
        "surface": task.oracle.name,
        "alpha_c": model.alpha_c,
        "alpha_s": model.alpha_s,
        "budget": model.budget,
        "steps": config.total_steps,
        "seed": seed,
        "final_c": "",
        "final_s": "",
        "spent": "",
        "final_score": "",
        "relative_score": "",
        "truncated": "",
        "error": "",
    }
    try:
        traj = _run_task(task.method, config, task.oracle)
        full = task.oracle.evaluate(task.oracle.max_c, task.oracle.max_s)
        row.update(
            final_c=traj.final_strategy.c,
            final_s=traj.final_strategy.s,
            spent=traj.spent,
            final_score=traj.final_score,
            relative_score=relative_performance(traj.final_score, full) if full > 0 else "",
            truncated=traj.truncated,
        )
        if collect_trajectory:
            row["_trajectory"] = traj.to_json()
    except Exception as exc:  # failures become rows, never abort the sweep
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep(
    tasks: Iterable[SweepTask], jobs: int = 1, collect_trajectories: bool = False
) -> list[dict[str, Any]]:
    """Run every (task, seed) pair; ordering is by task then seed, not completion."""
    pairs = [(task, seed) for task in tasks for seed in task.seeds]
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda p: run_one(p[0], p[1], collect_trajectories), pairs))
    else:
        rows = [run_one(task, seed, collect_trajectories) for task, seed in pairs]
    return rows


def aggregate(rows: list[dict[str, Any]]) -> list[dict[str, Any]]:
    """Mean and population std of final_score per (method, surface, alpha_s, budget)."""
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        if row["error"] or row["final_score"] == "":
            continue
        key = (row["method"], row["surface"], row["alpha_s"], row["budget"])
        groups.setdefault(key, []).append(float(row["final_score"]))
    out = []
    for (method, surface, alpha_s, budget), scores in sorted(groups.items()):
        out.append(
            {
                "method": method,
                "surface": surface,
                "alpha_s": alpha_s,
                "budget": budget,
                "runs": len(scores),
                "mean_score": statistics.fmean(scores),
                "std_score": statistics.pstdev(scores),
            }
        )
    return out
