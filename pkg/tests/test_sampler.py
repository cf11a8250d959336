import numpy as np
import pytest
from scipy.stats import chisquare

from budgetwise.gp import UtilitySample
from budgetwise.sampler import (
    AnnotatedPool,
    build_utility_samples,
    draw_subset_plans,
    grow_pool,
    merge_samples,
)
from budgetwise.strategy import Strategy


def _pool(nc, ns):
    return AnnotatedPool(
        tuple(f"c{i}" for i in range(nc)),
        tuple(f"s{i}" for i in range(ns)),
    )


def _count_evaluator(surface_fn):
    return lambda sub_c, sub_s: surface_fn(len(sub_c), len(sub_s))


class TestBuildUtilitySamples:
    def test_m_count_one_gives_only_full_sample(self):
        pool = _pool(4, 3)
        out = build_utility_samples(pool, _count_evaluator(lambda c, s: 0.5), 1, rng_seed=0)
        assert out == [UtilitySample(Strategy(4, 3), 0.5)]

    def test_empty_classification_pool(self):
        pool = _pool(0, 5)
        out = build_utility_samples(pool, _count_evaluator(lambda c, s: s / 10), 20, rng_seed=1)
        assert all(sample.strategy.c == 0 for sample in out)

    def test_oracle_pass_through(self):
        pool = _pool(10, 10)
        fn = lambda c, s: (c + 2 * s) / 40
        out = build_utility_samples(pool, _count_evaluator(fn), 50, rng_seed=2)
        for sample in out:
            assert sample.score == pytest.approx(fn(sample.strategy.c, sample.strategy.s))

    def test_full_sample_first_and_bounds(self):
        pool = _pool(7, 9)
        out = build_utility_samples(pool, _count_evaluator(lambda c, s: 0.3), 30, rng_seed=3)
        assert out[0].strategy == Strategy(7, 9)
        for sample in out:
            assert 0 <= sample.strategy.c <= 7
            assert 0 <= sample.strategy.s <= 9

    def test_deterministic_including_subsets(self):
        pool = _pool(12, 6)
        a = draw_subset_plans(pool, 15, rng_seed=42)
        b = draw_subset_plans(pool, 15, rng_seed=42)
        assert a == b
        c = draw_subset_plans(pool, 15, rng_seed=43)
        assert a != c

    def test_invalid_m_count(self):
        with pytest.raises(ValueError, match="m_count"):
            build_utility_samples(_pool(2, 2), _count_evaluator(lambda c, s: 0.5), 0, 0)

    def test_empty_pool_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            draw_subset_plans(_pool(0, 0), 5, 0)

    def test_uniform_marginal_distribution(self):
        pool = _pool(9, 2)
        plans = draw_subset_plans(pool, 10_001, rng_seed=7)
        counts = np.bincount([p.strategy.c for p in plans[1:]], minlength=10)
        _, pvalue = chisquare(counts)
        assert pvalue > 0.001

    def test_weighted_mode_biases_upward(self):
        pool = _pool(50, 0)
        uniform = draw_subset_plans(pool, 4001, rng_seed=5)
        weighted = draw_subset_plans(pool, 4001, rng_seed=5, weighted=True)
        mean_u = np.mean([p.strategy.c for p in uniform[1:]])
        mean_w = np.mean([p.strategy.c for p in weighted[1:]])
        assert mean_w > mean_u + 3

    def test_subsets_have_stated_sizes_and_unique_ids(self):
        pool = _pool(20, 10)
        for plan in draw_subset_plans(pool, 25, rng_seed=9):
            assert len(plan.classification_subset) == plan.strategy.c
            assert len(plan.segmentation_subset) == plan.strategy.s
            assert len(set(plan.classification_subset)) == plan.strategy.c
            assert set(plan.classification_subset) <= set(pool.classification_ids)


class TestMergeSamples:
    def test_identities(self):
        x = [UtilitySample(Strategy(1, 1), 0.5)]
        assert merge_samples([], x) == x
        assert merge_samples(x, []) == x

    def test_concatenation_preserves_order_and_duplicates(self):
        a = [UtilitySample(Strategy(i, 0), 0.1 * i) for i in range(3)]
        b = [UtilitySample(Strategy(0, j), 0.1 * j) for j in range(4)]
        merged = merge_samples(a, b)
        assert merged == a + b
        assert len(a) == 3 and len(b) == 4  # originals untouched
        again = merge_samples(merged, a)
        assert len(again) == 10


class TestGrowPool:
    def test_sequential_ids(self):
        pool = grow_pool(_pool(2, 1), 2, 3)
        assert pool.classification_ids == ("c0", "c1", "c3", "c4")
        assert pool.segmentation_ids == ("s0", "s2", "s3", "s4")
        assert pool.strategy == Strategy(4, 4)

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            AnnotatedPool(("a", "a"), ())
