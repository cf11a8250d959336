"""Adaptive budget allocation for mixed-annotation segmentation campaigns."""

from .strategy import CostModel, ScoredPoint, Strategy, cost, enumerate_feasible, is_feasible, pareto_front
from .gp import FittedGP, GPHyperparams, UtilitySample, fit, kernel, mean_prior, posterior, posterior_grid
from .acquisition import AcquisitionContext, best_expected_improvement, expected_improvement, next_installment
from .sampler import AnnotatedPool, SubsetPlan, build_utility_samples, draw_subset_plans, merge_samples
from .surfaces import (
    LogSurfaceParams,
    PerformanceSurface,
    SurfaceGrid,
    load_surface,
    noisy_evaluate,
    preset_surface,
    save_surface,
    spline_surface,
    synthetic_log_surface,
)
from .campaign import (
    CampaignConfig,
    CampaignTrajectory,
    GPConfig,
    SweepTask,
    relative_performance,
    run_adaptive,
    run_estimated_best_fixed,
    run_fixed,
    sweep,
)

__version__ = "0.1.0"
