"""Decomposable family scores and held-out evaluation."""

from .base import (
    DISCRETE,
    GP,
    KERNEL,
    LINEAR_GAUSSIAN,
    FamilyKey,
    FamilyScore,
    ScoreCache,
    ScoreConfig,
    cache_get_or_compute,
)
from .discrete import DiscreteFit, discrete_family_score, discrete_log_probability
from .gp_family import gp_family_score
from .hybrid import (
    CONTINUOUS_METHODS,
    BoundScorer,
    HybridFit,
    HybridPart,
    Scorer,
    continuous_scorer,
    hybrid_family_score,
)
from .kernel import KernelFit, kernel_family_score, kernel_log_density, kernel_loo_objective
from .linear_gaussian import (
    LinearGaussianFit,
    linear_gaussian_family_score,
    linear_gaussian_log_density,
)
from .test_loss import family_test_log_loss

__all__ = [
    "DISCRETE",
    "GP",
    "KERNEL",
    "LINEAR_GAUSSIAN",
    "CONTINUOUS_METHODS",
    "BoundScorer",
    "DiscreteFit",
    "FamilyKey",
    "FamilyScore",
    "HybridFit",
    "HybridPart",
    "KernelFit",
    "LinearGaussianFit",
    "ScoreCache",
    "ScoreConfig",
    "Scorer",
    "cache_get_or_compute",
    "continuous_scorer",
    "discrete_family_score",
    "discrete_log_probability",
    "family_test_log_loss",
    "gp_family_score",
    "hybrid_family_score",
    "kernel_family_score",
    "kernel_log_density",
    "kernel_loo_objective",
    "linear_gaussian_family_score",
    "linear_gaussian_log_density",
]
