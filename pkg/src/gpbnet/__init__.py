"""Structure learning for continuous Bayesian networks with GP scores."""

from .covariance import (
    Hyperparameters,
    build_covariance_matrix,
    cholesky_with_jitter,
    eval_covariance,
)
from .dataset import (
    Column,
    Dataset,
    Standardization,
    load_delimited,
    save_delimited,
    split,
    standardize,
)
from .errors import (
    ConstantColumnError,
    DataFormatError,
    DegenerateDataError,
    GpbnetError,
    OptimizationError,
    SchemaError,
    SingularCovarianceError,
)
from .gp import (
    GpPosterior,
    PredictiveDensity,
    log_marginal_likelihood,
    log_marginal_likelihood_gradient,
    predict,
)
from .optimize import CgConfig, GpOptimizerConfig, cg_ascent, optimize_hyperparameters
from .pdag import Pdag, StructureDistance, structure_distance, to_pdag
from .scoring import (
    FamilyKey,
    FamilyScore,
    ScoreCache,
    ScoreConfig,
    Scorer,
    cache_get_or_compute,
    discrete_family_score,
    family_test_log_loss,
    gp_family_score,
    hybrid_family_score,
    kernel_family_score,
    linear_gaussian_family_score,
)
from .search import (
    Dag,
    Move,
    MoveRecord,
    SearchConfig,
    SearchTrace,
    hill_climb,
    is_acyclic,
    legal_moves,
    total_score,
)
from .synth import SynthEdge, SynthSpec, synth_generate

__version__ = "0.1.0"

__all__ = [
    "CgConfig",
    "Column",
    "ConstantColumnError",
    "Dag",
    "DataFormatError",
    "Dataset",
    "DegenerateDataError",
    "FamilyKey",
    "FamilyScore",
    "GpOptimizerConfig",
    "GpPosterior",
    "GpbnetError",
    "Hyperparameters",
    "Move",
    "MoveRecord",
    "OptimizationError",
    "Pdag",
    "PredictiveDensity",
    "SchemaError",
    "ScoreCache",
    "ScoreConfig",
    "Scorer",
    "SearchConfig",
    "SearchTrace",
    "SingularCovarianceError",
    "Standardization",
    "StructureDistance",
    "SynthEdge",
    "SynthSpec",
    "build_covariance_matrix",
    "cache_get_or_compute",
    "cg_ascent",
    "cholesky_with_jitter",
    "discrete_family_score",
    "eval_covariance",
    "family_test_log_loss",
    "gp_family_score",
    "hill_climb",
    "hybrid_family_score",
    "is_acyclic",
    "kernel_family_score",
    "legal_moves",
    "linear_gaussian_family_score",
    "load_delimited",
    "log_marginal_likelihood",
    "log_marginal_likelihood_gradient",
    "optimize_hyperparameters",
    "predict",
    "save_delimited",
    "split",
    "standardize",
    "structure_distance",
    "synth_generate",
    "to_pdag",
    "total_score",
]
