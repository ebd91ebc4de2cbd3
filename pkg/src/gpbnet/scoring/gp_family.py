"""GP family score: MAP marginal likelihood with a BIC-style penalty.

The hyperparameter integral is approximated by its maximizer (found by
conjugate-gradient ascent) and a complexity deduction of (K/2) ln M, where
K counts the free covariance parameters and M the rows the family was fit
on. Under the uniform-in-log hyperparameter prior, the prior density term
at the maximizer is a constant taken as zero.
"""

from __future__ import annotations

import numpy as np

from ..dataset import Dataset
from ..errors import DegenerateDataError, SchemaError
from ..optimize import optimize_hyperparameters
from .base import GP, FamilyKey, FamilyScore, ScoreConfig


def _continuous_slice(data: Dataset, child: int, parents: tuple[int, ...]):
    for j in (child, *parents):
        if data.columns[j].is_discrete:
            raise SchemaError(f"column {data.columns[j].name!r} is discrete")
    x = data.values[:, child]
    u = data.values[:, list(parents)].reshape(data.n_rows, len(parents))
    return x, u


def gp_family_score(
    child: int, parents, data: Dataset, config: ScoreConfig = ScoreConfig()
) -> FamilyScore:
    key = FamilyKey.make(child, parents)
    m = data.n_rows
    if m < config.min_samples:
        raise DegenerateDataError(
            f"family {key}: {m} rows < min_samples {config.min_samples}"
        )
    x, u = _continuous_slice(data, key.child, key.parents)
    theta, loglik = optimize_hyperparameters(x, u, config.gp)
    penalty = 0.5 * theta.n_free * np.log(m)
    return FamilyScore(
        key=key,
        log_score=loglik - penalty,
        fitted=theta,
        penalty_applied=penalty,
        scorer_id=GP,
    )
