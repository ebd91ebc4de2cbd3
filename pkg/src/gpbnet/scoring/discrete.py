"""Dirichlet-multinomial score for discrete children with discrete parents."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from ..dataset import Dataset
from ..errors import SchemaError
from .base import DISCRETE, FamilyKey, FamilyScore, ScoreConfig


@dataclass(frozen=True)
class DiscreteFit:
    arity: int
    alpha: float
    counts: dict  # parent-configuration tuple -> length-arity count vector


def _discrete_slice(data: Dataset, child: int, parents: tuple[int, ...]):
    for j in (child, *parents):
        if not data.columns[j].is_discrete:
            raise SchemaError(f"column {data.columns[j].name!r} is continuous")
    x = data.values[:, child].astype(int)
    u = data.values[:, list(parents)].astype(int)
    return x, u


def _config_counts(x, u, arity):
    counts: dict[tuple, np.ndarray] = {}
    for value, cfg in zip(x, map(tuple, u)):
        if cfg not in counts:
            counts[cfg] = np.zeros(arity, dtype=int)
        counts[cfg][value] += 1
    return counts


def dirichlet_multinomial_log_ml(counts: np.ndarray, alpha: float) -> float:
    counts = np.asarray(counts, dtype=float)
    total_alpha = alpha * counts.size
    return float(
        gammaln(total_alpha)
        - gammaln(counts.sum() + total_alpha)
        + np.sum(gammaln(counts + alpha) - gammaln(alpha))
    )


def discrete_family_score(
    child: int, parents, data: Dataset, config: ScoreConfig = ScoreConfig()
) -> FamilyScore:
    key = FamilyKey.make(child, parents)
    x, u = _discrete_slice(data, key.child, key.parents)
    arity = data.columns[key.child].arity
    counts = _config_counts(x, u, arity)
    log_score = sum(dirichlet_multinomial_log_ml(c, config.dirichlet_alpha) for c in counts.values())
    return FamilyScore(
        key=key,
        log_score=float(log_score),
        fitted=DiscreteFit(arity=arity, alpha=config.dirichlet_alpha, counts=counts),
        penalty_applied=0.0,
        scorer_id=DISCRETE,
    )


def discrete_log_probability(fit: DiscreteFit, value: int, parent_config: tuple) -> float:
    """Posterior-predictive log probability; unseen configurations are uniform."""
    counts = fit.counts.get(tuple(parent_config))
    if counts is None:
        counts = np.zeros(fit.arity)
    total = counts.sum() + fit.alpha * fit.arity
    return float(np.log((counts[int(value)] + fit.alpha) / total))
