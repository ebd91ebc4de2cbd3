"""Hybrid composition over discrete parent configurations, plus dispatch.

A continuous child with discrete parents is scored by partitioning the
rows on the joint discrete-parent configuration and summing the continuous
score over partitions. Standardization is global (the full column), never
re-fit per partition. Partitions too small for a conditional fit fall back
to the child-marginal score, and below that to the standard-normal log
density of the (standardized) child values, so the total stays defined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from ..dataset import Dataset
from ..errors import SchemaError
from .base import GP, KERNEL, LINEAR_GAUSSIAN, FamilyKey, FamilyScore, ScoreConfig
from .discrete import discrete_family_score
from .gp_family import gp_family_score
from .kernel import kernel_family_score
from .linear_gaussian import linear_gaussian_family_score

_LOG_2PI = np.log(2.0 * np.pi)


class _GpAdapter:
    scorer_id = GP

    def __init__(self, config: ScoreConfig):
        self.config = config

    def min_rows(self, n_parents: int) -> int:
        return self.config.min_samples

    def score(self, child, parents, data):
        return gp_family_score(child, parents, data, self.config)


class _LinearGaussianAdapter:
    scorer_id = LINEAR_GAUSSIAN

    def __init__(self, config: ScoreConfig):
        self.config = config

    def min_rows(self, n_parents: int) -> int:
        return n_parents + 2

    def score(self, child, parents, data):
        return linear_gaussian_family_score(child, parents, data, self.config)


class _KernelAdapter:
    scorer_id = KERNEL

    def __init__(self, config: ScoreConfig):
        self.config = config

    def min_rows(self, n_parents: int) -> int:
        return 3

    def score(self, child, parents, data):
        return kernel_family_score(child, parents, data, self.config)


_ADAPTERS = {GP: _GpAdapter, LINEAR_GAUSSIAN: _LinearGaussianAdapter, KERNEL: _KernelAdapter}

CONTINUOUS_METHODS = tuple(_ADAPTERS)


def continuous_scorer(method: str, config: ScoreConfig):
    try:
        return _ADAPTERS[method](config)
    except KeyError:
        raise SchemaError(f"unknown continuous scoring method {method!r}") from None


@dataclass(frozen=True)
class HybridPart:
    mode: str  # "conditional" | "marginal" | "normal"
    n_rows: int
    fitted: Any = None


@dataclass(frozen=True)
class HybridFit:
    cont_parents: tuple[int, ...]
    disc_parents: tuple[int, ...]
    bandwidth_floor_engaged: bool = False
    parts: dict = None  # parent-configuration tuple -> HybridPart

    def __post_init__(self):
        object.__setattr__(self, "parts", dict(self.parts or {}))


def _partition_rows(data: Dataset, disc_parents: tuple[int, ...]):
    configs = data.values[:, list(disc_parents)].astype(int)
    groups: dict[tuple, list[int]] = {}
    for i, cfg in enumerate(map(tuple, configs)):
        groups.setdefault(cfg, []).append(i)
    return dict(sorted(groups.items()))


def hybrid_family_score(
    child: int,
    cont_parents,
    disc_parents,
    data: Dataset,
    scorer,
    config: ScoreConfig = ScoreConfig(),
) -> FamilyScore:
    cont_parents = tuple(sorted(int(p) for p in cont_parents))
    disc_parents = tuple(sorted(int(p) for p in disc_parents))
    if data.columns[child].is_discrete:
        raise SchemaError("hybrid scoring requires a continuous child")
    for j in disc_parents:
        if not data.columns[j].is_discrete:
            raise SchemaError(f"column {data.columns[j].name!r} is not discrete")
    key = FamilyKey.make(child, cont_parents + disc_parents)
    if not disc_parents:
        return scorer.score(child, cont_parents, data)

    total = 0.0
    penalty = 0.0
    parts: dict[tuple, HybridPart] = {}
    for cfg, rows in _partition_rows(data, disc_parents).items():
        sub = data.take_rows(rows)
        if len(rows) >= max(config.min_samples, scorer.min_rows(len(cont_parents))):
            piece = scorer.score(child, cont_parents, sub)
            parts[cfg] = HybridPart("conditional", len(rows), piece.fitted)
        elif len(rows) >= scorer.min_rows(0):
            piece = scorer.score(child, (), sub)
            parts[cfg] = HybridPart("marginal", len(rows), piece.fitted)
        else:
            x = sub.values[:, child]
            value = float(np.sum(-0.5 * _LOG_2PI - 0.5 * x**2))
            parts[cfg] = HybridPart("normal", len(rows))
            total += value
            continue
        total += piece.log_score
        penalty += piece.penalty_applied
    return FamilyScore(
        key=key,
        log_score=total,
        fitted=HybridFit(cont_parents, disc_parents, parts=parts),
        penalty_applied=penalty,
        scorer_id=scorer.scorer_id,
    )


class Scorer:
    """Binds a scoring method and config; dispatches per family kind.

    Discrete children route to the Dirichlet-multinomial score (discrete
    parents only); continuous children with discrete parents route through
    hybrid composition.
    """

    def __init__(self, method: str, config: ScoreConfig = ScoreConfig()):
        if method not in _ADAPTERS:
            raise SchemaError(f"unknown scoring method {method!r}")
        self.method = method
        self.config = config
        self._continuous = continuous_scorer(method, config)

    @property
    def scorer_id(self) -> str:
        return self.method

    def score(self, data: Dataset, child: int, parents) -> FamilyScore:
        parents = tuple(sorted(int(p) for p in parents))
        if data.columns[child].is_discrete:
            for p in parents:
                if not data.columns[p].is_discrete:
                    raise SchemaError(
                        f"discrete child {data.columns[child].name!r} cannot have "
                        f"continuous parent {data.columns[p].name!r}"
                    )
            return discrete_family_score(child, parents, data, self.config)
        disc = tuple(p for p in parents if data.columns[p].is_discrete)
        cont = tuple(p for p in parents if not data.columns[p].is_discrete)
        return hybrid_family_score(child, cont, disc, data, self._continuous, self.config)

    def bind(self, data: Dataset) -> "BoundScorer":
        return BoundScorer(self, data)


class BoundScorer:
    """A scorer fixed to one dataset, keyable by FamilyKey (for caches)."""

    def __init__(self, scorer: Scorer, data: Dataset):
        self.scorer = scorer
        self.data = data

    @property
    def scorer_id(self) -> str:
        return self.scorer.scorer_id

    def score_key(self, key: FamilyKey) -> FamilyScore:
        return self.scorer.score(self.data, key.child, key.parents)
