"""Family-score types, configuration, and the memoizing score cache.

A family is one child variable plus a parent set; decomposable scores make
the total network score a sum of family scores, so families are the unit
of caching and reuse across candidate graphs.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from ..errors import SchemaError
from ..optimize import GpOptimizerConfig

GP = "gp"
LINEAR_GAUSSIAN = "linear_gaussian"
KERNEL = "kernel"
DISCRETE = "discrete"

SCORER_IDS = (GP, LINEAR_GAUSSIAN, KERNEL, DISCRETE)


@dataclass(frozen=True)
class FamilyKey:
    child: int
    parents: tuple[int, ...]

    @classmethod
    def make(cls, child: int, parents) -> "FamilyKey":
        parents = tuple(sorted(int(p) for p in parents))
        if len(set(parents)) != len(parents):
            raise SchemaError("duplicate parents")
        if child in parents:
            raise SchemaError("child cannot be its own parent")
        return cls(int(child), parents)


@dataclass(frozen=True)
class FamilyScore:
    key: FamilyKey
    log_score: float
    fitted: Any
    penalty_applied: float
    scorer_id: str

    def __post_init__(self):
        if not np.isfinite(self.log_score):
            raise SchemaError(f"non-finite log score for family {self.key}")
        if self.penalty_applied < 0:
            raise SchemaError("penalty must be non-negative")


@dataclass(frozen=True)
class ScoreConfig:
    min_samples: int = 5  # floor for conditional fits (GP and hybrid partitions)
    gp: GpOptimizerConfig = field(default_factory=GpOptimizerConfig)
    # linear-Gaussian conjugate prior: zero-mean coefficients with precision
    # g * I, inverse-gamma(a, b) on the noise variance
    lg_g: float = 0.1
    lg_a: float = 1.0
    lg_b: float = 1.0
    # kernel score: shared isotropic bandwidth searched on a log grid
    kernel_grid_min: float = 0.01
    kernel_grid_max: float = 10.0
    kernel_grid_points: int = 25
    kernel_bandwidth_floor: float = 0.05
    dirichlet_alpha: float = 1.0


class ScoreCache:
    """Memo of family scores per scorer; safe for concurrent use.

    Parameter modularity makes a family's score independent of the rest of
    the graph, so an entry stored once is valid for every graph that
    contains the family.
    """

    def __init__(self):
        self._store: dict[tuple[str, FamilyKey], FamilyScore] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._store)

    def get_or_compute(
        self, scorer_id: str, key: FamilyKey, compute: Callable[[], FamilyScore]
    ) -> FamilyScore:
        with self._lock:
            hit = self._store.get((scorer_id, key))
            if hit is not None:
                return hit
            value = compute()
            if value.key != key or value.scorer_id != scorer_id:
                raise SchemaError("computed score does not match the requested key")
            self._store[(scorer_id, key)] = value
            return value


def cache_get_or_compute(cache: ScoreCache, key: FamilyKey, scorer) -> FamilyScore:
    """Score ``key`` with ``scorer`` through the cache (at most one compute)."""
    return cache.get_or_compute(scorer.scorer_id, key, lambda: scorer.score_key(key))
