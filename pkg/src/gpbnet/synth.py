"""Synthetic generators: noisy functional dependencies on a DAG.

Roots are i.i.d. standard normal. Each child sums one link function per
incoming arc and adds Gaussian noise whose standard deviation is
``noise_level`` times the empirical SD of the noise-free child signal, so
noise levels are directly expressed in dependent-variable SD units.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import CONTINUOUS, Column, Dataset
from .errors import SchemaError

LINK_KINDS = ("linear", "quadratic", "cubic", "sinusoidal")


def apply_link(kind: str, u: np.ndarray) -> np.ndarray:
    if kind == "linear":
        return u
    if kind == "quadratic":
        return u**2
    if kind == "cubic":
        # non-monotone region keeps the dependence only borderline invertible
        return u**3 - u
    if kind == "sinusoidal":
        return np.sin(2.5 * u)
    raise SchemaError(f"unknown link kind {kind!r}")


@dataclass(frozen=True)
class SynthEdge:
    parent: int
    child: int
    link: str = "linear"

    def __post_init__(self):
        if self.link not in LINK_KINDS:
            raise SchemaError(f"unknown link kind {self.link!r}")


@dataclass(frozen=True)
class SynthSpec:
    n: int
    edges: tuple[SynthEdge, ...] = field(default_factory=tuple)
    noise_level: float = 0.0
    n_samples: int = 100
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        if not np.isfinite(self.noise_level) or self.noise_level < 0:
            raise SchemaError("noise_level must be finite and >= 0")
        for e in self.edges:
            if not (0 <= e.parent < self.n and 0 <= e.child < self.n) or e.parent == e.child:
                raise SchemaError(f"bad edge {e}")

    def parent_edges(self, child: int) -> list[SynthEdge]:
        return [e for e in self.edges if e.child == child]

    def topological_order(self) -> list[int]:
        indeg = [0] * self.n
        for e in self.edges:
            indeg[e.child] += 1
        frontier = [v for v in range(self.n) if indeg[v] == 0]
        order = []
        while frontier:
            v = min(frontier)
            frontier.remove(v)
            order.append(v)
            for e in self.edges:
                if e.parent == v:
                    indeg[e.child] -= 1
                    if indeg[e.child] == 0:
                        frontier.append(e.child)
        if len(order) != self.n:
            raise SchemaError("edge set contains a directed cycle")
        return order


def synth_generate(spec: SynthSpec) -> Dataset:
    """Sample a dataset from the generator; deterministic given the seed."""
    rng = np.random.default_rng(spec.seed)
    m = spec.n_samples
    values = np.zeros((m, spec.n))
    for v in spec.topological_order():
        incoming = spec.parent_edges(v)
        if not incoming:
            values[:, v] = rng.standard_normal(m)
            continue
        clean = np.zeros(m)
        for e in incoming:
            clean += apply_link(e.link, values[:, e.parent])
        sd_clean = float(clean.std())
        values[:, v] = clean + rng.normal(0.0, spec.noise_level * sd_clean, m)
    columns = [Column(f"X{j}", CONTINUOUS) for j in range(spec.n)]
    return Dataset(columns, values)
