"""Greedy hill-climbing structure search over decomposable scores.

The hypothesis space is DAGs over the dataset's variables; one move adds,
deletes, or reverses a single arc. Score decomposability means a move only
changes the families of the touched children, so each candidate is priced
by one or two family evaluations served through the score cache. The
structure prior is uniform over families, contributing nothing to totals.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import GpbnetError, SchemaError
from .scoring import FamilyKey, ScoreCache, cache_get_or_compute

log = logging.getLogger(__name__)

ADD = "add"
DELETE = "delete"
REVERSE = "reverse"


@dataclass(frozen=True)
class Dag:
    n: int
    edges: frozenset

    @classmethod
    def empty(cls, n: int) -> "Dag":
        return cls(n, frozenset())

    @classmethod
    def from_edges(cls, n: int, edges) -> "Dag":
        edges = frozenset((int(p), int(c)) for p, c in edges)
        for p, c in edges:
            if p == c:
                raise SchemaError(f"self-loop on {p}")
            if not (0 <= p < n and 0 <= c < n):
                raise SchemaError(f"edge ({p},{c}) out of range for n={n}")
        return cls(n, edges)

    def parents_of(self, v: int) -> tuple[int, ...]:
        return tuple(sorted(p for p, c in self.edges if c == v))

    def has_edge(self, p: int, c: int) -> bool:
        return (p, c) in self.edges

    def adjacent(self, a: int, b: int) -> bool:
        return (a, b) in self.edges or (b, a) in self.edges

    def with_added(self, p: int, c: int) -> "Dag":
        return Dag(self.n, self.edges | {(p, c)})

    def with_deleted(self, p: int, c: int) -> "Dag":
        return Dag(self.n, self.edges - {(p, c)})

    def with_reversed(self, p: int, c: int) -> "Dag":
        return Dag(self.n, (self.edges - {(p, c)}) | {(c, p)})


def is_acyclic(dag: Dag) -> bool:
    """True iff the edge set admits a topological order (Kahn's algorithm)."""
    indeg = [0] * dag.n
    children: list[list[int]] = [[] for _ in range(dag.n)]
    for p, c in dag.edges:
        indeg[c] += 1
        children[p].append(c)
    frontier = [v for v in range(dag.n) if indeg[v] == 0]
    seen = 0
    while frontier:
        v = frontier.pop()
        seen += 1
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                frontier.append(c)
    return seen == dag.n


@dataclass(frozen=True)
class Move:
    kind: str  # ADD, DELETE, or REVERSE
    parent: int
    child: int

    def sort_key(self):
        return (self.kind, self.child, self.parent)


def apply_move(dag: Dag, move: Move) -> Dag:
    if move.kind == ADD:
        return dag.with_added(move.parent, move.child)
    if move.kind == DELETE:
        return dag.with_deleted(move.parent, move.child)
    if move.kind == REVERSE:
        return dag.with_reversed(move.parent, move.child)
    raise SchemaError(f"unknown move kind {move.kind!r}")


@dataclass(frozen=True)
class SearchConfig:
    max_parents: int = 3
    epsilon: float = 1e-9  # minimum gain to keep climbing
    restarts: int = 0  # extra climbs from seeded random DAGs
    restart_edge_prob: float = 0.25
    seed: int = 0
    start: Dag | None = None


def _arc_allowed(p: int, c: int, discrete: frozenset) -> bool:
    # discrete variables precede continuous ones: a discrete child may not
    # have a continuous parent
    return not (c in discrete and p not in discrete)


def legal_moves(dag: Dag, config: SearchConfig, discrete: frozenset = frozenset()) -> list[Move]:
    """All single-arc changes yielding a valid DAG, in deterministic order."""
    moves = []
    counts = [0] * dag.n
    for _, c in dag.edges:
        counts[c] += 1
    for p in range(dag.n):
        for c in range(dag.n):
            if p == c or dag.adjacent(p, c):
                continue
            if counts[c] >= config.max_parents or not _arc_allowed(p, c, discrete):
                continue
            if is_acyclic(dag.with_added(p, c)):
                moves.append(Move(ADD, p, c))
    for p, c in dag.edges:
        moves.append(Move(DELETE, p, c))
        if counts[p] < config.max_parents and _arc_allowed(c, p, discrete):
            if is_acyclic(dag.with_reversed(p, c)):
                moves.append(Move(REVERSE, p, c))
    return sorted(moves, key=Move.sort_key)


@dataclass(frozen=True)
class MoveRecord:
    move: Move
    delta: float
    total: float


@dataclass(frozen=True)
class SearchTrace:
    initial_total: float
    records: tuple[MoveRecord, ...] = ()

    @property
    def final_total(self) -> float:
        return self.records[-1].total if self.records else self.initial_total


def _family_score(data, bound, cache, child, parents) -> float:
    key = FamilyKey.make(child, parents)
    return cache_get_or_compute(cache, key, bound).log_score


def total_score(dag: Dag, data: Dataset, scorer, cache: ScoreCache | None = None) -> float:
    """Sum of family log scores (uniform structure prior contributes zero)."""
    if not is_acyclic(dag):
        raise SchemaError("graph has a directed cycle")
    bound = scorer.bind(data)
    if cache is None:
        return sum(
            bound.score_key(FamilyKey.make(v, dag.parents_of(v))).log_score
            for v in range(dag.n)
        )
    return sum(
        _family_score(data, bound, cache, v, dag.parents_of(v)) for v in range(dag.n)
    )


def _discrete_set(data: Dataset) -> frozenset:
    return frozenset(j for j, c in enumerate(data.columns) if c.is_discrete)


def _move_delta(move: Move, dag: Dag, data, bound, cache) -> float:
    child = move.child
    old = _family_score(data, bound, cache, child, dag.parents_of(child))
    new_dag = apply_move(dag, move)
    delta = _family_score(data, bound, cache, child, new_dag.parents_of(child)) - old
    if move.kind == REVERSE:
        other = move.parent
        old_other = _family_score(data, bound, cache, other, dag.parents_of(other))
        delta += _family_score(data, bound, cache, other, new_dag.parents_of(other)) - old_other
    return delta


def _climb(start: Dag, data, bound, cache, config, discrete):
    initial = sum(
        _family_score(data, bound, cache, v, start.parents_of(v)) for v in range(start.n)
    )
    dag, total = start, initial
    records: list[MoveRecord] = []
    while True:
        best: tuple[Move, float] | None = None
        for move in legal_moves(dag, config, discrete):
            try:
                delta = _move_delta(move, dag, data, bound, cache)
            except GpbnetError as exc:
                log.warning("skipping move %s: %s", move, exc)
                continue
            if best is None or delta > best[1]:
                best = (move, delta)
        if best is None or best[1] <= config.epsilon:
            return dag, SearchTrace(initial_total=initial, records=tuple(records))
        move, delta = best
        dag = apply_move(dag, move)
        total += delta
        records.append(MoveRecord(move=move, delta=delta, total=total))


def _random_start(n: int, rng, config: SearchConfig, discrete: frozenset) -> Dag:
    order = rng.permutation(n)
    dag = Dag.empty(n)
    counts = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            p, c = int(order[i]), int(order[j])
            if counts[c] >= config.max_parents or not _arc_allowed(p, c, discrete):
                continue
            if rng.random() < config.restart_edge_prob:
                dag = dag.with_added(p, c)
                counts[c] += 1
    return dag


def hill_climb(
    data: Dataset, scorer, config: SearchConfig = SearchConfig(), cache: ScoreCache | None = None
) -> tuple[Dag, SearchTrace]:
    """Greedy ascent to a local maximum; deterministic for a fixed config.

    Each step applies the best-gain legal move (ties broken by move order)
    until no move gains more than ``config.epsilon``. Optional random
    restarts climb from seeded random DAGs and the best total wins.
    """
    bound = scorer.bind(data)
    if cache is None:
        cache = ScoreCache()
    discrete = _discrete_set(data)
    start = config.start if config.start is not None else Dag.empty(data.n_cols)
    if start.n != data.n_cols:
        raise SchemaError("start graph size does not match the dataset")
    if not is_acyclic(start):
        raise SchemaError("start graph has a cycle")
    for p, c in start.edges:
        if not _arc_allowed(p, c, discrete):
            raise SchemaError(f"start arc ({p},{c}) violates the discrete-first ordering")

    best_dag, best_trace = _climb(start, data, bound, cache, config, discrete)
    if config.restarts:
        rng = np.random.default_rng(config.seed)
        for _ in range(config.restarts):
            dag0 = _random_start(data.n_cols, rng, config, discrete)
            dag, trace = _climb(dag0, data, bound, cache, config, discrete)
            if trace.final_total > best_trace.final_total:
                best_dag, best_trace = dag, trace
    return best_dag, best_trace
