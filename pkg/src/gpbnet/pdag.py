"""Markov-equivalence classes: DAG -> PDAG conversion and distances.

Two DAGs are Markov equivalent iff they share a skeleton and v-structures;
the class is represented by a partially directed graph that keeps
v-structure arcs plus everything their orientation compels, and leaves the
rest undirected. Compelled arcs are found by iterating Meek's closure
rules after orienting the v-structures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .errors import SchemaError
from .search import Dag


@dataclass(frozen=True)
class Pdag:
    n: int
    directed: frozenset  # (parent, child) pairs
    undirected: frozenset  # frozensets {a, b}, stored canonically

    @classmethod
    def make(cls, n: int, directed, undirected) -> "Pdag":
        directed = frozenset((int(p), int(c)) for p, c in directed)
        undirected = frozenset(frozenset((int(a), int(b))) for a, b in undirected)
        for p, c in directed:
            if frozenset((p, c)) in undirected:
                raise SchemaError(f"edge {p}-{c} both directed and undirected")
        return cls(n, directed, undirected)

    def skeleton(self) -> frozenset:
        return frozenset(frozenset(e) for e in self.directed) | self.undirected


def _v_structures(dag: Dag):
    """Collider arcs x->z<-y with x, y non-adjacent."""
    arcs = set()
    for z in range(dag.n):
        parents = dag.parents_of(z)
        for i, x in enumerate(parents):
            for y in parents[i + 1:]:
                if not dag.adjacent(x, y):
                    arcs.add((x, z))
                    arcs.add((y, z))
    return arcs


def _meek_closure(n: int, directed: set, undirected: set) -> None:
    """Orient all arcs compelled by the current orientations (rules 1-3)."""

    def adjacent(a, b):
        return (a, b) in directed or (b, a) in directed or frozenset((a, b)) in undirected

    def orient(a, b):
        undirected.discard(frozenset((a, b)))
        directed.add((a, b))

    changed = True
    while changed:
        changed = False
        for pair in list(undirected):
            a, b = sorted(pair)
            for x, y in ((a, b), (b, a)):
                # rule 1: w -> x, x - y, w and y non-adjacent  =>  x -> y
                if any((w, x) in directed and not adjacent(w, y) and w != y for w in range(n)):
                    orient(x, y)
                    changed = True
                    break
                # rule 2: x -> z -> y and x - y  =>  x -> y
                if any((x, z) in directed and (z, y) in directed for z in range(n)):
                    orient(x, y)
                    changed = True
                    break
                # rule 3: x - z, x - w, z -> y, w -> y, z and w non-adjacent  =>  x -> y
                spokes = [
                    z
                    for z in range(n)
                    if frozenset((x, z)) in undirected and (z, y) in directed
                ]
                if any(
                    not adjacent(z, w)
                    for i, z in enumerate(spokes)
                    for w in spokes[i + 1:]
                ):
                    orient(x, y)
                    changed = True
                    break
            if changed:
                break


def to_pdag(dag: Dag) -> Pdag:
    """Equivalence-class pattern of a DAG (identical across the class)."""
    directed = _v_structures(dag)
    undirected = {frozenset((p, c)) for p, c in dag.edges if (p, c) not in directed}
    _meek_closure(dag.n, directed, undirected)
    return Pdag.make(dag.n, directed, ((min(e), max(e)) for e in undirected))


class StructureDistance(NamedTuple):
    missing: int
    extra: int
    misoriented: int


def _orientation(pdag: Pdag, pair: frozenset) -> tuple:
    a, b = sorted(pair)
    if (a, b) in pdag.directed:
        return ("->", a, b)
    if (b, a) in pdag.directed:
        return ("->", b, a)
    return ("-", a, b)


def structure_distance(learned: Pdag, truth: Pdag) -> StructureDistance:
    """Skeleton and orientation disagreements of ``learned`` against ``truth``."""
    if learned.n != truth.n:
        raise SchemaError("PDAGs have different sizes")
    learned_skel = learned.skeleton()
    truth_skel = truth.skeleton()
    missing = len(truth_skel - learned_skel)
    extra = len(learned_skel - truth_skel)
    misoriented = sum(
        1
        for pair in learned_skel & truth_skel
        if _orientation(learned, pair) != _orientation(truth, pair)
    )
    return StructureDistance(missing, extra, misoriented)
