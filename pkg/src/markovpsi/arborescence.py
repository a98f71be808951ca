"""Enumeration of rooted covering trees and forests and their Kirchhoff weights.

Tree edges point toward the root: each non-root vertex has exactly one
out-edge.  Enumeration is a backtracking search over out-edge choices,
vertices in ascending order and targets in ascending order, with cycle
detection by a union-find that supports rollback.  Output order is
therefore lexicographic in the tuple of chosen targets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

from .markov_graph import RateGraph
from .polyring import Monomial, Poly, VarId


@dataclass(frozen=True)
class Forest:
    """Spanning forest; ``out_edge`` pairs each non-root vertex with its parent."""

    roots: frozenset[int]
    out_edge: tuple[tuple[int, int], ...]

    @property
    def edges(self) -> tuple[VarId, ...]:
        return tuple(VarId(v, w) for v, w in self.out_edge)

    def parent(self, v: int) -> int | None:
        return dict(self.out_edge).get(v)


@dataclass(frozen=True)
class Arborescence(Forest):
    root: int = 0

    def without_edge_slot(self, a: int, b: int) -> bool:
        """True iff the tree uses neither (a, b) nor (b, a)."""
        es = set(self.out_edge)
        return (a, b) not in es and (b, a) not in es


class _RollbackUnionFind:
    def __init__(self, items: Iterable[Hashable]):
        self.parent = {x: x for x in items}
        self.size = {x: 1 for x in self.parent}
        self.history: list[tuple[Hashable, Hashable] | None] = []

    def find(self, x):
        while self.parent[x] != x:
            x = self.parent[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.history.append((ra, rb))
        return True

    def rollback(self):
        ra, rb = self.history.pop()
        self.parent[rb] = rb
        self.size[ra] -= self.size[rb]


def spanning_forests(
    vertices: Sequence[Hashable],
    out_edges: Mapping[Hashable, Sequence[tuple[Hashable, object]]],
    roots: Iterable[Hashable],
) -> Iterator[dict[Hashable, tuple[Hashable, object]]]:
    """All spanning forests rooted at ``roots`` of a labelled digraph.

    ``out_edges[v]`` lists ``(target, label)`` pairs.  Each forest is yielded
    as a map from non-root vertex to its chosen ``(target, label)``.  Vertices
    are visited in the order given, targets in the order listed.
    """
    roots = set(roots)
    vset = set(vertices)
    free = [v for v in vertices if v not in roots]
    uf = _RollbackUnionFind(vertices)
    choice: dict = {}

    # A free vertex has no out-edge yet, so it is the top of its component;
    # linking v -> w closes a cycle iff w already lies in that component.
    def rec(pos):
        if pos == len(free):
            yield dict(choice)
            return
        v = free[pos]
        for w, label in out_edges.get(v, ()):
            if w not in vset:
                continue
            if uf.union(w, v):
                choice[v] = (w, label)
                yield from rec(pos + 1)
                del choice[v]
                uf.rollback()

    yield from rec(0)


def enumerate_forests(g: RateGraph, roots: Iterable[int]) -> list[Forest]:
    roots = frozenset(roots)
    if not roots:
        raise ValueError("roots must be nonempty")
    out = {v: [(w, None) for w in g.out_neighbors[v]] for v in g.vertices}
    return [
        Forest(roots, tuple(sorted((v, w) for v, (w, _) in f.items())))
        for f in spanning_forests(list(g.vertices), out, roots)
    ]


def enumerate_arborescences(g: RateGraph, root: int) -> list[Arborescence]:
    out = {v: [(w, None) for w in g.out_neighbors[v]] for v in g.vertices}
    return [
        Arborescence(frozenset({root}), tuple(sorted((v, w) for v, (w, _) in f.items())), root)
        for f in spanning_forests(list(g.vertices), out, [root])
    ]


def tree_weight(t: Forest) -> Monomial:
    """Kirchhoff weight: the product of the variables on the edges."""
    return Monomial.product(t.edges)


forest_weight = tree_weight


def weight_poly(g: RateGraph, t: Forest) -> Poly:
    return g.ring.monomial(tree_weight(t))


def kirchhoff_sum(g: RateGraph, root: int) -> Poly:
    return g.ring.from_terms((tree_weight(t), 1) for t in enumerate_arborescences(g, root))


def forest_sum(g: RateGraph, roots: Iterable[int]) -> Poly:
    return g.ring.from_terms((forest_weight(f), 1) for f in enumerate_forests(g, roots))
