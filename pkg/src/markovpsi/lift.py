"""The lifted chain on covering rooted trees and its structural checks."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .arborescence import (
    Arborescence,
    enumerate_arborescences,
    spanning_forests,
    tree_weight,
)
from .markov_graph import GraphError, RateGraph, SymbolicMatrix, symmetric_minor, rate_matrix
from .polyring import Monomial, Poly, VarId, format_poly


class NotARing(GraphError):
    pass


@dataclass(frozen=True)
class Transition:
    source: int
    target: int
    label: VarId


@dataclass(frozen=True)
class LiftedChain:
    graph: RateGraph
    trees: tuple[Arborescence, ...]
    transitions: tuple[Transition, ...]

    @property
    def size(self) -> int:
        return len(self.trees)

    @cached_property
    def projection(self) -> tuple[int, ...]:
        return tuple(t.root for t in self.trees)

    @cached_property
    def index(self) -> dict[Arborescence, int]:
        return {t: k for k, t in enumerate(self.trees)}

    @cached_property
    def out_transitions(self) -> tuple[tuple[Transition, ...], ...]:
        out = [[] for _ in self.trees]
        for tr in self.transitions:
            out[tr.source].append(tr)
        return tuple(tuple(sorted(o, key=lambda t: (t.target, t.label))) for o in out)

    def weight(self, k: int) -> Poly:
        return self.graph.ring.monomial(tree_weight(self.trees[k]))

    def first_of_root(self, root: int) -> int:
        return self.projection.index(root)

    def find(self, weight: Monomial | str) -> int:
        """Index of the unique tree with the given weight."""
        hits = [
            k for k, t in enumerate(self.trees)
            if (str(tree_weight(t)) == weight if isinstance(weight, str) else tree_weight(t) == weight)
        ]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} trees with weight {weight}")
        return hits[0]


def lift_transition(g: RateGraph, s: Arborescence, j: int) -> Arborescence:
    """Move the root of ``s`` along the graph edge (root, j) by edge surgery."""
    i = s.root
    if VarId(i, j) not in g.edges:
        raise GraphError(f"({i}, {j}) is not an edge")
    edges = dict(s.out_edge)
    del edges[j]
    edges[i] = j
    t = Arborescence(frozenset({j}), tuple(sorted(edges.items())), j)
    _assert_arborescence(g.n, t)
    return t


def _assert_arborescence(n: int, t: Arborescence):
    parent = dict(t.out_edge)
    assert t.root not in parent and len(parent) == n - 1
    for v in range(1, n + 1):
        seen = 0
        while v != t.root:
            v = parent[v]
            seen += 1
            assert seen < n, "cycle in lifted tree"


def build_lift(g: RateGraph) -> LiftedChain:
    g.require_irreducible()
    trees = []
    for root in g.vertices:
        trees.extend(enumerate_arborescences(g, root))
    index = {t: k for k, t in enumerate(trees)}
    transitions = []
    for k, s in enumerate(trees):
        seen_targets = set()
        for j in g.out_neighbors[s.root]:
            t = index[lift_transition(g, s, j)]
            assert t != k and t not in seen_targets, "duplicate lifted transition"
            seen_targets.add(t)
            transitions.append(Transition(k, t, VarId(s.root, j)))
    return LiftedChain(g, tuple(trees), tuple(transitions))


def r_matrix(lc: LiftedChain, order: Sequence[int] | None = None) -> SymbolicMatrix:
    """Lifted rate matrix; ``order`` optionally lists tree indices for rows/columns."""
    ring = lc.graph.ring
    N = lc.size
    rows = [[ring.zero] * N for _ in range(N)]
    for tr in lc.transitions:
        rows[tr.source][tr.target] = rows[tr.source][tr.target] + ring.var(tr.label)
    for k in range(N):
        rows[k][k] = -ring.sum(rows[k])
    R = SymbolicMatrix.from_rows(ring, rows)
    return R.permuted(order) if order is not None else R


def pi_invariance_check(lc: LiftedChain) -> bool:
    """True iff the weight vector is annihilated by R from the left."""
    R = r_matrix(lc)
    ring = lc.graph.ring
    weights = [lc.weight(k) for k in range(lc.size)]
    cols: list[list[Poly]] = [[] for _ in range(lc.size)]
    for s in range(lc.size):
        for t in range(lc.size):
            x = R[s, t]
            if not x.is_zero():
                cols[t].append(weights[s] * x)
    return all(ring.sum(c).is_zero() for c in cols)


def projection_check(lc: LiftedChain) -> bool:
    """For tree s rooted at i and every j != i: q_ij equals the sum of labels s -> p^{-1}(j)."""
    g = lc.graph
    for s, outs in enumerate(lc.out_transitions):
        i = lc.projection[s]
        by_root: dict[int, list[VarId]] = {}
        for tr in outs:
            by_root.setdefault(lc.projection[tr.target], []).append(tr.label)
        for j in g.vertices:
            if j == i:
                continue
            want = [VarId(i, j)] if VarId(i, j) in g.edges else []
            if by_root.get(j, []) != want:
                return False
    return True


def pushforward_check(lc: LiftedChain) -> bool:
    """Summing tree weights over each fiber of the root map gives det(-Q^(i))."""
    g = lc.graph
    Q = rate_matrix(g)
    for i in g.vertices:
        fiber = g.ring.sum(lc.weight(k) for k in range(lc.size) if lc.projection[k] == i)
        if fiber != symmetric_minor(Q, {i}):
            return False
    return True


def _strongly_connected(n: int, adj: Sequence[Iterable[int]]) -> bool:
    if n == 0:
        return True
    radj = [[] for _ in range(n)]
    for v in range(n):
        for w in adj[v]:
            radj[w].append(v)
    for graph in (adj, radj):
        seen = {0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for w in graph[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        if len(seen) != n:
            return False
    return True


def lift_irreducibility_check(lc: LiftedChain) -> bool:
    adj = [[tr.target for tr in outs] for outs in lc.out_transitions]
    return _strongly_connected(lc.size, adj)


# -- ring structure -----------------------------------------------------------------


def _require_ring(lc: LiftedChain):
    if not lc.graph.is_ring():
        raise NotARing(f"{lc.graph.describe()} is not a ring")


def ring_tree_index(lc: LiftedChain) -> dict[tuple[int, int], int]:
    """[i, j] -> index of the tree rooted at i with no edge between j and j+1."""
    _require_ring(lc)
    n = lc.graph.n
    table: dict[tuple[int, int], int] = {}
    for k, t in enumerate(lc.trees):
        gaps = [j for j in range(1, n + 1) if t.without_edge_slot(j, j % n + 1)]
        if len(gaps) != 1:
            raise AssertionError(f"ring tree {t} misses {len(gaps)} edge slots")
        key = (t.root, gaps[0])
        if key in table:
            raise AssertionError(f"two trees indexed {key}")
        table[key] = k
    if len(table) != n * n:
        raise AssertionError("ring tree indexing is not a bijection")
    return table


def ring_structure_check(lc: LiftedChain) -> bool:
    """Transitions of the ring lift are exactly the two rings and the double lines."""
    idx = ring_tree_index(lc)
    n = lc.graph.n

    def nxt(i):
        return i % n + 1

    def prv(i):
        return (i - 2) % n + 1

    expected = set()
    for i in range(1, n + 1):
        expected.add((idx[i, i], idx[nxt(i), nxt(i)], VarId(i, nxt(i))))
        expected.add((idx[i, prv(i)], idx[prv(i), prv(prv(i))], VarId(i, prv(i))))
        for j in range(1, n + 1):
            if j != i:
                expected.add((idx[i, j], idx[nxt(i), j], VarId(i, nxt(i))))
                expected.add((idx[nxt(i), j], idx[i, j], VarId(nxt(i), i)))
    actual = {(t.source, t.target, t.label) for t in lc.transitions}
    return actual == expected and all(len(o) == 2 for o in lc.out_transitions)


def forest_polynomial(lc: LiftedChain, vertex_set: Sequence[int], roots: Iterable[int]) -> Poly:
    """Generating polynomial of spanning forests of the induced subgraph of T."""
    vs = set(vertex_set)
    out = {
        v: [(tr.target, tr.label) for tr in lc.out_transitions[v] if tr.target in vs]
        for v in vertex_set
    }
    terms = []
    for f in spanning_forests(list(vertex_set), out, roots):
        terms.append((Monomial.product(label for _, label in f.values()), 1))
    return lc.graph.ring.from_terms(terms)


def lemma_vertex_sets(lc: LiftedChain) -> tuple[list[int], list[int], list[int]]:
    """(G, H, roots) as tree indices: G = {[1,n],[2,1],...,[n,1],[1,1]}, H = {[1,n],[2,n],...,[n,n],[1,1]}."""
    idx = ring_tree_index(lc)
    n = lc.graph.n
    G = [idx[1, n]] + [idx[i, 1] for i in range(2, n + 1)] + [idx[1, 1]]
    H = [idx[i, n] for i in range(1, n + 1)] + [idx[1, 1]]
    return G, H, [idx[1, n], idx[1, 1]]


def lemma_forest_check(lc: LiftedChain) -> bool:
    """Forests of G and of H rooted at {[1,n],[1,1]} both generate det(-Q^(1)).

    Also checks that the root map sends these forests bijectively, and label
    by label, onto the covering trees of the base graph rooted at 1.
    """
    _require_ring(lc)
    g = lc.graph
    target = symmetric_minor(rate_matrix(g), {1})
    base_trees = {frozenset(t.edges) for t in enumerate_arborescences(g, 1)}
    G, H, roots = lemma_vertex_sets(lc)
    for vs in (G, H):
        if forest_polynomial(lc, vs, roots) != target:
            return False
        sv = set(vs)
        out = {
            v: [(tr.target, tr.label) for tr in lc.out_transitions[v] if tr.target in sv]
            for v in vs
        }
        images = []
        for f in spanning_forests(vs, out, roots):
            # the projected edge of s -> t is (p(s), p(t)), which is the label
            for s, (t, label) in f.items():
                if (lc.projection[s], lc.projection[t]) != (label.source, label.target):
                    return False
            images.append(frozenset(label for _, label in f.values()))
        if len(set(images)) != len(images) or set(images) != base_trees:
            return False
    return True


# -- export -----------------------------------------------------------------------


def tree_label(lc: LiftedChain, k: int, names=None) -> str:
    w = lc.weight(k)
    return format_poly(w, names)


def to_dot(lc: LiftedChain, names=None) -> str:
    ring_idx = ring_tree_index(lc) if lc.graph.is_ring() else None
    inv = {v: key for key, v in ring_idx.items()} if ring_idx else {}
    lines = ["digraph T {", "  node [shape=circle];"]
    for k in range(lc.size):
        parts = [tree_label(lc, k, names), f"root {lc.projection[k]}"]
        if k in inv:
            parts.insert(0, "[%d,%d]" % inv[k])
        label = "\\n".join(parts)
        lines.append(f'  t{k} [label="{label}"];')
    for tr in lc.transitions:
        lab = names.get(tr.label, str(tr.label)) if names else str(tr.label)
        lines.append(f'  t{tr.source} -> t{tr.target} [label="{lab}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json_obj(lc: LiftedChain) -> dict:
    ring_idx = ring_tree_index(lc) if lc.graph.is_ring() else None
    inv = {v: list(key) for key, v in ring_idx.items()} if ring_idx else {}
    trees = []
    for k, t in enumerate(lc.trees):
        entry = {
            "index": k,
            "root": t.root,
            "edges": [[v, w] for v, w in t.out_edge],
            "weight": str(tree_weight(t)),
        }
        if k in inv:
            entry["ring_index"] = inv[k]
        trees.append(entry)
    return {
        "graph": {"n": lc.graph.n, "family": lc.graph.name,
                  "edges": [[e.source, e.target] for e in lc.graph.sorted_edges]},
        "trees": trees,
        "transitions": [
            {"source": tr.source, "target": tr.target, "label": str(tr.label)}
            for tr in lc.transitions
        ],
    }


def to_json(lc: LiftedChain) -> str:
    return json.dumps(to_json_obj(lc), indent=2, sort_keys=True) + "\n"
