"""State-space graphs, symbolic rate matrices and exact determinants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

from .polyring import Poly, PolyRing, VarId, poly_ring

# Cofactor expansion is used up to this dimension, Bareiss above.
COFACTOR_CUTOFF = 4


class GraphError(ValueError):
    pass


class InvalidSize(GraphError):
    pass


class LoopEdge(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class NotIrreducible(GraphError):
    pass


class EmptyComplement(GraphError):
    pass


class RankOutOfRange(GraphError):
    pass


@dataclass(frozen=True)
class RateGraph:
    """Directed graph on vertices 1..n; every edge (i, j) carries the variable q_ij."""

    n: int
    edges: frozenset[VarId]
    name: str = "custom"

    def __post_init__(self):
        if self.n < 1:
            raise InvalidSize(f"n must be positive, got {self.n}")
        for e in self.edges:
            if not (1 <= e.source <= self.n and 1 <= e.target <= self.n):
                raise GraphError(f"edge {e} out of range for n={self.n}")

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    @cached_property
    def sorted_edges(self) -> tuple[VarId, ...]:
        return tuple(sorted(self.edges))

    @cached_property
    def ring(self) -> PolyRing:
        return poly_ring(self.sorted_edges)

    @cached_property
    def out_neighbors(self) -> dict[int, tuple[int, ...]]:
        out = {v: [] for v in self.vertices}
        for e in self.sorted_edges:
            out[e.source].append(e.target)
        return {v: tuple(ws) for v, ws in out.items()}

    def var(self, i: int, j: int) -> Poly:
        return self.ring.var(VarId(i, j))

    def is_irreducible(self) -> bool:
        adj = self.out_neighbors
        radj = {v: [] for v in self.vertices}
        for e in self.edges:
            radj[e.target].append(e.source)
        return _reaches_all(1, adj, self.n) and _reaches_all(1, radj, self.n)

    def require_irreducible(self):
        if not self.is_irreducible():
            raise NotIrreducible(f"graph {self.describe()} is not irreducible")

    def is_ring(self) -> bool:
        return self.n >= 3 and self.edges == build_ring(self.n).edges

    def describe(self) -> str:
        if self.name in ("ring", "complete"):
            return f"{self.name}(n={self.n})"
        return f"custom(n={self.n}, edges={len(self.edges)})"

    def to_text(self) -> str:
        lines = [str(self.n)] + [f"{e.source} {e.target}" for e in self.sorted_edges]
        return "\n".join(lines) + "\n"


def _reaches_all(start, adj, n) -> bool:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def build_ring(n: int) -> RateGraph:
    if n < 3:
        raise InvalidSize(f"a ring needs n >= 3, got {n}")
    edges = set()
    for i in range(1, n + 1):
        edges.add(VarId(i, i % n + 1))
        edges.add(VarId(i, (i - 2) % n + 1))
    return RateGraph(n, frozenset(edges), "ring")


def build_complete(n: int) -> RateGraph:
    if n < 2:
        raise InvalidSize(f"a complete graph needs n >= 2, got {n}")
    edges = frozenset(VarId(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j)
    return RateGraph(n, edges, "complete")


def from_edge_list(n: int, pairs: Iterable[tuple[int, int]]) -> RateGraph:
    edges = set()
    for i, j in pairs:
        if i == j:
            raise LoopEdge(f"loop at vertex {i}")
        v = VarId(int(i), int(j))
        if v in edges:
            raise DuplicateEdge(f"duplicate edge ({i}, {j})")
        edges.add(v)
    return RateGraph(int(n), frozenset(edges))


def parse_graph_text(text: str) -> RateGraph:
    """Graph file: first line ``n``, then one ``i j`` pair per line."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise GraphError("empty graph file")
    try:
        n = int(lines[0])
        pairs = []
        for ln in lines[1:]:
            i, j = ln.split()
            pairs.append((int(i), int(j)))
    except ValueError as exc:
        raise GraphError(f"malformed graph file: {exc}") from None
    return from_edge_list(n, pairs)


def read_graph(path: str | Path) -> RateGraph:
    return parse_graph_text(Path(path).read_text(encoding="utf-8"))


# -- matrices -------------------------------------------------------------------


@dataclass(frozen=True)
class SymbolicMatrix:
    ring: PolyRing
    entries: tuple[tuple[Poly, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij: tuple[int, int]) -> Poly:
        i, j = ij
        return self.entries[i][j]

    @classmethod
    def from_rows(cls, ring: PolyRing, rows: Sequence[Sequence[Poly]]) -> "SymbolicMatrix":
        rows = tuple(tuple(r) for r in rows)
        if any(len(r) != len(rows) for r in rows):
            raise ValueError("matrix is not square")
        return cls(ring, rows)

    def __neg__(self) -> "SymbolicMatrix":
        return SymbolicMatrix(self.ring, tuple(tuple(-x for x in row) for row in self.entries))

    def principal(self, keep: Sequence[int]) -> "SymbolicMatrix":
        """Submatrix on the given 0-based rows and the same columns."""
        return SymbolicMatrix(
            self.ring, tuple(tuple(self.entries[i][j] for j in keep) for i in keep)
        )

    def delete(self, index: int) -> "SymbolicMatrix":
        return self.principal([k for k in range(self.dim) if k != index])

    def permuted(self, order: Sequence[int]) -> "SymbolicMatrix":
        return self.principal(order)

    def row_sums(self) -> list[Poly]:
        return [self.ring.sum(row) for row in self.entries]

    def specialize(self, values) -> "SymbolicMatrix":
        return SymbolicMatrix(
            self.ring, tuple(tuple(x.specialize(values) for x in row) for row in self.entries)
        )


def rate_matrix(g: RateGraph) -> SymbolicMatrix:
    ring = g.ring
    n = g.n
    rows = []
    for i in g.vertices:
        row = [ring.zero] * n
        for j in g.out_neighbors[i]:
            row[j - 1] = ring.var(VarId(i, j))
        row[i - 1] = -ring.sum(row)
        rows.append(row)
    Q = SymbolicMatrix.from_rows(ring, rows)
    assert all(s.is_zero() for s in Q.row_sums())
    return Q


# -- determinants -----------------------------------------------------------------


def cofactor_det(M: SymbolicMatrix) -> Poly:
    """Laplace expansion along the first row, memoised on the remaining column set."""
    ring, n = M.ring, M.dim
    if n == 0:
        return ring.one
    rows = M.entries
    memo: dict[tuple[int, ...], Poly] = {}

    def minor(row: int, cols: tuple[int, ...]) -> Poly:
        if row == n:
            return ring.one
        hit = memo.get(cols)
        if hit is not None:
            return hit
        acc = ring.zero
        for pos, c in enumerate(cols):
            a = rows[row][c]
            if a.is_zero():
                continue
            sub = minor(row + 1, cols[:pos] + cols[pos + 1:])
            term = a * sub
            acc = acc - term if pos % 2 else acc + term
        memo[cols] = acc
        return acc

    return minor(0, tuple(range(n)))


def bareiss_det(M: SymbolicMatrix) -> Poly:
    """Fraction-free Gaussian elimination; every division is exact."""
    ring, n = M.ring, M.dim
    if n == 0:
        return ring.one
    a = [list(row) for row in M.entries]
    sign = 1
    prev = ring.one
    for k in range(n - 1):
        if a[k][k].is_zero():
            for r in range(k + 1, n):
                if not a[r][k].is_zero():
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return ring.zero
        pivot = a[k][k]
        row_k = a[k]
        for i in range(k + 1, n):
            row_i = a[i]
            aik = row_i[k]
            for j in range(k + 1, n):
                akj = row_k[j]
                num = pivot * row_i[j]
                if not aik.is_zero() and not akj.is_zero():
                    num = num - aik * akj
                row_i[j] = num.exact_div(prev) if not num.is_zero() else ring.zero
            row_i[k] = ring.zero
        prev = pivot
    det = a[n - 1][n - 1]
    return -det if sign < 0 else det


def det(M: SymbolicMatrix) -> Poly:
    if M.dim <= COFACTOR_CUTOFF:
        return cofactor_det(M)
    return bareiss_det(M)


def symmetric_minor(Q: SymbolicMatrix, removed: Iterable[int]) -> Poly:
    """det(-Q) restricted to the vertices (1-based) not in ``removed``."""
    removed = set(removed)
    if not removed:
        raise EmptyComplement("removed set must be nonempty")
    keep = [i for i in range(Q.dim) if i + 1 not in removed]
    if not keep:
        raise EmptyComplement("cannot remove every vertex")
    return det((-Q).principal(keep))


def kept_minor(Q: SymbolicMatrix, kept: Iterable[int]) -> Poly:
    """Symmetric minor of -Q on the kept (1-based) vertex set."""
    kept = sorted(set(kept))
    removed = [v for v in range(1, Q.dim + 1) if v not in kept]
    return symmetric_minor(Q, removed)


def minor_subsets(n: int, k: int) -> list[tuple[int, ...]]:
    """Kept vertex sets of size k, lexicographic."""
    return list(combinations(range(1, n + 1), k))


def m_k(Q: SymbolicMatrix, k: int) -> Poly:
    n = Q.dim
    if not 1 <= k <= n - 1:
        raise RankOutOfRange(f"rank must lie in 1..{n - 1}, got {k}")
    return Q.ring.prod(kept_minor(Q, S) for S in minor_subsets(n, k))


def m_k_degree_complete(n: int, k: int) -> int:
    return math.comb(n, k) * k


def invariant_measure_check(g: RateGraph) -> bool:
    """True iff mu(i) = det(-Q^(i)) satisfies sum_i mu(i) q_ij = 0 for every column j."""
    g.require_irreducible()
    Q = rate_matrix(g)
    mu = [symmetric_minor(Q, {i}) for i in g.vertices]
    ring = g.ring
    for j in range(g.n):
        if not ring.sum(mu[i] * Q[i, j] for i in range(g.n)).is_zero():
            return False
    return True
