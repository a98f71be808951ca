"""Brute-force reference implementations, deliberately independent of the package internals."""

from fractions import Fraction
from itertools import permutations, product


def leibniz_det(rows, zero, one):
    """Sum over all permutations; rows is a list of lists of ring elements."""
    n = len(rows)
    total = zero
    for perm in permutations(range(n)):
        term = one
        for i, j in enumerate(perm):
            term = term * rows[i][j]
            if term == zero:
                break
        else:
            inv = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
            total = total - term if inv % 2 else total + term
    return total


def fraction_det(rows):
    """Exact rational Gaussian elimination on an integer matrix."""
    a = [[Fraction(x) for x in row] for row in rows]
    n = len(a)
    det = Fraction(1)
    for k in range(n):
        piv = next((r for r in range(k, n) if a[r][k] != 0), None)
        if piv is None:
            return 0
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        det *= a[k][k]
        for r in range(k + 1, n):
            f = a[r][k] / a[k][k]
            if f:
                for c in range(k, n):
                    a[r][c] -= f * a[k][c]
    assert det.denominator == 1
    return int(det)


def brute_forests(n, edges, roots):
    """Every choice of one out-edge per non-root vertex whose paths all end in a root.

    ``edges`` is an iterable of (i, j) pairs on vertices 1..n.  Yields sorted
    tuples of chosen (vertex, parent) pairs.
    """
    roots = set(roots)
    free = [v for v in range(1, n + 1) if v not in roots]
    outs = {v: sorted(j for i, j in edges if i == v) for v in free}
    for choice in product(*(outs[v] for v in free)):
        parent = dict(zip(free, choice))
        ok = True
        for v in free:
            seen = set()
            while v not in roots:
                if v in seen:
                    ok = False
                    break
                seen.add(v)
                v = parent[v]
            if not ok:
                break
        if ok:
            yield tuple(sorted(parent.items()))


def forest_generating_poly(ring, n, edges, roots):
    from markovpsi.polyring import VarId

    total = ring.zero
    for forest in brute_forests(n, edges, roots):
        term = ring.one
        for v, w in forest:
            term = term * ring.var(VarId(v, w))
        total = total + term
    return total
