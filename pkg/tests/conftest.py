import random
from functools import lru_cache

import pytest

from markovpsi.lift import build_lift, ring_tree_index
from markovpsi.markov_graph import build_complete, build_ring, from_edge_list
from markovpsi.psi import compute_psi, rho


@lru_cache(maxsize=None)
def lifted(family, n):
    g = build_ring(n) if family == "ring" else build_complete(n)
    return build_lift(g)


@lru_cache(maxsize=None)
def symbolic_psi(family, n):
    return compute_psi(lifted(family, n))


@lru_cache(maxsize=None)
def rho_nn(n):
    lc = lifted("ring", n)
    return rho(lc, ring_tree_index(lc)[n, n])


def random_irreducible_graphs(count, max_n, seed, min_n=2):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(min_n, max_n)
        pairs = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
        p = rng.uniform(0.3, 0.9)
        g = from_edge_list(n, [e for e in pairs if rng.random() < p])
        if g.is_irreducible():
            out.append(g)
    return out


@pytest.fixture
def n3():
    return lifted("complete", 3)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
