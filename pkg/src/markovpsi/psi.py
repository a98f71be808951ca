"""The polynomial Psi with rho(t) = pi(t) * Psi, its minor factorisation and identity tests.

Symbolic route: rho(t) = det(-R^(t)) by exact elimination, Psi by exact
division, then repeated division by every proper symmetric minor of -Q.

Probabilistic route: evaluate both sides of a claimed factorisation at
random points modulo a large prime (Schwartz-Zippel).
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


from .lift import LiftedChain, r_matrix, ring_tree_index, _require_ring
from .markov_graph import (
    RankOutOfRange,
    RateGraph,
    SymbolicMatrix,
    det,
    kept_minor,
    minor_subsets,
    rate_matrix,
)
from .modular import det_mod
from .polyring import DEFAULT_PRIME, Monomial, NotDivisible, Poly, VarId

log = logging.getLogger(__name__)


class PsiError(ArithmeticError):
    pass


class NotAPolynomial(PsiError):
    """rho(t) / pi(t) left a remainder; impossible for a correct lift."""


class WitnessMismatch(PsiError):
    """Two witnesses produced different quotients."""


class ZeroDenominator(PsiError):
    pass


def rho(lc: LiftedChain, t: int, specialize: Mapping[VarId, int] | None = None,
        R: SymbolicMatrix | None = None) -> Poly:
    if not 0 <= t < lc.size:
        raise IndexError(f"tree index {t} out of range 0..{lc.size - 1}")
    if R is None:
        R = r_matrix(lc)
    M = (-R).delete(t)
    if specialize:
        M = M.specialize(specialize)
    return det(M)


def compute_psi(lc: LiftedChain, witnesses: Iterable[int] | None = None,
                specialize: Mapping[VarId, int] | None = None) -> Poly:
    """Psi = rho(t) / pi(t), required to agree across all witnesses (default: first tree)."""
    witnesses = [0] if witnesses is None else list(witnesses)
    if not witnesses:
        raise ValueError("at least one witness is required")
    R = r_matrix(lc)
    psi = None
    for t in witnesses:
        num = rho(lc, t, specialize, R)
        den = lc.weight(t).specialize(specialize or {})
        try:
            q = num.exact_div(den)
        except NotDivisible:
            raise NotAPolynomial(f"rho({t}) is not divisible by pi({t})") from None
        if psi is None:
            psi = q
        elif q != psi:
            raise WitnessMismatch(f"witness {t} disagrees with witness {witnesses[0]}")
    return psi


# -- factorisation into symmetric minors ---------------------------------------------


@dataclass
class FactorReport:
    graph: str
    multiplicities: dict[tuple[int, ...], int]
    residual: Poly
    mode: str = "symbolic"
    leading_coefficient: int | None = None
    order_independent: bool | None = None
    pit_trials: int | None = None
    prime: int | None = None

    @property
    def clean(self) -> bool:
        return self.residual == 1

    def rank_exponents(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for S, e in self.multiplicities.items():
            out.setdefault(len(S), []).append(e)
        return out

    def matches_claim(self, claim: Mapping[int, int]) -> bool:
        """Clean factorisation with every rank-k minor at exponent claim[k] (0 if absent)."""
        return self.clean and all(
            e == claim.get(len(S), 0) for S, e in self.multiplicities.items()
        )


def default_minor_order(n: int) -> list[tuple[int, ...]]:
    """Kept vertex sets by rank descending, then lexicographic."""
    out = []
    for k in range(n - 1, 0, -1):
        out.extend(minor_subsets(n, k))
    return out


def _extract(psi: Poly, minors: Mapping[tuple[int, ...], Poly], order) -> tuple[dict, Poly]:
    mult = {}
    rest = psi
    for S in order:
        m = minors[S]
        e = 0
        if not m.is_constant():
            while True:
                try:
                    rest = rest.exact_div(m)
                except NotDivisible:
                    break
                e += 1
        mult[S] = e
    return mult, rest


def factor_into_minors(psi: Poly, g: RateGraph, order: Sequence[tuple[int, ...]] | None = None,
                       specialize: Mapping[VarId, int] | None = None,
                       check_order: bool = True) -> FactorReport:
    """Largest power of every proper symmetric minor dividing ``psi``, plus the residual."""
    if psi.is_zero():
        raise ValueError("psi must be nonzero")
    Q = rate_matrix(g)
    default = default_minor_order(g.n)
    if order is None:
        order = default
    minors = {S: kept_minor(Q, S).specialize(specialize or {}) for S in default}
    mult, residual = _extract(psi, minors, order)
    independent = None
    if check_order:
        mult_rev, residual_rev = _extract(psi, minors, list(reversed(order)))
        independent = mult_rev == mult and residual_rev == residual
    return FactorReport(
        graph=g.describe(),
        multiplicities={S: mult[S] for S in default},
        residual=residual,
        leading_coefficient=psi.leading_term()[1],
        order_independent=independent,
    )


def claim_poly(g: RateGraph, claim: Mapping[int, int]) -> Poly:
    Q = rate_matrix(g)
    acc = g.ring.one
    for k, e in sorted(claim.items()):
        if e:
            mk = g.ring.prod(kept_minor(Q, S) for S in minor_subsets(g.n, k))
            acc = acc * mk ** e
    return acc


# -- exponent formulas ---------------------------------------------------------------


def chapuy_exponent(n: int, k: int) -> int:
    """(k-1)(n-1)^(n-k-1), the conjectured exponent of m_k in Psi for the complete graph."""
    if not 2 <= k <= n - 1:
        raise RankOutOfRange(f"rank must lie in 2..{n - 1}, got {k}")
    return (k - 1) * (n - 1) ** (n - k - 1)


def chapuy_claim(n: int) -> dict[int, int]:
    return {k: chapuy_exponent(n, k) for k in range(2, n)}


def ring_claim(n: int) -> dict[int, int]:
    return {n - 1: 1}


def degree_identity_check(n: int) -> bool:
    lhs = sum(math.comb(n, k) * k * (k - 1) * (n - 1) ** (n - k - 1) for k in range(2, n))
    return lhs == n ** (n - 1) - n


def claim_degree_bound(n: int, claim: Mapping[int, int]) -> int:
    return sum(e * k * math.comb(n, k) for k, e in claim.items())


# -- probabilistic identity testing ---------------------------------------------------


@dataclass
class PitResult:
    verdict: str
    trials: int
    failures: int
    prime: int
    seed: int
    witness: int
    claim: dict[int, int]
    redraws: int = 0
    degree_bound: int = 0
    failing_assignment: dict[str, int] | None = None
    failing_trials: list[int] = field(default_factory=list)

    @property
    def matched(self) -> bool:
        return self.verdict == "match"

    @property
    def error_bound_log10(self) -> float:
        """log10 of the Schwartz-Zippel bound (D / p)^trials."""
        return self.trials * math.log10(self.degree_bound / self.prime)

    @property
    def error_bound(self) -> float:
        return (self.degree_bound / self.prime) ** self.trials


def trial_rng(seed: int, trial: int, attempt: int = 0) -> random.Random:
    """Independent stream per (seed, trial, attempt); string seeds hash via SHA-512."""
    return random.Random(f"markovpsi:{seed}:{trial}:{attempt}")


def draw_assignment(g: RateGraph, rng: random.Random, prime: int) -> dict[VarId, int]:
    return {v: rng.randrange(1, prime) for v in g.sorted_edges}


def lifted_minor_mod(lc: LiftedChain, t: int, values: Mapping[VarId, int], prime: int,
                     backend: str = "auto") -> int:
    """det(-R^(t)) mod prime at the given rates, built directly from the transitions."""
    N = lc.size
    rows = [[0] * N for _ in range(N)]
    for tr in lc.transitions:
        x = values[tr.label]
        rows[tr.source][tr.target] -= x
        rows[tr.source][tr.source] += x
    keep = [k for k in range(N) if k != t]
    sub = [[rows[i][j] for j in keep] for i in keep]
    return det_mod(sub, prime, backend)


def base_minor_mod(g: RateGraph, kept: Sequence[int], values: Mapping[VarId, int], prime: int) -> int:
    """Symmetric minor of -Q on ``kept`` mod prime."""
    pos = {v: a for a, v in enumerate(kept)}
    rows = [[0] * len(kept) for _ in kept]
    for e in g.sorted_edges:
        x = values[e]
        if e.source in pos:
            a = pos[e.source]
            rows[a][a] += x
            if e.target in pos:
                rows[a][pos[e.target]] -= x
    return det_mod(rows, prime, "gauss")


def claim_value_mod(g: RateGraph, claim: Mapping[int, int], values, prime: int) -> int:
    acc = 1
    for k, e in sorted(claim.items()):
        if not e:
            continue
        mk = 1
        for S in minor_subsets(g.n, k):
            mk = mk * base_minor_mod(g, S, values, prime) % prime
        acc = acc * pow(mk, e, prime) % prime
    return acc


def pit_verify(lc: LiftedChain, claim: Mapping[int, int], trials: int = 20,
               prime: int = DEFAULT_PRIME, seed: int = 0, witness: int = 0,
               backend: str = "auto", max_redraws: int = 100) -> PitResult:
    """Test rho(t) / pi(t) == prod_k m_k^claim[k] at ``trials`` random points mod ``prime``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    g = lc.graph
    for k in claim:
        if not 1 <= k <= g.n - 1:
            raise RankOutOfRange(f"claim rank {k} outside 1..{g.n - 1}")
    claim = {int(k): int(e) for k, e in sorted(claim.items())}
    tree_edges = lc.trees[witness].edges
    failures = 0
    redraws = 0
    failing_trials = []
    failing = None
    for trial in range(trials):
        for attempt in range(max_redraws):
            values = draw_assignment(g, trial_rng(seed, trial, attempt), prime)
            pi_val = 1
            for e in tree_edges:
                pi_val = pi_val * values[e] % prime
            if pi_val:
                break
            redraws += 1
            log.info("trial %d: pi(t) vanished mod p, redrawing", trial)
        else:
            raise ZeroDenominator("pi(t) kept vanishing modulo the prime")
        lhs = lifted_minor_mod(lc, witness, values, prime, backend) * pow(pi_val, -1, prime) % prime
        rhs = claim_value_mod(g, claim, values, prime)
        if lhs != rhs:
            failures += 1
            failing_trials.append(trial)
            if failing is None:
                failing = {str(v): x for v, x in sorted(values.items())}
    # rho - pi * claim is a polynomial of degree at most D
    D = max(lc.size - 1, (g.n - 1) + claim_degree_bound(g.n, claim))
    return PitResult(
        verdict="match" if failures == 0 else "refuted",
        trials=trials,
        failures=failures,
        prime=prime,
        seed=seed,
        witness=witness,
        claim=claim,
        redraws=redraws,
        degree_bound=D,
        failing_assignment=failing,
        failing_trials=failing_trials,
    )


# -- the distinguished monomial --------------------------------------------------------


def distinguished_monomial(n: int) -> Monomial:
    """q_{n,1}^(n-1) * prod_{i<n} q_{i,i+1}^n."""
    exps = {VarId(i, i + 1): n for i in range(1, n)}
    exps[VarId(n, 1)] = n - 1
    return Monomial.from_mapping(exps)


def forward_tree_edges(lc: LiftedChain) -> list:
    """All transitions labelled q_{i,i+1}, except the one leaving [n,n]."""
    idx = ring_tree_index(lc)
    n = lc.graph.n
    root = idx[n, n]
    return [
        tr for tr in lc.transitions
        if tr.label.target == tr.label.source % n + 1 and tr.source != root
    ]


def is_spanning_arborescence(size: int, root: int, edges) -> bool:
    parent = {}
    for tr in edges:
        if tr.source in parent:
            return False
        parent[tr.source] = tr.target
    if root in parent or len(parent) != size - 1:
        return False
    for v in range(size):
        steps = 0
        while v != root:
            v = parent[v]
            steps += 1
            if steps > size:
                return False
    return True


def distinguished_monomial_check(lc: LiftedChain, rho_nn: Poly | None = None) -> bool:
    """Coefficient of the distinguished monomial in rho([n,n]) is 1, in pi([n,n]) m_{n-1} too,
    and the forward-labelled edges of T form a spanning arborescence rooted at [n,n]."""
    _require_ring(lc)
    g = lc.graph
    n = g.n
    idx = ring_tree_index(lc)
    t = idx[n, n]
    mono = distinguished_monomial(n)
    edges = forward_tree_edges(lc)
    if not is_spanning_arborescence(lc.size, t, edges):
        return False
    if Monomial.product(tr.label for tr in edges) != mono:
        return False
    if rho_nn is None:
        rho_nn = rho(lc, t)
    if rho_nn.coefficient(mono) != 1:
        return False
    Q = rate_matrix(g)
    rhs = lc.weight(t) * g.ring.prod(kept_minor(Q, S) for S in minor_subsets(n, n - 1))
    return rhs.coefficient(mono) == 1
