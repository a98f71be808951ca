"""Sparse multivariate polynomials with integer coefficients.

Polynomials live in a :class:`PolyRing` fixed by an ordered tuple of edge
variables ``q<i>_<j>``.  Monomials are packed into a single Python int:
one 16-bit slot per variable (top bit of each slot is a guard bit) and the
total degree in the most significant position.  Comparing packed keys is
then exactly graded-lex comparison, and monomial product is integer
addition.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

SLOT_BITS = 16
MAX_EXPONENT = (1 << (SLOT_BITS - 1)) - 1

#: Default modulus for evaluation: the Mersenne prime 2^61 - 1.
DEFAULT_PRIME = (1 << 61) - 1


class PolyError(ArithmeticError):
    pass


class NotDivisible(PolyError):
    """The quotient is not a polynomial."""


class DivisionByZero(PolyError, ZeroDivisionError):
    pass


class UnassignedVariable(PolyError, KeyError):
    pass


class ZeroPolynomial(PolyError, ValueError):
    pass


@dataclass(frozen=True, order=True)
class VarId:
    """Edge variable q_{source,target}; vertices are 1-based."""

    source: int
    target: int

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError(f"loop variable q{self.source}_{self.target}")

    def __str__(self):
        return f"q{self.source}_{self.target}"


@dataclass(frozen=True)
class Monomial:
    """Product of variables; ``exponents`` holds (var, e) pairs, e > 0, sorted by var."""

    exponents: tuple[tuple[VarId, int], ...] = ()

    @classmethod
    def from_mapping(cls, exps: Mapping[VarId, int]) -> "Monomial":
        items = tuple(sorted((v, e) for v, e in exps.items() if e))
        if any(e < 0 for _, e in items):
            raise ValueError("negative exponent")
        return cls(items)

    @classmethod
    def product(cls, variables: Iterable[VarId]) -> "Monomial":
        exps: dict[VarId, int] = {}
        for v in variables:
            exps[v] = exps.get(v, 0) + 1
        return cls.from_mapping(exps)

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.exponents)

    def as_dict(self) -> dict[VarId, int]:
        return dict(self.exponents)

    def __mul__(self, other: "Monomial") -> "Monomial":
        exps = self.as_dict()
        for v, e in other.exponents:
            exps[v] = exps.get(v, 0) + e
        return Monomial.from_mapping(exps)

    def divides(self, other: "Monomial") -> bool:
        exps = other.as_dict()
        return all(exps.get(v, 0) >= e for v, e in self.exponents)

    def __str__(self):
        return _format_monomial(self.exponents) or "1"


def gcd_monomials(monomials: Iterable[Monomial]) -> Monomial:
    it = iter(monomials)
    try:
        acc = next(it).as_dict()
    except StopIteration:
        return Monomial()
    for m in it:
        d = m.as_dict()
        acc = {v: min(e, d[v]) for v, e in acc.items() if v in d}
    return Monomial.from_mapping(acc)


def _format_monomial(exponents) -> str:
    parts = []
    for v, e in exponents:
        parts.append(str(v) if e == 1 else f"{v}^{e}")
    return "*".join(parts)


class PolyRing:
    """Z[q_v : v in variables] with graded-lex order, variables ordered by (source, target).

    Use :func:`poly_ring` to obtain instances; rings are interned so identity
    equals equality.
    """

    def __init__(self, variables: tuple[VarId, ...]):
        if list(variables) != sorted(set(variables)):
            raise ValueError("variables must be sorted and distinct")
        self.variables = variables
        self.nvars = len(variables)
        self._index = {v: k for k, v in enumerate(variables)}
        self._deg_shift = SLOT_BITS * self.nvars
        self._guard = sum(1 << (SLOT_BITS * k + SLOT_BITS - 1) for k in range(self.nvars))
        self._slot_mask = (1 << SLOT_BITS) - 1
        self.zero = Poly(self, {})
        self.one = Poly(self, {0: 1})

    def __repr__(self):
        return f"PolyRing({', '.join(map(str, self.variables))})"

    def __reduce__(self):
        return poly_ring, (self.variables,)

    # -- packed monomial keys -------------------------------------------------
    def _shift(self, var: VarId) -> int:
        try:
            k = self._index[var]
        except KeyError:
            raise KeyError(f"{var} is not a variable of {self!r}") from None
        return SLOT_BITS * (self.nvars - 1 - k)

    def key(self, monomial: Monomial) -> int:
        key = 0
        for v, e in monomial.exponents:
            if e > MAX_EXPONENT:
                raise OverflowError("exponent too large")
            key |= e << self._shift(v)
        return key | (monomial.degree << self._deg_shift)

    def key_degree(self, key: int) -> int:
        return key >> self._deg_shift

    def key_exponents(self, key: int) -> tuple[tuple[VarId, int], ...]:
        out = []
        mask = self._slot_mask
        for k, v in enumerate(self.variables):
            e = (key >> (SLOT_BITS * (self.nvars - 1 - k))) & mask
            if e:
                out.append((v, e))
        return tuple(out)

    def key_divides(self, small: int, big: int) -> bool:
        g = self._guard
        return ((big | g) - small) & g == g

    # -- constructors ---------------------------------------------------------
    def var(self, v: VarId | tuple[int, int]) -> "Poly":
        if not isinstance(v, VarId):
            v = VarId(*v)
        return Poly(self, {(1 << self._shift(v)) | (1 << self._deg_shift): 1})

    def const(self, c: int) -> "Poly":
        return Poly(self, {0: int(c)} if c else {})

    def monomial(self, m: Monomial, coeff: int = 1) -> "Poly":
        return Poly(self, {self.key(m): coeff} if coeff else {})

    def from_terms(self, terms: Iterable[tuple[Monomial, int]]) -> "Poly":
        d: dict[int, int] = {}
        for m, c in terms:
            k = self.key(m)
            d[k] = d.get(k, 0) + c
        return Poly(self, {k: c for k, c in d.items() if c})

    def sum(self, polys: Iterable["Poly"]) -> "Poly":
        acc: dict[int, int] = {}
        for p in polys:
            self._check(p)
            for k, c in p.terms.items():
                acc[k] = acc.get(k, 0) + c
        return Poly(self, {k: c for k, c in acc.items() if c})

    def prod(self, polys: Iterable["Poly"]) -> "Poly":
        acc = self.one
        for p in polys:
            acc = acc * p
        return acc

    def _check(self, p: "Poly"):
        if p.ring is not self:
            raise ValueError(f"polynomial from {p.ring!r} used in {self!r}")

    # -- text form ------------------------------------------------------------
    def parse(self, text: str) -> "Poly":
        return parse_poly(text, self)


@lru_cache(maxsize=None)
def _ring_cached(variables: tuple[VarId, ...]) -> PolyRing:
    return PolyRing(variables)


def poly_ring(variables: Iterable[VarId | tuple[int, int]]) -> PolyRing:
    vs = tuple(sorted({v if isinstance(v, VarId) else VarId(*v) for v in variables}))
    return _ring_cached(vs)


class Poly:
    """Immutable polynomial; ``terms`` maps packed monomial keys to nonzero ints."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: PolyRing, terms: dict[int, int]):
        self.ring = ring
        self.terms = terms
        self._hash = None

    # -- inspection -------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and 0 in self.terms)

    def constant_value(self) -> int:
        if not self.is_constant():
            raise ValueError("not a constant polynomial")
        return self.terms.get(0, 0)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return self.ring.key_degree(max(self.terms))

    def leading_term(self) -> tuple[Monomial, int]:
        if not self.terms:
            raise ZeroPolynomial("zero polynomial has no leading term")
        k = max(self.terms)
        return Monomial(self.ring.key_exponents(k)), self.terms[k]

    def items(self) -> Iterator[tuple[Monomial, int]]:
        """Terms in graded-lex descending order."""
        ring = self.ring
        for k in sorted(self.terms, reverse=True):
            yield Monomial(ring.key_exponents(k)), self.terms[k]

    def coefficient(self, m: Monomial) -> int:
        return self.terms.get(self.ring.key(m), 0)

    def variables(self) -> set[VarId]:
        out = set()
        for k in self.terms:
            out.update(v for v, _ in self.ring.key_exponents(k))
        return out

    def as_monomial(self) -> Monomial:
        if len(self.terms) != 1 or next(iter(self.terms.values())) != 1:
            raise ValueError("not a monic monomial")
        return Monomial(self.ring.key_exponents(next(iter(self.terms))))

    # -- arithmetic ---------------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            self.ring._check(other)
            return other
        if isinstance(other, int):
            return self.ring.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if len(other.terms) > len(self.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        out = dict(a)
        for k, c in b.items():
            s = out.get(k, 0) + c
            if s:
                out[k] = s
            else:
                del out[k]
        return Poly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, 0) - c
            if s:
                out[k] = s
            else:
                del out[k]
        return Poly(self.ring, out)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.terms, other.terms
        if not a or not b:
            return self.ring.zero
        ring = self.ring
        if ring.key_degree(max(a)) + ring.key_degree(max(b)) > MAX_EXPONENT:
            raise OverflowError("product degree exceeds packed monomial capacity")
        if len(a) < len(b):
            a, b = b, a
        out: dict[int, int] = {}
        get = out.get
        for kb, cb in b.items():
            for ka, ca in a.items():
                k = ka + kb
                out[k] = get(k, 0) + ca * cb
        return Poly(ring, {k: c for k, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power")
        result, base = self.ring.one, self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def exact_div(self, den: "Poly") -> "Poly":
        """Return q with q * den == self, raising :class:`NotDivisible` otherwise."""
        self.ring._check(den)
        if not den.terms:
            raise DivisionByZero("division by the zero polynomial")
        if not self.terms:
            return self.ring.zero
        ring = self.ring
        dterms = den.terms
        lk = max(dterms)
        lc = dterms[lk]
        if len(dterms) == 1:
            out = {}
            for k, c in self.terms.items():
                q, r = divmod(c, lc)
                if r or not ring.key_divides(lk, k):
                    raise NotDivisible(f"{den} does not divide the numerator")
                out[k - lk] = q
            return Poly(ring, out)

        rest = [(k - lk, c) for k, c in dterms.items() if k != lk]
        rem = dict(self.terms)
        heap = [-k for k in rem]
        heapq.heapify(heap)
        quot: dict[int, int] = {}
        divides = ring.key_divides
        while rem:
            k = -heapq.heappop(heap)
            c = rem.pop(k, 0)
            if not c:
                continue
            q, r = divmod(c, lc)
            if r or not divides(lk, k):
                raise NotDivisible(f"{den} does not divide the numerator")
            qk = k - lk
            quot[qk] = q
            for dk, dc in rest:
                t = qk + dk + lk
                old = rem.get(t)
                if old is None:
                    rem[t] = -q * dc
                    heapq.heappush(heap, -t)
                else:
                    s = old - q * dc
                    if s:
                        rem[t] = s
                    else:
                        # keep the slot; popped entries with coefficient 0 are skipped
                        rem[t] = 0
        return Poly(ring, quot)

    def __floordiv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.exact_div(other)

    def divides(self, other: "Poly") -> bool:
        try:
            other.exact_div(self)
        except NotDivisible:
            return False
        return True

    # -- evaluation ---------------------------------------------------------------
    def eval_mod(self, assignment: Mapping[VarId, int], prime: int = DEFAULT_PRIME) -> int:
        ring = self.ring
        idx_vals = []
        for v in self.variables():
            if v not in assignment:
                raise UnassignedVariable(str(v))
        mask = ring._slot_mask
        for k, v in enumerate(ring.variables):
            if v in assignment:
                idx_vals.append((SLOT_BITS * (ring.nvars - 1 - k), assignment[v] % prime))
        total = 0
        for key, c in self.terms.items():
            val = c % prime
            for shift, x in idx_vals:
                e = (key >> shift) & mask
                if e:
                    val = val * (x if e == 1 else pow(x, e, prime)) % prime
            total += val
        return total % prime

    def specialize(self, values: Mapping[VarId, int]) -> "Poly":
        """Substitute integer constants for some variables; the ring is unchanged."""
        if not values:
            return self
        ring = self.ring
        out: dict[int, int] = {}
        for key, c in self.terms.items():
            newkey = key
            for v, x in values.items():
                shift = ring._shift(v)
                e = (key >> shift) & ring._slot_mask
                if e:
                    c *= x ** e
                    newkey -= (e << shift) + (e << ring._deg_shift)
            if c:
                out[newkey] = out.get(newkey, 0) + c
        return Poly(ring, {k: c for k, c in out.items() if c})

    # -- comparison & text -------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, int):
            return self.is_constant() and self.terms.get(0, 0) == other
        if not isinstance(other, Poly):
            return NotImplemented
        return self.ring is other.ring and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((id(self.ring), frozenset(self.terms.items())))
        return self._hash

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"


# -- canonical text form -------------------------------------------------------


def format_poly(p: Poly, names: Mapping[VarId, str] | None = None) -> str:
    """Render in canonical form, e.g. ``q1_2*q2_3 + 2*q3_1``.

    ``names`` optionally replaces ``q<i>_<j>`` by aliases (display only, not parseable).
    """
    if not p.terms:
        return "0"
    pieces = []
    for m, c in p.items():
        if names:
            mono = "*".join(
                (names.get(v, str(v)) if e == 1 else f"{names.get(v, str(v))}^{e}")
                for v, e in m.exponents
            )
        else:
            mono = _format_monomial(m.exponents)
        a = abs(c)
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        if not pieces:
            pieces.append(body if c > 0 else f"-{body}")
        else:
            pieces.append(("+ " if c > 0 else "- ") + body)
    return " ".join(pieces)


_TERM_RE = re.compile(r"^(?:(\d+)(?:\*(.+))?|(.+))$")
_FACTOR_RE = re.compile(r"^q(\d+)_(\d+)(?:\^(\d+))?$")


def parse_poly(text: str, ring: PolyRing) -> Poly:
    """Inverse of :func:`format_poly` (without aliases)."""
    s = text.strip()
    if s == "0":
        return ring.zero
    tokens = s.split(" ")
    sign = 1
    if tokens[0].startswith("-"):
        sign = -1
        tokens[0] = tokens[0][1:]
    if len(tokens) % 2 == 0:
        raise ValueError(f"malformed polynomial: {text!r}")
    terms: dict[int, int] = {}
    for pos in range(0, len(tokens), 2):
        if pos:
            op = tokens[pos - 1]
            if op not in "+-":
                raise ValueError(f"malformed polynomial: {text!r}")
            sign = 1 if op == "+" else -1
        m = _TERM_RE.match(tokens[pos])
        if not m or not tokens[pos]:
            raise ValueError(f"malformed term {tokens[pos]!r}")
        coeff_s, mono_s, bare = m.groups()
        if coeff_s is not None:
            coeff = int(coeff_s)
            if coeff == 0 or (coeff == 1 and mono_s):
                raise ValueError(f"non-canonical coefficient in {tokens[pos]!r}")
        else:
            coeff, mono_s = 1, bare
        exps: dict[VarId, int] = {}
        for factor in (mono_s.split("*") if mono_s else []):
            fm = _FACTOR_RE.match(factor)
            if not fm:
                raise ValueError(f"malformed factor {factor!r}")
            e = int(fm.group(3) or 1)
            if fm.group(3) is not None and e <= 1:
                raise ValueError(f"non-canonical exponent in {factor!r}")
            v = VarId(int(fm.group(1)), int(fm.group(2)))
            if v in exps:
                raise ValueError(f"repeated variable in {tokens[pos]!r}")
            exps[v] = e
        key = ring.key(Monomial.from_mapping(exps))
        if key in terms:
            raise ValueError(f"repeated monomial in {text!r}")
        terms[key] = sign * coeff
    return Poly(ring, terms)
