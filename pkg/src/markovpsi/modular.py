"""Determinants of integer matrices modulo a prime."""

from __future__ import annotations

from typing import Sequence

import numpy as np

try:
    import flint
except ImportError:  # pragma: no cover - exercised only without python-flint
    flint = None

# python-flint's nmod_mat takes word-size moduli.
_FLINT_MAX_MODULUS = 1 << 64


def det_mod_gauss(rows: Sequence[Sequence[int]], p: int) -> int:
    """Gaussian elimination over GF(p) on an object array of Python ints."""
    n = len(rows)
    if n == 0:
        return 1 % p
    A = np.array([[x % p for x in row] for row in rows], dtype=object).reshape(n, n)
    det = 1
    for k in range(n):
        col = A[k:, k]
        nz = np.flatnonzero(col)
        if not len(nz):
            return 0
        piv = k + int(nz[0])
        if piv != k:
            A[[k, piv]] = A[[piv, k]]
            det = -det
        pivot = int(A[k, k])
        det = det * pivot % p
        if k + 1 == n:
            break
        below = np.flatnonzero(A[k + 1:, k]) + k + 1
        if len(below):
            inv = pow(pivot, -1, p)
            f = (A[below, k] * inv) % p
            A[np.ix_(below, np.arange(k, n))] = (A[below, k:] - np.outer(f, A[k, k:])) % p
    return det % p


def det_mod(rows: Sequence[Sequence[int]], p: int, backend: str = "auto") -> int:
    """det(rows) mod p; ``backend`` is ``auto``, ``flint`` or ``gauss``."""
    if backend == "auto":
        backend = "flint" if flint is not None and p < _FLINT_MAX_MODULUS else "gauss"
    if backend == "gauss":
        return det_mod_gauss(rows, p)
    if backend != "flint":
        raise ValueError(f"unknown backend {backend!r}")
    if flint is None:
        raise RuntimeError("python-flint is not installed")
    n = len(rows)
    if n == 0:
        return 1 % p
    flat = [x % p for row in rows for x in row]
    return int(flint.nmod_mat(n, n, flat, p).det())
