"""Dense Gaussian elimination over F_p (numpy) and over Q (Fractions)."""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def rref_mod(matrix, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of an integer matrix modulo ``p``.

    Returns the nonzero rows and their pivot columns.
    """
    a = np.array(matrix, dtype=np.int64) % p
    if a.ndim != 2:
        a = a.reshape(0, 0) if a.size == 0 else a
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = pow(int(a[r, c]), -1, p)
        if inv != 1:
            a[r] = a[r] * inv % p
        col = a[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            a[hit] = (a[hit] - np.outer(col[hit], a[r])) % p
        pivots.append(c)
        r += 1
    return a[:r], pivots


def left_kernel_mod(matrix, p: int) -> np.ndarray:
    """Basis (as rows, in reduced echelon form) of {v : v M = 0 mod p}."""
    a = np.array(matrix, dtype=np.int64) % p
    n, m = a.shape
    aug = np.concatenate([a, np.eye(n, dtype=np.int64)], axis=1)
    red, pivots = rref_mod(aug, p)
    kernel = red[[i for i, c in enumerate(pivots) if c >= m]][:, m:]
    if kernel.size == 0:
        return np.zeros((0, n), dtype=np.int64)
    return rref_mod(kernel, p)[0]


def rank_mod(matrix, p: int) -> int:
    if len(matrix) == 0:
        return 0
    return len(rref_mod(matrix, p)[1])


def rref_frac(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q."""
    a = [list(r) for r in rows]
    ncols = len(a[0]) if a else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        i = next((j for j in range(r, len(a)) if a[j][c]), None)
        if i is None:
            continue
        a[r], a[i] = a[i], a[r]
        lead = a[r][c]
        if lead != 1:
            a[r] = [x / lead for x in a[r]]
        for j in range(len(a)):
            if j != r and a[j][c]:
                f = a[j][c]
                a[j] = [x - f * y for x, y in zip(a[j], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def left_kernel_frac(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(rows)
    if n == 0:
        return []
    m = len(rows[0])
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    red, pivots = rref_frac(aug)
    return [row[m:] for row, c in zip(red, pivots) if c >= m]


def nullspace_mod(matrix, p: int) -> np.ndarray:
    """Basis of {v : M v = 0 mod p}; each vector has a single 1 in its own free column."""
    a = np.array(matrix, dtype=np.int64) % p
    ncols = a.shape[1]
    red, pivots = rref_mod(a, p)
    free = [j for j in range(ncols) if j not in set(pivots)]
    out = np.zeros((len(free), ncols), dtype=np.int64)
    for i, j in enumerate(free):
        out[i, j] = 1
        for r, c in enumerate(pivots):
            out[i, c] = -red[r, j] % p
    return out


def reduce_against(rows: np.ndarray, echelon: np.ndarray, pivots: list[int], p: int) -> np.ndarray:
    """Subtract multiples of reduced echelon rows to clear their pivot columns in ``rows``."""
    out = np.array(rows, dtype=np.int64) % p
    for row, c in zip(echelon, pivots):
        col = out[:, c].copy()
        hit = np.flatnonzero(col)
        if hit.size:
            out[hit] = (out[hit] - np.outer(col[hit], row)) % p
    return out
