"""Exact matrix permanents.

Ryser's inclusion-exclusion formula with Gray-code subset ordering is the
default. Glynn's formula and the naive permutation sum are kept as
independent cross-checks.

The Gray-code walk is cut into a fixed number of chunks that depends only on
the matrix size, each chunk is summed sequentially, and the chunk partials
are reduced left to right. ``threads`` therefore changes scheduling but never
the floating-point result.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import ResourceCapError, ShapeError

PERMANENT_MAX = 12
_CHUNK_BITS = 4


def _as_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"permanent needs a square matrix, got shape {M.shape}")
    return M


def _chunks(total: int, n_bits: int) -> list[tuple[int, int]]:
    n_chunks = 1 << min(n_bits, _CHUNK_BITS)
    step = -(-total // n_chunks)
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


def _run_chunks(fn, bounds, threads):
    if threads <= 1 or len(bounds) == 1:
        parts = [fn(lo, hi) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: fn(*b), bounds))
    total = 0j
    for p in parts:
        total += p
    return total


def _ryser(M: np.ndarray, threads: int) -> complex:
    n = M.shape[0]
    cols = [M[:, j].copy() for j in range(n)]

    def partial(lo, hi):
        # Gray code g(k) = k ^ (k >> 1) over k in [lo, hi); subset g(lo - 1) seeds the row sums
        if lo == 0:
            gray = 0
            rowsum = np.zeros(n, dtype=np.complex128)
            acc = 0j
            lo = 1
        else:
            gray = (lo - 1) ^ ((lo - 1) >> 1)
            members = [j for j in range(n) if gray >> j & 1]
            rowsum = M[:, members].sum(axis=1) if members else np.zeros(n, dtype=np.complex128)
            acc = 0j
        for k in range(lo, hi):
            j = (k & -k).bit_length() - 1
            if gray >> j & 1:
                rowsum = rowsum - cols[j]
            else:
                rowsum = rowsum + cols[j]
            gray ^= 1 << j
            term = complex(np.prod(rowsum))
            if bin(gray).count("1") & 1:
                acc -= term
            else:
                acc += term
        return acc

    total = _run_chunks(partial, _chunks(1 << n, n), threads)
    return -total if n & 1 else total


def _glynn(M: np.ndarray, threads: int) -> complex:
    n = M.shape[0]
    rows = [M[i, :].copy() for i in range(n)]
    colsum = M.sum(axis=0)

    def partial(lo, hi):
        # delta_0 fixed at +1; bit i-1 of the Gray code marks delta_i = -1
        gray = (lo - 1) ^ ((lo - 1) >> 1) if lo else 0
        v = colsum.copy()
        for i in range(1, n):
            if gray >> (i - 1) & 1:
                v = v - 2 * rows[i]
        acc = 0j
        if lo == 0:
            acc += complex(np.prod(v))
            lo = 1
        for k in range(lo, hi):
            b = (k & -k).bit_length() - 1
            if gray >> b & 1:
                v = v + 2 * rows[b + 1]
            else:
                v = v - 2 * rows[b + 1]
            gray ^= 1 << b
            term = complex(np.prod(v))
            if bin(gray).count("1") & 1:
                acc -= term
            else:
                acc += term
        return acc

    total = _run_chunks(partial, _chunks(1 << (n - 1), n - 1), threads)
    return total / (1 << (n - 1))


def permanent_naive(M) -> complex:
    """Sum over all n! permutations; the reference oracle."""
    M = _as_square(M)
    n = M.shape[0]
    total = 0j
    rows = range(n)
    for perm in itertools.permutations(rows):
        total += complex(np.prod(M[rows, perm]))
    return total


def permanent(M, method: str = "ryser", threads: int = 1,
              max_size: int = PERMANENT_MAX) -> complex:
    """Permanent of a square complex matrix; the 0x0 permanent is 1."""
    M = _as_square(M)
    n = M.shape[0]
    if n > max_size:
        raise ResourceCapError(f"permanent of size {n} exceeds cap {max_size}")
    if n == 0:
        return 1 + 0j
    if n == 1:
        return complex(M[0, 0])
    if method == "ryser":
        return _ryser(M, threads)
    if method == "glynn":
        return _glynn(M, threads)
    if method == "naive":
        return permanent_naive(M)
    raise ValueError(f"unknown permanent method {method!r}")


def permanent_repeated(M, row_counts, col_counts, **kwargs) -> complex:
    """Permanent of ``M`` with row ``i`` repeated ``row_counts[i]`` times and
    column ``j`` repeated ``col_counts[j]`` times."""
    M = np.asarray(M)
    rows = np.repeat(np.arange(M.shape[0]), row_counts)
    cols = np.repeat(np.arange(M.shape[1]), col_counts)
    return permanent(M[np.ix_(rows, cols)], **kwargs)


def factorial_product(counts) -> int:
    return math.prod(math.factorial(c) for c in counts)
