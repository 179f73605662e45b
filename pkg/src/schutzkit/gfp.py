"""Exact linear algebra over the prime field GF(p)."""

from __future__ import annotations

import numpy as np


def rref(a, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``a`` mod ``p``.

    Pivot columns are taken left to right and the pivot row is the first
    remaining row with a nonzero entry, so the result is deterministic.
    """
    m = np.array(a, dtype=np.int64) % p
    if m.ndim != 2:
        raise ValueError("expected a matrix")
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            m[[r, k]] = m[[k, r]]
        m[r] = (m[r] * pow(int(m[r, c]), -1, p)) % p
        others = np.nonzero(m[:, c])[0]
        for i in others:
            if i != r:
                m[i] = (m[i] - m[i, c] * m[r]) % p
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a, p: int) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return len(rref(a, p)[1])


def solve(a, b, p: int) -> np.ndarray | None:
    """Solve ``a @ x == b`` mod ``p``; free variables are set to zero.

    Returns None when the system is inconsistent.
    """
    a = np.array(a, dtype=np.int64)
    if a.size == 0:
        a = np.zeros((len(b), a.shape[-1] if a.ndim == 2 else 0), dtype=np.int64)
    n = a.shape[1]
    aug = np.concatenate([a % p, (np.asarray(b, dtype=np.int64) % p).reshape(-1, 1)], axis=1)
    r, pivots = rref(aug, p)
    if n in pivots:
        return None
    x = np.zeros(n, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = r[i, n]
    return x


def lex_min_solution(a, b, p: int, priority=None) -> np.ndarray | None:
    """Lexicographically least solution of ``a @ x == b`` mod ``p``.

    ``priority`` lists variable indices from most to least significant
    (default: natural order). Variables are fixed greedily to the smallest
    value that keeps the system solvable.
    """
    a = np.array(a, dtype=np.int64) % p
    b = np.array(b, dtype=np.int64) % p
    n = a.shape[1]
    order = list(range(n)) if priority is None else list(priority)
    if solve(a, b, p) is None:
        return None
    x = np.zeros(n, dtype=np.int64)
    rows_a, rows_b = list(a), list(b)
    for var in order:
        for val in range(p):
            unit = np.zeros(n, dtype=np.int64)
            unit[var] = 1
            trial_a = np.array(rows_a + [unit])
            trial_b = np.array(rows_b + [val])
            if solve(trial_a, trial_b, p) is not None:
                rows_a.append(unit)
                rows_b.append(val)
                x[var] = val
                break
    return x
