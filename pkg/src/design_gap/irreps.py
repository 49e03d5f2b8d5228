"""Irreducible representations of S(t) in Young's orthogonal form.

Partitions are plain tuples of positive integers, tableaux are tuples of
rows with letters 1..t. Tableaux of a shape are kept in last-letter order:
the tableau whose largest differing letter sits in the lower row comes
first. For shape (2, 1) this gives ((1, 2), (3,)) before ((1, 3), (2,)).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .permgroup import Permutation, _check_degree, group_tables

Partition = tuple
Tableau = tuple


def check_partition(shape) -> Partition:
    shape = tuple(int(x) for x in shape)
    if not shape or any(x < 1 for x in shape) or any(a < b for a, b in zip(shape, shape[1:])):
        raise ValueError(f"{shape} is not a partition")
    return shape


def partitions(t: int, max_rows: int | None = None) -> list[Partition]:
    """Partitions of t in descending lexicographic order."""
    _check_degree(t)

    def gen(remaining, largest):
        if remaining == 0:
            yield ()
            return
        for first in range(min(remaining, largest), 0, -1):
            for rest in gen(remaining - first, first):
                yield (first,) + rest

    out = list(gen(t, t))
    if max_rows is not None:
        out = [p for p in out if len(p) <= max_rows]
    return out


def hook_length_dimension(shape: Partition) -> int:
    shape = check_partition(shape)
    conj = [sum(1 for r in shape if r > c) for c in range(shape[0])]
    hooks = 1
    for i, row in enumerate(shape):
        for j in range(row):
            hooks *= (row - j - 1) + (conj[j] - i - 1) + 1
    return math.factorial(sum(shape)) // hooks


@lru_cache(maxsize=None)
def _tableaux(shape: Partition) -> tuple[Tableau, ...]:
    n = sum(shape)
    if n == 0:
        return ((),)
    out = []
    # removable corners, bottom row first -> last-letter order
    for r in range(len(shape) - 1, -1, -1):
        if r == len(shape) - 1 or shape[r] > shape[r + 1]:
            smaller = list(shape)
            smaller[r] -= 1
            smaller = tuple(x for x in smaller if x > 0)
            for tab in _tableaux(smaller):
                rows = [list(row) for row in tab]
                if r < len(rows):
                    rows[r].append(n)
                else:
                    rows.append([n])
                out.append(tuple(tuple(row) for row in rows))
    return tuple(out)


def standard_tableaux(shape) -> tuple[list[Tableau], int]:
    """Standard Young tableaux of ``shape`` and their count d_shape."""
    shape = check_partition(shape)
    tabs = list(_tableaux(shape))
    return tabs, len(tabs)


def dimension(shape) -> int:
    return len(_tableaux(check_partition(shape)))


def _positions(tab: Tableau) -> dict[int, tuple[int, int]]:
    return {x: (r, c) for r, row in enumerate(tab) for c, x in enumerate(row)}


@lru_cache(maxsize=None)
def generator_matrices(shape: Partition) -> tuple[np.ndarray, ...]:
    """Matrices of the adjacent transpositions s_k = (k k+1), k = 0..t-2."""
    shape = check_partition(shape)
    tabs = _tableaux(shape)
    index = {tab: i for i, tab in enumerate(tabs)}
    t = sum(shape)
    d = len(tabs)
    mats = []
    for k in range(t - 1):
        a, b = k + 1, k + 2  # letters swapped by s_k
        m = np.zeros((d, d))
        for i, tab in enumerate(tabs):
            pos = _positions(tab)
            (ra, ca), (rb, cb) = pos[a], pos[b]
            axial = (cb - rb) - (ca - ra)
            m[i, i] = 1.0 / axial
            if abs(axial) > 1:
                swapped = tuple(
                    tuple(b if x == a else a if x == b else x for x in row) for row in tab
                )
                m[index[swapped], i] = math.sqrt(1.0 - 1.0 / axial**2)
        m.setflags(write=False)
        mats.append(m)
    return tuple(mats)


def young_orthogonal_rep(shape, p: Permutation) -> np.ndarray:
    """Real orthogonal matrix D^shape(p), with D(pq) = D(p) D(q)."""
    shape = check_partition(shape)
    if sum(shape) != p.degree:
        raise ValueError(f"shape {shape} does not match degree {p.degree}")
    gens = generator_matrices(shape)
    out = np.eye(dimension(shape))
    for k in p.adjacent_word():
        out = out @ gens[k]
    return out


@lru_cache(maxsize=None)
def rep_table(shape: Partition) -> np.ndarray:
    """D^shape(g) for every g in canonical group order, shape (t!, d, d)."""
    shape = check_partition(shape)
    tables = group_tables(sum(shape))
    out = np.stack([young_orthogonal_rep(shape, g) for g in tables.elements])
    out.setflags(write=False)
    return out


def multiplicity(shape, q: int) -> int:
    """Multiplicity of the irrep in the permutation action on (C^q)^{⊗t}.

    Hook-content formula: number of semistandard tableaux with entries <= q.
    """
    shape = check_partition(shape)
    if len(shape) > q:
        return 0
    conj = [sum(1 for r in shape if r > c) for c in range(shape[0])]
    num, den = 1, 1
    for i, row in enumerate(shape):
        for j in range(row):
            num *= q + j - i
            den *= (row - j - 1) + (conj[j] - i - 1) + 1
    return num // den


def qubit_multiplicity(shape) -> int:
    """lambda_1 - lambda_2 + 1 for shapes with at most two rows, else 0."""
    shape = check_partition(shape)
    if len(shape) > 2:
        return 0
    return shape[0] - (shape[1] if len(shape) == 2 else 0) + 1


def catalan(t: int) -> int:
    return math.comb(2 * t, t) // (t + 1)
