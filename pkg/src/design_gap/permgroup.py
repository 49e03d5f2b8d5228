"""Small symmetric groups S(t) in one-line form.

Every matrix indexed by S(t) in this package uses the order returned by
:func:`enumerate_group` (lexicographic in one-line form, identity first).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import UnsupportedDegreeError

MAX_DEGREE = 6


@dataclass(frozen=True, order=True)
class Permutation:
    """Bijection of {0, ..., t-1} stored as its tuple of images."""

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(x) for x in self.images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"{images} is not a permutation of 0..{len(images) - 1}")
        object.__setattr__(self, "images", images)

    @property
    def degree(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, t: int) -> Permutation:
        return cls(tuple(range(t)))

    @classmethod
    def transposition(cls, t: int, i: int, j: int) -> Permutation:
        images = list(range(t))
        images[i], images[j] = j, i
        return cls(tuple(images))

    @classmethod
    def from_cycle(cls, t: int, cycle) -> Permutation:
        """Permutation sending cycle[0] -> cycle[1] -> ... -> cycle[0]."""
        images = list(range(t))
        for a, b in zip(cycle, cycle[1:] + type(cycle)(cycle[:1])):
            images[a] = b
        return cls(tuple(images))

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __mul__(self, other: Permutation) -> Permutation:
        return compose(self, other)

    def is_identity(self) -> bool:
        return all(i == x for i, x in enumerate(self.images))

    def sign(self) -> int:
        return -1 if (self.degree - cycle_count(self)) % 2 else 1

    def adjacent_word(self) -> list[int]:
        """Indices k such that p = s_{k_1} s_{k_2} ... with s_k = (k k+1).

        Obtained by bubble-sorting the one-line form.
        """
        q = list(self.images)
        swaps = []
        done = False
        while not done:
            done = True
            for i in range(len(q) - 1):
                if q[i] > q[i + 1]:
                    q[i], q[i + 1] = q[i + 1], q[i]
                    swaps.append(i)
                    done = False
        # p o s_{w1} o ... o s_{wm} = id, hence p = s_{wm} o ... o s_{w1}
        return swaps[::-1]


def _check_degree(t: int) -> None:
    if not (1 <= t <= MAX_DEGREE):
        raise UnsupportedDegreeError(f"degree t={t} outside supported range 1..{MAX_DEGREE}")


def enumerate_group(t: int) -> list[Permutation]:
    """All t! permutations in lexicographic order of their one-line form."""
    return list(_group(t))


@lru_cache(maxsize=None)
def _group(t: int) -> tuple[Permutation, ...]:
    _check_degree(t)
    return tuple(Permutation(p) for p in itertools.permutations(range(t)))


def compose(p: Permutation, q: Permutation) -> Permutation:
    """The permutation x -> p(q(x))."""
    if p.degree != q.degree:
        raise ValueError(f"degree mismatch: {p.degree} vs {q.degree}")
    return Permutation(tuple(p.images[x] for x in q.images))


def inverse(p: Permutation) -> Permutation:
    images = [0] * p.degree
    for i, x in enumerate(p.images):
        images[x] = i
    return Permutation(tuple(images))


def cycle_count(p: Permutation) -> int:
    """Number of cycles, fixed points included."""
    seen = [False] * p.degree
    count = 0
    for start in range(p.degree):
        if seen[start]:
            continue
        count += 1
        j = start
        while not seen[j]:
            seen[j] = True
            j = p.images[j]
    return count


@dataclass(frozen=True)
class GroupTables:
    """Index-level multiplication data for S(t) in canonical order."""

    t: int
    elements: tuple[Permutation, ...]
    product: np.ndarray  # product[i, j] = index of compose(g_i, g_j)
    inverse: np.ndarray
    cycles: np.ndarray
    index: dict

    @property
    def order(self) -> int:
        return len(self.elements)


@lru_cache(maxsize=None)
def group_tables(t: int) -> GroupTables:
    elements = _group(t)
    index = {g.images: i for i, g in enumerate(elements)}
    n = len(elements)
    product = np.empty((n, n), dtype=np.intp)
    for i, g in enumerate(elements):
        for j, h in enumerate(elements):
            product[i, j] = index[tuple(g.images[x] for x in h.images)]
    inv = np.array([index[inverse(g).images] for g in elements], dtype=np.intp)
    cycles = np.array([cycle_count(g) for g in elements], dtype=np.intp)
    for arr in (product, inv, cycles):
        arr.setflags(write=False)
    return GroupTables(t, elements, product, inv, cycles, index)
