from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from design_gap.errors import UnsupportedDegreeError
from design_gap.permgroup import (
    MAX_DEGREE,
    Permutation,
    compose,
    cycle_count,
    enumerate_group,
    group_tables,
    inverse,
)


def perms(t_min=1, t_max=MAX_DEGREE):
    return st.integers(t_min, t_max).flatmap(lambda t: st.permutations(range(t)).map(Permutation))


def same_degree_pair():
    return st.integers(1, MAX_DEGREE).flatmap(
        lambda t: st.tuples(*(st.permutations(range(t)).map(Permutation) for _ in range(3)))
    )


def test_group_order_and_identity_first():
    for t in range(1, MAX_DEGREE + 1):
        g = enumerate_group(t)
        assert len(g) == math.factorial(t)
        assert g[0].is_identity()
        assert len(set(g)) == len(g)


def test_enumeration_is_lexicographic():
    g = enumerate_group(4)
    assert [p.images for p in g] == sorted(p.images for p in g)


def test_degree_limits():
    with pytest.raises(UnsupportedDegreeError):
        enumerate_group(0)
    with pytest.raises(UnsupportedDegreeError):
        enumerate_group(MAX_DEGREE + 1)


def test_compose_convention():
    p = Permutation((1, 2, 0))
    q = Permutation.transposition(3, 0, 1)
    assert compose(p, q).images == (p(q(0)), p(q(1)), p(q(2)))
    with pytest.raises(ValueError):
        compose(p, Permutation.identity(2))


def test_invalid_images_rejected():
    with pytest.raises(ValueError):
        Permutation((0, 0, 1))


def test_cycle_counts():
    assert cycle_count(Permutation.identity(5)) == 5
    assert cycle_count(Permutation.from_cycle(4, (0, 1, 2, 3))) == 1
    assert cycle_count(Permutation((1, 0, 3, 2))) == 2


@given(same_degree_pair())
def test_composition_associative(triple):
    a, b, c = triple
    assert compose(compose(a, b), c) == compose(a, compose(b, c))


@given(perms())
def test_inverse(p):
    e = Permutation.identity(p.degree)
    assert compose(p, inverse(p)) == e
    assert compose(inverse(p), p) == e


@given(same_degree_pair())
def test_cycles_invariant_under_conjugation(triple):
    p, g, _ = triple
    assert cycle_count(compose(compose(g, p), inverse(g))) == cycle_count(p)


@given(same_degree_pair())
def test_sign_is_multiplicative(triple):
    a, b, _ = triple
    assert compose(a, b).sign() == a.sign() * b.sign()


@given(perms())
def test_adjacent_word_reconstructs(p):
    out = Permutation.identity(p.degree)
    for k in p.adjacent_word():
        out = compose(out, Permutation.transposition(p.degree, k, k + 1))
    assert out == p
    # bubble sort gives a reduced word: length = number of inversions
    inv = sum(1 for i in range(p.degree) for j in range(i + 1, p.degree) if p.images[i] > p.images[j])
    assert len(p.adjacent_word()) == inv


def test_group_tables_consistent():
    tab = group_tables(4)
    els = tab.elements
    rng = np.random.default_rng(0)
    for i, j in rng.integers(0, tab.order, size=(50, 2)):
        assert els[tab.product[i, j]] == compose(els[i], els[j])
        assert els[tab.inverse[i]] == inverse(els[i])
        assert tab.cycles[i] == cycle_count(els[i])
