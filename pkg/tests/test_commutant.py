from __future__ import annotations

import math

import numpy as np
import pytest

from design_gap import irreps
from design_gap.commutant import (
    convolve,
    e_operator,
    e_operator_all,
    gram_matrix,
    identity_indicator,
    numerical_rank,
    operators_equal_mod_kernel,
    pseudo_inverse,
    site_basis,
)
from design_gap.errors import UnsupportedDegreeError
from design_gap.permgroup import enumerate_group


def test_gram_t2():
    np.testing.assert_array_equal(gram_matrix(2, 2), [[4, 2], [2, 4]])
    np.testing.assert_array_equal(gram_matrix(2, 4), [[16, 4], [4, 16]])


def test_gram_scaled_and_overflow():
    np.testing.assert_allclose(gram_matrix(3, 8, scaled=True), gram_matrix(3, 8) / 8**3)
    big = gram_matrix(5, 2.0**40, scaled=True)
    assert np.all(np.diag(big) == 1.0)
    with pytest.raises(OverflowError):
        gram_matrix(5, 2.0**40)
    with pytest.raises(ValueError):
        gram_matrix(2, 1)
    with pytest.raises(UnsupportedDegreeError):
        gram_matrix(7, 2)


@pytest.mark.parametrize("t", [2, 3, 4, 5])
def test_ranks_are_catalan(t):
    assert numerical_rank(gram_matrix(t, 2)) == irreps.catalan(t)
    # q >= t: permutation operators are independent
    assert numerical_rank(gram_matrix(t, 4 if t <= 4 else 8)) == math.factorial(t)


def test_pseudo_inverse():
    g = gram_matrix(4, 2)
    gp = pseudo_inverse(g)
    np.testing.assert_allclose(g @ gp @ g, g, atol=1e-9 * np.abs(g).max())


@pytest.mark.parametrize("t", [2, 3, 4, 5])
@pytest.mark.parametrize("method", ["gram-eigen", "irrep"])
def test_site_basis_orthonormal(t, method):
    b = site_basis(t, method)
    assert b.m == irreps.catalan(t)
    hs = b.coefficients @ b.gram @ b.coefficients.T
    np.testing.assert_allclose(hs, np.eye(b.m), atol=1e-10)


@pytest.mark.parametrize("t", [2, 3, 4, 5])
def test_site_basis_methods_share_projector(t):
    a = site_basis(t, "gram-eigen").projector()
    b = site_basis(t, "irrep").projector()
    assert np.abs(a - b).max() < 1e-10


def test_site_basis_t2_values():
    b = site_basis(2)
    # eigenvalues 6 and 2 of [[4, 2], [2, 4]]
    s = 1 / math.sqrt(2)
    np.testing.assert_allclose(b.coefficients, [[s / math.sqrt(6), s / math.sqrt(6)], [s / math.sqrt(2), -s / math.sqrt(2)]], atol=1e-14)


def test_unknown_method():
    with pytest.raises(ValueError):
        site_basis(3, "schur")


def test_e_operator_indices():
    with pytest.raises(IndexError):
        e_operator((2, 1), 2, 0)
    e = e_operator((3,), 0, 0)
    np.testing.assert_allclose(e, np.full(6, 1 / 6))


@pytest.mark.parametrize("t", [2, 3, 4])
def test_e_operator_orthogonality(t):
    labels, rows = e_operator_all(t)
    hs = rows @ gram_matrix(t, 2) @ rows.T
    expected = np.diag([irreps.qubit_multiplicity(s) for s, _, _ in labels]).astype(float)
    np.testing.assert_allclose(hs, expected, atol=1e-9)


@pytest.mark.parametrize("t", [2, 3, 4])
def test_e_operator_composition(t):
    labels, rows = e_operator_all(t)
    index = {lab: a for a, lab in enumerate(labels)}
    rng = np.random.default_rng(t)
    picks = rng.integers(0, len(labels), size=(min(400, len(labels) ** 2), 2))
    for a, b in picks:
        s1, i, j = labels[a]
        s2, k, l = labels[b]
        prod = convolve(rows[a], rows[b])
        target = rows[index[(s1, i, l)]] if (s1 == s2 and j == k) else 0.0
        np.testing.assert_allclose(prod, target, atol=1e-12)


@pytest.mark.parametrize("t", [2, 3, 4])
def test_e_operators_resolve_identity(t):
    labels, rows = e_operator_all(t)
    diag = sum(rows[a] for a, (_, i, j) in enumerate(labels) if i == j)
    np.testing.assert_allclose(diag, identity_indicator(t), atol=1e-12)


def test_convolve_matches_composition():
    t = 3
    g = enumerate_group(t)
    a = np.zeros(6)
    b = np.zeros(6)
    a[3], b[4] = 1.0, 1.0
    from design_gap.permgroup import compose

    prod = convolve(a, b)
    assert prod[g.index(compose(g[3], g[4]))] == 1.0
    assert prod.sum() == 1.0


def test_operators_equal_mod_kernel():
    g = gram_matrix(3, 2)
    # the antisymmetrizer vanishes on qubits
    sign = np.array([p.sign() for p in enumerate_group(3)], dtype=float)
    a = np.eye(6)[0]
    assert operators_equal_mod_kernel(a, a + sign, g)
    assert not operators_equal_mod_kernel(a, a + np.eye(6)[1], g)
