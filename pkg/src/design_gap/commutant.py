"""Permutation-operator Gram calculus and orthonormal bases of the site commutant.

Operators in the span of {V_pi : pi in S(t)} are handled as coefficient
vectors over S(t) (canonical group order). The Hilbert-Schmidt product of
two such operators on (C^q)^{⊗t} is ``a @ gram_matrix(t, q) @ b`` since
Tr(V_pi^T V_sigma) = q^{#cycles(pi^-1 sigma)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import irreps
from .errors import ConsistencyError
from .permgroup import _check_degree, group_tables

RANK_CUTOFF = 1e-9


def gram_matrix(t: int, q: float, scaled: bool = False) -> np.ndarray:
    """Hilbert-Schmidt Gram matrix of permutation operators on (C^q)^{⊗t}.

    With ``scaled=True`` every entry is divided by q^t (unit diagonal), which
    keeps large effective dimensions q finite.
    """
    _check_degree(t)
    if q < 2:
        raise ValueError(f"local dimension q={q} must be >= 2")
    tables = group_tables(t)
    # cycles of pi^-1 sigma for all pairs
    idx = tables.product[tables.inverse[:, None], np.arange(tables.order)[None, :]]
    cyc = tables.cycles[idx]
    if scaled:
        return np.power(float(q), (cyc - t).astype(float))
    if t * math.log2(q) > 63:
        raise OverflowError(f"q^t = {q}^{t} exceeds 2^63; use scaled=True")
    return np.power(float(q), cyc.astype(float))


def pseudo_inverse(gram: np.ndarray, cutoff: float = RANK_CUTOFF) -> np.ndarray:
    w, v = np.linalg.eigh(gram)
    keep = w > cutoff * w.max()
    return (v[:, keep] / w[keep]) @ v[:, keep].T


def numerical_rank(gram: np.ndarray, cutoff: float = RANK_CUTOFF) -> int:
    w = np.linalg.eigvalsh(gram)
    return int(np.sum(w > cutoff * w.max()))


def hs_inner(a: np.ndarray, b: np.ndarray, gram: np.ndarray) -> float:
    return float(a @ gram @ b)


@dataclass(frozen=True)
class SiteBasis:
    """Orthonormal basis R_k = sum_pi coefficients[k, pi] V_pi of the qubit commutant."""

    t: int
    method: str
    coefficients: np.ndarray  # (m, t!)
    gram: np.ndarray  # q = 2
    overlaps: np.ndarray  # (m, t!), <R_k, V_pi>

    @property
    def m(self) -> int:
        return self.coefficients.shape[0]

    def projector(self) -> np.ndarray:
        """B^T B, the Gram pseudo-inverse for any orthonormal spanning basis."""
        return self.coefficients.T @ self.coefficients


def _fix_signs(vecs: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    # columns: first component with magnitude above tol made positive
    out = vecs.copy()
    for k in range(out.shape[1]):
        nz = np.flatnonzero(np.abs(out[:, k]) > tol)
        if nz.size and out[nz[0], k] < 0:
            out[:, k] *= -1
    return out


@lru_cache(maxsize=None)
def site_basis(t: int, method: str = "gram-eigen") -> SiteBasis:
    """Orthonormal operator basis of span{V_pi} on t qubit copies.

    ``gram-eigen`` whitens the Gram eigenvectors (descending eigenvalue,
    sign-fixed). ``irrep`` uses E_ij^lambda / sqrt(k_lambda) over two-row
    shapes, shape order then row-major (i, j).
    """
    _check_degree(t)
    gram = gram_matrix(t, 2)
    if method == "gram-eigen":
        w, v = np.linalg.eigh(gram)
        order = np.argsort(-w, kind="stable")
        w, v = w[order], v[:, order]
        keep = w > RANK_CUTOFF * w[0]
        v = _fix_signs(v[:, keep])
        coeffs = (v / np.sqrt(w[keep])).T
    elif method == "irrep":
        rows = []
        for shape in irreps.partitions(t, max_rows=2):
            k = irreps.qubit_multiplicity(shape)
            d = irreps.dimension(shape)
            for i in range(d):
                for j in range(d):
                    rows.append(e_operator(shape, i, j) / math.sqrt(k))
        coeffs = np.array(rows)
    else:
        raise ValueError(f"unknown site-basis method {method!r}")
    if coeffs.shape[0] != irreps.catalan(t):
        raise ConsistencyError(f"site basis rank {coeffs.shape[0]} != Catalan({t}) = {irreps.catalan(t)}")
    coeffs.setflags(write=False)
    overlaps = coeffs @ gram
    overlaps.setflags(write=False)
    gram.setflags(write=False)
    return SiteBasis(t, method, coeffs, gram, overlaps)


def e_operator(shape, i: int, j: int) -> np.ndarray:
    """Coefficients of E_ij = (d/t!) sum_g D_ji(g^-1) V_g (0-based i, j).

    For the real orthogonal Young form D_ji(g^-1) = D_ij(g).
    """
    shape = irreps.check_partition(shape)
    table = irreps.rep_table(shape)
    d = table.shape[1]
    if not (0 <= i < d and 0 <= j < d):
        raise IndexError(f"index ({i}, {j}) outside irrep dimension {d}")
    return (d / table.shape[0]) * table[:, i, j]


def e_operator_all(t: int) -> tuple[list[tuple], np.ndarray]:
    """Labels (shape, i, j) and coefficient rows of every E_ij^shape of S(t)."""
    labels, rows = [], []
    for shape in irreps.partitions(t):
        table = irreps.rep_table(shape)
        d = table.shape[1]
        for i in range(d):
            for j in range(d):
                labels.append((shape, i, j))
                rows.append((d / table.shape[0]) * table[:, i, j])
    return labels, np.array(rows)


def identity_indicator(t: int) -> np.ndarray:
    out = np.zeros(group_tables(t).order)
    out[0] = 1.0
    return out


def convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Group-algebra product: (a*b)_tau = sum_pi a_pi b_{pi^-1 tau}."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError("coefficient vectors of different degree")
    t = next(k for k in range(1, 8) if math.factorial(k) == n)
    prod = group_tables(t).product
    return np.bincount(prod.ravel(), weights=np.outer(a, b).ravel(), minlength=n)


def operators_equal_mod_kernel(a: np.ndarray, b: np.ndarray, gram: np.ndarray) -> bool:
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    scale = max(1.0, float(a @ gram @ a))
    return float(diff @ gram @ diff) < 1e-18 * scale
