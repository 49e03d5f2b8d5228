"""Two-site Haar projector, the open chain X = sum_i P_{i,i+1}, and its ground space.

Vectors on the reduced space are coordinates in the product basis
R_{k_1} ⊗ ... ⊗ R_{k_n}, flattened row-major (site 0 most significant).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import irreps
from .commutant import RANK_CUTOFF, SiteBasis, e_operator, gram_matrix, site_basis
from .errors import ConsistencyError, ValidationError
from .permgroup import group_tables

THREADS_ENV = "DESIGN_GAP_THREADS"
# elements per work slab; keeps temporaries small next to the state vectors
CHUNK = 1 << 20


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class PairProjector:
    """P_{i,i+1} in the basis R_s ⊗ R_u (row index s * m + u).

    ``factor`` has orthonormal columns and P = factor @ factor.T; column k
    holds the expansion coefficients r_su of the k-th orthonormal two-site
    commutant element. The dense matrix is formed on first use.
    """

    t: int
    m: int
    factor: np.ndarray

    @property
    def rank(self) -> int:
        return self.factor.shape[1]

    @cached_property
    def matrix(self) -> np.ndarray:
        p = self.factor @ self.factor.T
        p = 0.5 * (p + p.T)
        p.setflags(write=False)
        return p

    def reflected(self) -> PairProjector:
        m = self.m
        swap = np.arange(m * m).reshape(m, m).T.ravel()
        return PairProjector(self.t, m, self.factor[swap])


def _whiten(gram: np.ndarray, cutoff: float = RANK_CUTOFF) -> np.ndarray:
    """Columns V / sqrt(w) over the numerical support of a PSD Gram matrix."""
    w, v = np.linalg.eigh(gram)
    keep = w > cutoff * w.max()
    return v[:, keep] / np.sqrt(w[keep])


def pair_projector(basis: SiteBasis) -> PairProjector:
    t, m = basis.t, basis.m
    o = basis.overlaps
    w_mat = np.einsum("sp,up->sup", o, o).reshape(m * m, -1)
    gram2 = gram_matrix(t, 4)
    drift = np.abs(w_mat.T @ w_mat - gram2).max()
    if drift > 1e-8 * max(1.0, gram2.max() / 256):
        raise ConsistencyError(f"pair overlaps disagree with the q=4 Gram matrix by {drift:.3e}")
    factor = w_mat @ _whiten(gram2)
    # orthonormal columns make factor @ factor.T an orthogonal projector
    err = np.abs(factor.T @ factor - np.eye(factor.shape[1])).max()
    if err > 1e-10:
        raise ConsistencyError(f"pair projector factor not orthonormal: deviation {err:.3e}")
    factor.setflags(write=False)
    return PairProjector(t, m, factor)


def corollary_pair_matrix(t: int) -> np.ndarray:
    """Pair projector in the irrep site basis, from group sums of irrep matrix elements.

    The two-site element E_ij^δ ⊗-expands with coefficients
    (d_δ/t!) sum_g D^δ_ij(g) D^α_kl(g) D^β_mn(g) on E_kl^α ⊗ E_mn^β.
    """
    n = group_tables(t).order
    two_row = irreps.partitions(t, max_rows=2)
    # columns of phi: D^α_kl(g) * sqrt(k_α), matching R_(α,k,l) = E_kl / sqrt(k_α)
    phi = np.concatenate(
        [
            irreps.rep_table(s).reshape(n, -1) * math.sqrt(irreps.qubit_multiplicity(s))
            for s in two_row
        ],
        axis=1,
    )
    gram4 = gram_matrix(t, 4)
    m2 = phi.shape[1] ** 2
    out = np.zeros((m2, m2))
    for delta in irreps.partitions(t):
        table = irreps.rep_table(delta)
        d = table.shape[1]
        k4 = float(e_operator(delta, 0, 0) @ gram4 @ e_operator(delta, 0, 0))
        if k4 < 0.5:
            continue
        rows = (d / n) * np.einsum("gx,gs,gu->xsu", table.reshape(n, -1), phi, phi)
        rows = rows.reshape(d * d, m2) / math.sqrt(k4)
        out += rows.T @ rows
    return out


def pair_expansion_deviation(t: int) -> float:
    reference = pair_projector(site_basis(t, "irrep")).matrix
    return float(np.abs(corollary_pair_matrix(t) - reference).max())


def pair_expansion_validate(t: int, tol: float = 1e-8) -> bool:
    dev = pair_expansion_deviation(t)
    if not dev <= tol:
        raise ValidationError(f"irrep-expansion pair projector mismatch for t={t}", dev)
    return True


def _ranges(n: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, n))
    edges = np.linspace(0, n, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


class ChainOperator:
    """Matrix-free X = sum_{i=0}^{n_sites-2} I ⊗ P_{i,i+1} ⊗ I on m^{n_sites} coordinates."""

    def __init__(self, pair: PairProjector, n_sites: int, workers: int | None = None):
        if n_sites < 2:
            raise ValueError("a chain needs at least two sites")
        self.pair = pair
        self.t = pair.t
        self.m = pair.m
        self.n_sites = n_sites
        self.n_terms = n_sites - 1
        self.dim = self.m**n_sites
        self.workers = default_workers() if workers is None else max(1, workers)
        mm = self.m * self.m
        # low-rank route only when it saves flops
        self._use_factor = 2 * pair.rank < mm
        self._ops = (pair.factor, pair.factor.T) if self._use_factor else (pair.matrix,)
        self._pool = None

    @property
    def shape(self) -> tuple[int, int]:
        return (self.dim, self.dim)

    def _mul_right(self, x2: np.ndarray) -> np.ndarray:
        # x2 (a, M) -> x2 @ P
        if self._use_factor:
            return (x2 @ self._ops[0]) @ self._ops[1]
        return x2 @ self._ops[0]

    def _mul_left(self, x: np.ndarray) -> np.ndarray:
        # x (..., M, b) -> P @ x
        if self._use_factor:
            return np.matmul(self._ops[0], np.matmul(self._ops[1], x))
        return np.matmul(self._ops[0], x)

    def apply_term(self, i: int, v: np.ndarray, out: np.ndarray) -> np.ndarray:
        """out += (P acting on sites i, i+1) v, in slabs of at most CHUNK elements."""
        m = self.m
        mm = m * m
        a = m**i
        b = m ** (self.n_sites - 2 - i)
        if b == 1:
            v2 = v.reshape(a, mm)
            o2 = out.reshape(a, mm)
            step = max(1, CHUNK // mm)
            slabs = [(r0, min(a, r0 + step)) for r0 in range(0, a, step)]

            def work(rng):
                for r0, r1 in slabs[rng[0] : rng[1]]:
                    o2[r0:r1] += self._mul_right(v2[r0:r1])

        else:
            v3 = v.reshape(a, mm, b)
            o3 = out.reshape(a, mm, b)
            bstep = min(b, max(1, CHUNK // mm))
            astep = max(1, CHUNK // (mm * bstep))
            slabs = [
                (a0, min(a, a0 + astep), b0, min(b, b0 + bstep))
                for a0 in range(0, a, astep)
                for b0 in range(0, b, bstep)
            ]

            def work(rng):
                for a0, a1, b0, b1 in slabs[rng[0] : rng[1]]:
                    o3[a0:a1, :, b0:b1] += self._mul_left(v3[a0:a1, :, b0:b1])

        self._run(work, _ranges(len(slabs), self.workers))
        return out

    def _run(self, fn, ranges) -> None:
        if len(ranges) == 1:
            fn(ranges[0])
            return
        if self._pool is None:
            self._pool = ThreadPoolExecutor(max_workers=self.workers)
        list(self._pool.map(fn, ranges))

    def apply(self, v: np.ndarray) -> np.ndarray:
        v = np.ascontiguousarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(f"vector of length {v.shape} does not match chain dimension {self.dim}")
        out = np.zeros(self.dim)
        for i in range(self.n_terms):
            self.apply_term(i, v, out)
        return out

    __call__ = apply

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.apply(np.asarray(v).ravel())

    def dense(self) -> np.ndarray:
        if self.dim > 8192:
            raise ValueError(f"dense chain of dimension {self.dim} is too large")
        p = self.pair.matrix
        m = self.m
        out = np.zeros((self.dim, self.dim))
        for i in range(self.n_terms):
            out += np.kron(np.kron(np.eye(m**i), p), np.eye(m ** (self.n_sites - 2 - i)))
        return out

    def reflected(self) -> ChainOperator:
        return ChainOperator(self.pair.reflected(), self.n_sites, self.workers)


def apply_chain(x: ChainOperator, v: np.ndarray) -> np.ndarray:
    return x.apply(v)


@dataclass(frozen=True)
class GroundSpace:
    """Span of the global permutation operators in reduced coordinates.

    Vectors are kept implicitly as combinations of unit product vectors
    ô_pi^{⊗n}; ``transform`` maps them to an orthonormal basis.
    """

    t: int
    n_sites: int
    site_vectors: np.ndarray  # (m, t!), columns o_pi / |o_pi|
    gram: np.ndarray  # scaled Gram of the product vectors
    transform: np.ndarray  # (t!, g)

    @property
    def m(self) -> int:
        return self.site_vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.m**self.n_sites

    @property
    def multiplicity(self) -> int:
        return self.transform.shape[1]

    def _products(self, sites: int) -> np.ndarray:
        """(m^sites, t!) table of prod_j o_pi[s_j] over the first ``sites`` sites."""
        o = self.site_vectors
        arr = o
        for _ in range(sites - 1):
            arr = (arr[:, None, :] * o[None, :, :]).reshape(-1, o.shape[1])
        return arr

    @cached_property
    def _halves(self) -> tuple[np.ndarray, np.ndarray]:
        # ô_pi^{⊗n} = head_pi ⊗ tail_pi; never materialized as t! full vectors
        h = self.n_sites // 2
        return self._products(h), self._products(self.n_sites - h)

    def overlaps(self, v: np.ndarray) -> np.ndarray:
        """<ô_pi^{⊗n}, v> for every pi."""
        head, tail = self._halves
        mat = np.asarray(v).reshape(head.shape[0], tail.shape[0])
        return np.einsum("xp,xp->p", head, mat @ tail)

    def _accumulate(self, c: np.ndarray, out: np.ndarray, sign: float) -> np.ndarray:
        head, tail = self._halves
        mat = out.reshape(head.shape[0], tail.shape[0])
        weighted = sign * (head * c)
        step = max(1, CHUNK // tail.shape[0])
        for r0 in range(0, head.shape[0], step):
            mat[r0 : r0 + step] += weighted[r0 : r0 + step] @ tail.T
        return out

    def combine(self, c: np.ndarray) -> np.ndarray:
        """sum_pi c_pi ô_pi^{⊗n}."""
        return self._accumulate(np.asarray(c, dtype=float), np.zeros(self.dim), 1.0)

    def coordinates(self, v: np.ndarray) -> np.ndarray:
        return self.transform.T @ self.overlaps(v)

    def project(self, v: np.ndarray) -> np.ndarray:
        return self.combine(self.transform @ self.coordinates(v))

    def project_out(self, v: np.ndarray) -> np.ndarray:
        out = np.array(v, dtype=float)
        return self.project_out_inplace(out)

    def project_out_inplace(self, v: np.ndarray) -> np.ndarray:
        """Overwrite a contiguous float vector with its component off the ground space."""
        return self._accumulate(self.transform @ self.coordinates(v), v, -1.0)

    def vector(self, a: int) -> np.ndarray:
        return self.combine(self.transform[:, a])

    def vectors(self) -> np.ndarray:
        return np.stack([self.vector(a) for a in range(self.multiplicity)])


def ground_space(t: int, n_sites: int, basis: SiteBasis | None = None) -> GroundSpace:
    if n_sites < 2:
        raise ValueError("n_sites must be >= 2")
    basis = site_basis(t) if basis is None else basis
    o = basis.overlaps / np.sqrt(2.0**t)
    gram = gram_matrix(t, 2.0**n_sites, scaled=True)
    transform = _whiten(gram)
    for arr in (o, gram, transform):
        arr.setflags(write=False)
    return GroundSpace(t, n_sites, o, gram, transform)
