"""Brute-force ground truth on the full Hilbert space, plus Haar Monte Carlo.

Full-space vectors are vectorized operators X on t copies of an n-qubit
register, flattened row-major. Binary axis ``c * n + q`` is the row bit of
qubit q in copy c; axis ``t * n + c * n + q`` is the matching column bit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .chain import ground_space
from .commutant import gram_matrix, site_basis
from .eigensolve import DEFAULT_SEED, GapResult, is_projector_onto
from .errors import ConsistencyError, ResourceError
from .permgroup import _check_degree, enumerate_group

RNG_FAMILY = "numpy.Philox-4x64"
FULL_QUBIT_CAP = 18  # 2 * t * n_sites
DENSE_FULL_LIMIT = 4096


@dataclass(frozen=True)
class HaarSampler:
    """Reproducible source of Haar unitaries.

    Sample number ``counter`` is drawn from a Philox stream keyed by ``seed``
    whose top counter word equals ``counter``, so distinct counters never
    share random bits and any range of counters can be drawn independently.
    """

    dimension: int
    seed: int = DEFAULT_SEED
    counter: int = 0

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.counter < 0:
            raise ValueError("counter must be non-negative")

    def at(self, counter: int) -> HaarSampler:
        return HaarSampler(self.dimension, self.seed, counter)

    def generator(self) -> np.random.Generator:
        bits = np.random.Philox(key=self.seed, counter=[0, 0, 0, self.counter])
        return np.random.Generator(bits)


def haar_unitary(s: HaarSampler) -> np.ndarray:
    """Ginibre matrix, QR, then R's diagonal phases moved into Q."""
    rng = s.generator()
    d = s.dimension
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def permutation_operator(p, local_dim: int) -> np.ndarray:
    """V_p on (C^local_dim)^{⊗t}, sending copy c to copy p(c)."""
    images = p.images if hasattr(p, "images") else tuple(p)
    t = len(images)
    size = local_dim**t
    eye = np.eye(size).reshape((local_dim,) * t + (size,))
    # row axis p(c) carries the column index of copy c
    perm = [0] * t
    for c, pc in enumerate(images):
        perm[pc] = c
    return np.transpose(eye, perm + [t]).reshape(size, size)


def _commutant_vectors(t: int, local_dim: int) -> np.ndarray:
    return np.stack([permutation_operator(g, local_dim).ravel() for g in enumerate_group(t)])


def full_space_pair_projector(t: int) -> np.ndarray:
    """Haar twirl of one two-qubit gate, t copies, on the 4^{2t}-dim vectorized space.

    Equals sum_{pi, sigma} (G_2^+)_{pi sigma} |vec V_pi><vec V_sigma| with
    V_pi permuting t copies of C^4.
    """
    _check_degree(t)
    if t > 3:
        raise ResourceError(f"dense two-qubit projector for t={t} has dimension {16**t}", 16**t)
    w = _commutant_vectors(t, 4)
    g = gram_matrix(t, 4)
    evals, evecs = np.linalg.eigh(g)
    keep = evals > 1e-9 * evals.max()
    f = (evecs[:, keep] / np.sqrt(evals[keep])).T @ w  # orthonormal rows
    p = f.T @ f
    return 0.5 * (p + p.T)


def commutation_deviation(t: int, proj: np.ndarray | None = None) -> float:
    """max |[P, V_pi ⊗ V_pi]| over pi, in the vectorized gate space."""
    proj = full_space_pair_projector(t) if proj is None else proj
    worst = 0.0
    for g in enumerate_group(t):
        # V ⊗ V is a permutation matrix: (B x)_i = x[idx[i]]
        src = permutation_operator(g, 4).argmax(axis=1)
        idx = (src[:, None] * src.size + src[None, :]).ravel()
        inv = np.argsort(idx)
        worst = max(worst, float(np.abs(proj[:, inv] - proj[idx, :]).max()))
    return worst


def one_term_check(t: int) -> tuple[float, float]:
    """Top eigenvalue of the one-gate moment operator and the distance of its
    top eigenspace from the vectorized commutant span."""
    proj = full_space_pair_projector(t)
    w, v = np.linalg.eigh(proj)
    top = float(w[-1])
    vecs = v[:, w > top - 1e-8]
    span = _commutant_vectors(t, 4)
    q, _ = np.linalg.qr(span.T)
    q = q[:, : np.linalg.matrix_rank(span)]
    outside = vecs - q @ (q.T @ vecs)
    return top, float(np.abs(outside).max())


class FullChain:
    """sum_i P_{i,i+1} acting on full vectorized t-copy operators of n qubits."""

    def __init__(self, t: int, n_sites: int):
        _check_degree(t)
        if n_sites < 2:
            raise ValueError("n_sites must be >= 2")
        bits = 2 * t * n_sites
        if bits > FULL_QUBIT_CAP:
            raise ResourceError(
                f"full space for t={t}, {n_sites} sites has dimension 2^{bits} (cap 2^{FULL_QUBIT_CAP})",
                2**bits,
            )
        self.t = t
        self.n_sites = n_sites
        self.n_terms = n_sites - 1
        self.bits = bits
        self.dim = 2**bits
        self.pair = full_space_pair_projector(t)
        # gate-layout axis order for sites (i, i+1): rows copy-major then columns
        self._axes = []
        for i in range(self.n_terms):
            rows = [c * n_sites + q for c in range(t) for q in (i, i + 1)]
            cols = [t * n_sites + a for a in rows]
            self._axes.append(rows + cols)

    def apply_term(self, i: int, v: np.ndarray) -> np.ndarray:
        """P_{i,i+1} v for a vector or a (dim, batch) block of vectors."""
        batch = v.shape[1:]
        axes = self._axes[i]
        rest = [a for a in range(self.bits) if a not in axes] + list(range(self.bits, self.bits + len(batch)))
        order = axes + rest
        tens = np.transpose(v.reshape((2,) * self.bits + batch), order).reshape(self.pair.shape[0], -1)
        out = (self.pair @ tens).reshape((2,) * self.bits + batch)
        return np.transpose(out, np.argsort(order)).reshape(v.shape)

    def apply(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = np.zeros(v.shape)
        for i in range(self.n_terms):
            out += self.apply_term(i, v)
        return out

    def dense(self) -> np.ndarray:
        if self.dim > DENSE_FULL_LIMIT:
            raise ResourceError(f"dense full-space chain of dimension {self.dim}", self.dim)
        return self.apply(np.eye(self.dim))

    def ground_vectors(self) -> np.ndarray:
        """Orthonormal basis (rows) of span{vec V_pi} on t copies of C^{2^n}."""
        t, n = self.t, self.n_sites
        raw = _commutant_vectors(t, 2**n)
        gram = gram_matrix(t, 2.0**n, scaled=True)
        evals, evecs = np.linalg.eigh(gram)
        keep = evals > 1e-9 * evals.max()
        scale = math.sqrt(2.0 ** (n * t))
        return (evecs[:, keep] / np.sqrt(evals[keep])).T @ raw / scale


def full_space_gap(t: int, n_sites: int, tol: float = 1e-12, seed: int = DEFAULT_SEED) -> GapResult:
    """Gap of sum_i (I - P_{i,i+1}) assembled on the full 2^{2 t n_sites} space."""
    start = time.perf_counter()
    chain = FullChain(t, n_sites)
    k = chain.n_terms
    ground = chain.ground_vectors()
    g = ground.shape[0]
    top_res = float(np.abs(chain.apply(ground[0]) - k * ground[0]).max())
    if top_res > 1e-9:
        raise ConsistencyError(f"full-space ground vector residual {top_res:.3e}")

    if chain.dim <= DENSE_FULL_LIMIT:
        x = chain.dense()
        x = 0.5 * (x + x.T)
        # the top g + 1 eigenpairs settle both the multiplicity and lambda_2
        w, vecs = sla.eigh(x, subset_by_index=[chain.dim - g - 1, chain.dim - 1])
        lam_max = float(w[-1])
        mult = int(np.sum(w > k - 1e-8))
        if abs(lam_max - k) > 1e-9 or mult != g:
            raise ConsistencyError(f"top eigenvalue {lam_max} x {mult}, expected {k} x {g}")
        lam2 = float(w[0])
        vec = vecs[:, 0]
        if k == 1 and is_projector_onto(x, g):
            lam2 = 0.0
        residual = float(np.linalg.norm(x @ vec - lam2 * vec))
        solver, iterations = "dense", chain.dim
    else:
        counter = {"n": 0}

        def deflated(v):
            counter["n"] += 1
            v = np.asarray(v).ravel()
            v = v - ground.T @ (ground @ v)
            y = chain.apply(v)
            return y - ground.T @ (ground @ y)

        op = spla.LinearOperator((chain.dim, chain.dim), matvec=deflated, dtype=float)
        v0 = np.random.default_rng(seed).standard_normal(chain.dim)
        vals, vecs = spla.eigsh(op, k=1, which="LA", tol=tol, v0=v0, ncv=40, maxiter=5000)
        lam2 = float(vals[0])
        vec = vecs[:, 0]
        residual = float(np.linalg.norm(deflated(vec) - lam2 * vec))
        lam_max = float(k)
        solver, iterations = "iterative", counter["n"]
    return GapResult(
        t=t,
        n_terms=k,
        n_sites=n_sites,
        lambda_max=lam_max,
        lambda2=lam2,
        gap=k - lam2,
        residual=residual,
        solver=f"full-{solver}",
        dim=chain.dim,
        iterations=iterations,
        wall_seconds=time.perf_counter() - start,
        seed=seed,
        ground_multiplicity=g,
        convention="k=local-terms;open-boundary;full-space",
    )


@dataclass
class MonteCarloEstimate:
    matrix: np.ndarray
    stderr: float  # Frobenius norm of the entrywise standard errors
    samples: int
    seed: int
    first_counter: int
    rng_family: str = RNG_FAMILY


def moment_sample(u: np.ndarray, t: int) -> np.ndarray:
    """U^{⊗t} ⊗ conj(U)^{⊗t}."""
    ut = u
    for _ in range(t - 1):
        ut = np.kron(ut, u)
    return np.kron(ut, ut.conj())


def mc_pair_projector(t: int, samples: int, s: HaarSampler | None = None) -> MonteCarloEstimate:
    """Empirical average of U^{⊗t} ⊗ Ū^{⊗t} over Haar two-qubit gates.

    Samples use counters s.counter, s.counter + 1, ... and are accumulated in
    fixed order, so a given sampler always yields the same estimate.
    """
    if not (1 <= t <= 3):
        raise ValueError("Monte Carlo moment estimate supports 1 <= t <= 3")
    if samples < 1:
        raise ValueError("samples must be positive")
    s = HaarSampler(4, DEFAULT_SEED, 0) if s is None else s
    if s.dimension != 4:
        raise ValueError("two-qubit gates need a sampler of dimension 4")
    size = 16**t
    total = np.zeros((size, size), dtype=complex)
    total_sq = np.zeros((size, size))
    for c in range(s.counter, s.counter + samples):
        m = moment_sample(haar_unitary(s.at(c)), t)
        total += m
        total_sq += m.real**2 + m.imag**2
    mean = total / samples
    var = np.maximum(total_sq / samples - np.abs(mean) ** 2, 0.0)
    stderr = float(np.sqrt(var.sum() / max(1, samples - 1)))
    return MonteCarloEstimate(mean, stderr, samples, s.seed, s.counter)


def mc_distance(t: int, samples: int, s: HaarSampler, exact: np.ndarray | None = None) -> float:
    exact = full_space_pair_projector(t) if exact is None else exact
    est = mc_pair_projector(t, samples, s)
    return float(np.linalg.norm(est.matrix - exact))


def mc_scaling_ratios(
    t: int = 2, samples: int = 200, trials: int = 10, seed: int = DEFAULT_SEED
) -> np.ndarray:
    """distance(4N) / distance(N) for independent trials on disjoint counter ranges."""
    exact = full_space_pair_projector(t)
    ratios = np.empty(trials)
    base = HaarSampler(4, seed, 0)
    block = 5 * samples
    for i in range(trials):
        small = mc_distance(t, samples, base.at(i * block), exact)
        large = mc_distance(t, 4 * samples, base.at(i * block + samples), exact)
        ratios[i] = large / small
    return ratios


def reduced_vs_full(t: int, n_sites: int) -> tuple[float, float]:
    """Gaps from the reduced chain and the full-space construction."""
    from .eigensolve import spectral_gap

    reduced = spectral_gap(t, n_sites - 1).gap
    full = full_space_gap(t, n_sites).gap
    return reduced, full


def ground_multiplicity(t: int, n_sites: int) -> int:
    return ground_space(t, n_sites, site_basis(t)).multiplicity
