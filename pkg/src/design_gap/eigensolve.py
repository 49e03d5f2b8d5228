"""Extremal eigenvalues of the chain operator and the resulting spectral gaps."""

from __future__ import annotations

import logging
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .chain import CHUNK, ChainOperator, GroundSpace, ground_space, pair_projector
from .commutant import site_basis
from .errors import ConsistencyError, ConvergenceError, ResourceError, UnsupportedDegreeError

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_SEED = 20130422
DENSE_LIMIT = 4096
RESTART_CAP = 48
MAX_APPLIES = 10_000
# the smallest restart length still used when memory is short
MIN_CAP = 6
# state vectors beyond the Krylov basis: residual, operator image, Ritz vector and slack
WORK_VECTORS = 5
PHYSICAL_FRACTION = 0.8
CONVENTION = "k=local-terms;open-boundary"

# number of iterative/dense eigensolves performed in this process
solve_counter = {"dense": 0, "iterative": 0}


@dataclass
class GapResult:
    t: int
    n_terms: int
    n_sites: int
    lambda_max: float
    lambda2: float
    gap: float
    residual: float
    solver: str
    dim: int
    iterations: int
    wall_seconds: float
    seed: int = DEFAULT_SEED
    ground_multiplicity: int = 0
    convention: str = CONVENTION

    def to_json_dict(self) -> dict:
        d = asdict(self)
        return {
            "t": d["t"],
            "terms": d["n_terms"],
            "sites": d["n_sites"],
            "lambda_max": d["lambda_max"],
            "lambda2": d["lambda2"],
            "gap": d["gap"],
            "residual": d["residual"],
            "solver": d["solver"],
            "dim": d["dim"],
            "iterations": d["iterations"],
            "wall_seconds": d["wall_seconds"],
            "seed": d["seed"],
            "convention": d["convention"],
        }


def dense_spectrum(a: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of the symmetrized input."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if a.shape[0] > 8192:
        raise ResourceError(f"dense spectrum limited to dimension 8192, got {a.shape[0]}", a.shape[0])
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return np.linalg.eigvalsh(0.5 * (a + a.T))


def is_projector_onto(x: np.ndarray, rank: int, tol: float = 1e-10) -> bool:
    """True when x is an orthogonal projector of the given rank."""
    probes = np.random.default_rng(DEFAULT_SEED).standard_normal((x.shape[0], 4))
    xp = x @ probes
    idem = float(np.abs(x @ xp - xp).max()) / max(1.0, float(np.abs(probes).max()))
    sym = float(np.abs(x - x.T).max())
    return idem < tol and sym < tol and abs(float(np.trace(x)) - rank) < 1e-8


@dataclass
class LanczosResult:
    values: np.ndarray  # descending
    vectors: np.ndarray  # (count, dim)
    residuals: np.ndarray  # explicit |A v - theta v|
    applies: int
    restarts: int = 0
    history: list = field(default_factory=list)


def _as_deflator(deflate):
    """Callable that removes the deflated component; it may overwrite its argument."""
    if deflate is None:
        return lambda v: v
    if hasattr(deflate, "project_out_inplace"):
        return deflate.project_out_inplace
    if hasattr(deflate, "project_out"):
        return deflate.project_out
    q = np.atleast_2d(np.asarray(deflate, dtype=float))
    return lambda v: v - q.T @ (q @ v)


def _subtract_combination(w: np.ndarray, coeffs: np.ndarray, rows: np.ndarray) -> None:
    """w -= coeffs @ rows without a full-length temporary."""
    step = max(1, CHUNK // max(1, rows.shape[0]))
    for c0 in range(0, w.shape[0], step):
        w[c0 : c0 + step] -= coeffs @ rows[:, c0 : c0 + step]


def extremal_eigs(
    op,
    dim: int,
    deflate=None,
    count: int = 1,
    tol: float = DEFAULT_TOL,
    cap: int = RESTART_CAP,
    max_applies: int = MAX_APPLIES,
    seed: int = DEFAULT_SEED,
    v0: np.ndarray | None = None,
) -> LanczosResult:
    """Largest eigenvalues of a symmetric operator on the complement of ``deflate``.

    Thick-restart Lanczos with full (twice-iterated Gram-Schmidt)
    reorthogonalization. Every new Krylov vector is projected off the
    deflated space. ``op`` maps a length-``dim`` vector to its image.
    """
    if dim < 2:
        raise ValueError("operator dimension must be >= 2")
    project_out = _as_deflator(deflate)
    rng = np.random.default_rng(seed)
    cap = int(max(count + 2, min(cap, dim)))
    keep_target = max(count + 1, cap // 2)

    basis = np.empty((cap + 1, dim))
    start = rng.standard_normal(dim) if v0 is None else np.array(v0, dtype=float)
    start = project_out(start)
    nrm = np.linalg.norm(start)
    if nrm == 0:
        raise ValueError("start vector lies in the deflated space")
    basis[0] = start / nrm

    tmat = np.zeros((cap + 1, cap + 1))
    k = 0  # retained Ritz vectors
    applies = 0
    restarts = 0
    threshold = tol
    exhausted = False
    history = []

    while True:
        j = k
        beta = 0.0
        while j < cap:
            w = project_out(op(basis[j]))
            applies += 1
            h = basis[: j + 1] @ w
            _subtract_combination(w, h, basis[: j + 1])
            h2 = basis[: j + 1] @ w
            _subtract_combination(w, h2, basis[: j + 1])
            h += h2
            tmat[: j + 1, j] = h
            tmat[j, : j + 1] = h
            beta = float(np.linalg.norm(w))
            scale = max(1.0, float(np.abs(h).max()))
            if beta <= 1e-12 * scale:
                # invariant subspace: try to continue with a fresh direction
                w = project_out(rng.standard_normal(dim))
                for _ in range(2):
                    _subtract_combination(w, basis[: j + 1] @ w, basis[: j + 1])
                wn = float(np.linalg.norm(w))
                beta = 0.0
                if wn <= 1e-8 or j + 1 >= dim:
                    exhausted = True
                    j += 1
                    break
                basis[j + 1] = w / wn
            else:
                basis[j + 1] = w / beta
            tmat[j + 1, j] = tmat[j, j + 1] = beta
            j += 1
            if exhausted:
                break
        size = j
        theta, s = np.linalg.eigh(tmat[:size, :size])
        order = np.argsort(-theta)
        theta, s = theta[order], s[:, order]
        est = np.abs(beta * s[size - 1, :])
        history.append((applies, float(theta[0]), float(est[0])))
        n_found = min(count, size)
        if exhausted or np.all(est[:n_found] <= threshold):
            vecs = s[:, :n_found].T @ basis[:size]
            res = np.empty(n_found)
            for i in range(n_found):
                vecs[i] /= np.linalg.norm(vecs[i])
                r = project_out(op(vecs[i]))
                _subtract_combination(r, theta[i : i + 1], vecs[i : i + 1])
                res[i] = np.linalg.norm(r)
                del r
            applies += n_found
            if exhausted or np.all(res <= tol) or threshold < 1e-6 * tol:
                return LanczosResult(theta[:n_found].copy(), vecs, res, applies, restarts, history)
            threshold *= 0.1
        if applies >= max_applies:
            raise ConvergenceError(
                f"Lanczos did not converge within {max_applies} operator applications",
                ritz_values=theta[:count].copy(),
                residuals=est[:count].copy(),
                iterations=applies,
            )
        # thick restart with the leading Ritz vectors and the residual direction
        keep = min(keep_target, size - 1)
        y = s[:, :keep]
        chunk = max(1, CHUNK // max(1, size))
        for c0 in range(0, dim, chunk):
            c1 = min(dim, c0 + chunk)
            basis[:keep, c0:c1] = y.T @ basis[:size, c0:c1]
        basis[keep] = basis[size]
        tmat[:] = 0.0
        tmat[np.arange(keep), np.arange(keep)] = theta[:keep]
        tmat[keep, :keep] = tmat[:keep, keep] = beta * s[size - 1, :keep]
        k = keep
        restarts += 1


def _bytes_needed(dim: int, solver: str, cap: int) -> int:
    if solver == "dense":
        return 8 * dim * dim * 4
    return 8 * dim * (cap + WORK_VECTORS)


def physical_memory_bytes() -> int | None:
    try:
        return os.sysconf("SC_PHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError, AttributeError):
        return None


def memory_limit_bytes(memory_budget_gb: float) -> int:
    """The requested budget, capped by a fraction of the machine's physical memory."""
    budget = int(memory_budget_gb * 2**30)
    phys = physical_memory_bytes()
    if phys:
        budget = min(budget, int(PHYSICAL_FRACTION * phys))
    return budget


def fitted_cap(dim: int, cap: int, limit: int) -> int:
    """Largest restart length up to ``cap`` whose Krylov basis fits in ``limit`` bytes."""
    return min(cap, limit // (8 * dim) - WORK_VECTORS)


def spectral_gap(
    t: int,
    n_terms: int,
    tol: float = DEFAULT_TOL,
    solver: str = "auto",
    seed: int = DEFAULT_SEED,
    memory_budget_gb: float = 8.0,
    cap: int = RESTART_CAP,
    workers: int | None = None,
    basis_method: str = "gram-eigen",
) -> GapResult:
    """Gap n_terms - lambda_2(X) of the open chain with ``n_terms`` local terms."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    if t < 2:
        raise UnsupportedDegreeError(f"spectral gaps need t >= 2, got t={t}")
    if solver not in ("auto", "dense", "iterative"):
        raise ValueError(f"unknown solver {solver!r}")
    start = time.perf_counter()
    n_sites = n_terms + 1
    basis = site_basis(t, basis_method)
    dim = basis.m**n_sites
    if solver == "auto":
        solver = "dense" if dim <= DENSE_LIMIT else "iterative"
    limit = memory_limit_bytes(memory_budget_gb)
    if solver == "iterative":
        fitted = fitted_cap(dim, cap, limit)
        if fitted < cap:
            log.info("restart length reduced from %d to %d to fit memory", cap, fitted)
        cap = max(fitted, MIN_CAP)
    need = _bytes_needed(dim, solver, cap)
    if need > limit or (solver == "dense" and dim > 8192):
        raise ResourceError(
            f"t={t}, {n_terms} terms: dimension {dim} needs ~{need / 2**30:.3g} GiB "
            f"with the {solver} solver (limit {limit / 2**30:.3g} GiB)",
            dim,
        )
    pair = pair_projector(basis)
    chain = ChainOperator(pair, n_sites, workers)
    ground = ground_space(t, n_sites, basis)
    g = ground.multiplicity
    log.info("t=%d terms=%d dim=%d ground=%d solver=%s", t, n_terms, dim, g, solver)

    if solver == "dense":
        solve_counter["dense"] += 1
        x = chain.dense()
        full = dense_spectrum(x)
        lam_max = float(full[-1])
        top_mult = int(np.sum(full > n_terms - 1e-8))
        if abs(lam_max - n_terms) > 1e-9 or top_mult != g:
            raise ConsistencyError(
                f"top eigenvalue {lam_max} with multiplicity {top_mult}, expected {n_terms} x {g}"
            )
        gv = ground.vectors()
        # X compressed to the complement of the ground space; ground directions map to 0
        y = x - gv.T @ (gv @ x)
        y -= (y @ gv.T) @ gv
        w, v = np.linalg.eigh(0.5 * (y + y.T))
        lam2 = float(w[-1])
        vec = v[:, -1]
        if n_terms == 1 and is_projector_onto(x, g):
            # a single term is a projector onto the ground space; its other eigenvalue is 0
            lam2 = 0.0
        residual = float(np.linalg.norm(y @ vec - lam2 * vec))
        iterations = 0
    else:
        solve_counter["iterative"] += 1
        check = ground.combine(np.random.default_rng(seed).standard_normal(ground.site_vectors.shape[1]))
        check /= np.linalg.norm(check)
        top_res = float(np.linalg.norm(chain.apply(check) - n_terms * check))
        if top_res > 1e-9:
            raise ConsistencyError(f"ground-space vector is not an eigenvector of X: residual {top_res:.3e}")
        lam_max = float(n_terms)
        res = extremal_eigs(chain.apply, dim, deflate=ground, count=1, tol=tol, cap=cap, seed=seed)
        lam2 = float(res.values[0])
        residual = float(res.residuals[0])
        iterations = res.applies + 1
        if lam2 > n_terms - 1e-8:
            raise ConsistencyError(f"eigenvalue {lam2} outside the ground space reaches the top {n_terms}")

    gap = n_terms - lam2
    return GapResult(
        t=t,
        n_terms=n_terms,
        n_sites=n_sites,
        lambda_max=lam_max,
        lambda2=lam2,
        gap=gap,
        residual=residual,
        solver=solver,
        dim=dim,
        iterations=iterations,
        wall_seconds=time.perf_counter() - start,
        seed=seed,
        ground_multiplicity=g,
    )
