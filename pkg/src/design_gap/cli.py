"""Command-line front end: ``design-gap compute|table|bounds|verify|basis|report``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

import numpy as np

from . import __version__, bounds, eigensolve, irreps, oracle
from .cache import GapCache, GapCacheRecord, format_real
from .chain import ground_space, pair_expansion_deviation, pair_projector
from .commutant import convolve, e_operator_all, gram_matrix, site_basis
from .errors import (
    ConvergenceError,
    DesignGapError,
    ResourceError,
    UnavailableInputError,
    UnsupportedDegreeError,
)
from .reference import COARSE_KEYS, REFERENCE_GAPS, reference_lookup

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_RESOURCE = 2
EXIT_CONVERGENCE = 3
EXIT_UNAVAILABLE = 4
EXIT_USAGE = 64

log = logging.getLogger("design_gap")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def provenance(seed: int | None = None) -> dict:
    out = {"tool_version": __version__, "convention": eigensolve.CONVENTION, "rng": oracle.RNG_FAMILY}
    if seed is not None:
        out["seed"] = seed
    return out


def result_json(result: eigensolve.GapResult, source: str = "computed") -> dict:
    d = result.to_json_dict()
    d["tool_version"] = __version__
    d["source"] = source
    return d


def reduced_dim(t: int, k_terms: int) -> int:
    return irreps.catalan(t) ** (k_terms + 1)


def result_from_record(rec: GapCacheRecord) -> eigensolve.GapResult:
    return eigensolve.GapResult(
        t=rec.t,
        n_terms=rec.k_terms,
        n_sites=rec.k_terms + 1,
        lambda_max=float(rec.k_terms),
        lambda2=rec.k_terms - rec.gap,
        gap=rec.gap,
        residual=rec.residual,
        solver=rec.solver,
        dim=reduced_dim(rec.t, rec.k_terms),
        iterations=0,
        wall_seconds=0.0,
        seed=rec.seed,
    )


class GapSource:
    """Cache-first gap provider. ``compute_limit`` caps implicit solves by dimension."""

    def __init__(self, cache: GapCache | None, args, compute_limit: int | None = None):
        self.cache = cache
        self.args = args
        self.compute_limit = compute_limit
        self._records = cache.load() if cache is not None else {}

    def get(self, t: int, k: int, compute: bool = True) -> tuple[eigensolve.GapResult, str] | None:
        rec = self._records.get((t, k))
        if rec is not None:
            return result_from_record(rec), "cache"
        if not compute:
            return None
        if self.compute_limit is not None and reduced_dim(t, k) > self.compute_limit:
            return None
        res = eigensolve.spectral_gap(
            t,
            k,
            tol=self.args.tol,
            solver=self.args.solver,
            seed=self.args.seed,
            memory_budget_gb=self.args.memory_budget_gb,
        )
        if self.cache is not None:
            rec = GapCacheRecord.from_result(res)
            self.cache.put(rec)
            self._records[(t, k)] = rec
        return res, "computed"

    def lookup(self, t: int, compute: bool = True):
        def gap(k: int) -> float | None:
            found = self.get(t, k, compute=compute)
            return None if found is None else found[0].gap

        return gap


def _cache_from_args(args) -> GapCache | None:
    if getattr(args, "no_cache", False):
        return None
    return GapCache(args.cache)


def _emit(obj, fmt: str, rows: list[dict] | None = None, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")
        return
    rows = rows if rows is not None else [obj]
    if not rows:
        return
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: format_real(v) if isinstance(v, float) else v for k, v in row.items()})
    out.write(buf.getvalue())


def cmd_compute(args) -> int:
    source = GapSource(_cache_from_args(args), args)
    before = dict(eigensolve.solve_counter)
    res, origin = source.get(args.t, args.terms)
    payload = result_json(res, origin)
    payload["eigensolves"] = _solves_since(before)
    _emit(payload, args.format)
    return EXIT_OK


def _solves_since(before: dict) -> int:
    return sum(eigensolve.solve_counter[k] - before.get(k, 0) for k in eigensolve.solve_counter)


def plot_series(t: int, gaps: dict[int, float], lookup) -> dict:
    knabe = [
        {"k": k, "value": bounds.knabe_bound(g, k)} for k, g in sorted(gaps.items()) if k >= 2
    ]
    try:
        k_star, value = bounds.bhh_bound(t, lookup)
        bhh = [{"k": k, "value": value} for k in sorted(gaps)]
        reason = None
        k_star_out = k_star
    except UnavailableInputError as exc:
        bhh, reason, k_star_out = None, str(exc), exc.k_star
    return {"knabe": knabe, "bhh": bhh, "bhh_k_star": k_star_out, "bhh_unavailable": reason}


def monotonicity_warnings(gaps: dict[int, float], slack: float = 1e-9) -> list[str]:
    """Flag any k where the gap grows with chain length (expected, not proven, not to)."""
    out = []
    ks = sorted(gaps)
    for a, b in zip(ks, ks[1:]):
        if gaps[b] > gaps[a] + slack:
            out.append(f"gap increases from k={a} ({gaps[a]:.12g}) to k={b} ({gaps[b]:.12g})")
    return out


def cmd_table(args) -> int:
    source = GapSource(_cache_from_args(args), args)
    before = dict(eigensolve.solve_counter)
    rows = []
    gaps = {}
    for k in range(1, args.max_terms + 1):
        res, origin = source.get(args.t, k)
        gaps[k] = res.gap
        rows.append(
            {
                "t": args.t,
                "k_terms": k,
                "gap": res.gap,
                "residual": res.residual,
                "solver": res.solver,
                "source": origin,
            }
        )
    solves = _solves_since(before)
    warnings = monotonicity_warnings(gaps)
    for w in warnings:
        log.warning(w)
    payload = {"rows": rows, "eigensolves": solves, "warnings": warnings, "provenance": provenance(args.seed)}
    if args.plot_data:
        # the global bound may only use gaps that are already known
        known = source.lookup(args.t, compute=False)
        payload["plot_data"] = plot_series(args.t, gaps, lambda k: gaps.get(k, known(k)))
    if args.format == "json":
        _emit(payload, "json")
        return EXIT_OK
    out = sys.stdout
    if not args.plot_data:
        _emit(None, "csv", rows)
    else:
        series = [{"series": "gap", "t": args.t, "k_terms": r["k_terms"], "value": r["gap"]} for r in rows]
        pd = payload["plot_data"]
        series += [{"series": "knabe", "t": args.t, "k_terms": r["k"], "value": r["value"]} for r in pd["knabe"]]
        if pd["bhh"] is not None:
            series += [{"series": "bhh", "t": args.t, "k_terms": r["k"], "value": r["value"]} for r in pd["bhh"]]
        _emit(None, "csv", series)
        if pd["bhh_unavailable"]:
            out.write(f"# bhh series absent: {pd['bhh_unavailable']}\n")
    out.write(f"# eigensolves: {solves}\n")
    return EXIT_OK


def cmd_bounds(args) -> int:
    if args.gaps == "reference":
        lookup = reference_lookup(args.t)
        label = "reference"
    else:
        source = GapSource(_cache_from_args(args), args, compute_limit=eigensolve.DENSE_LIMIT)
        lookup = source.lookup(args.t)
        label = "cache"
    report = bounds.bound_report(
        args.t, lookup, max_terms=args.max_terms, n_qubits=args.n, gap_source=label, convention=args.convention
    )
    payload = report.to_json_dict()
    payload["provenance"] = provenance()
    payload["log_base"] = bounds.LOG_BASE
    if args.n is not None and args.epsilon is not None:
        scale = args.n * math.log(1.0 / args.epsilon)
        payload["lengths"] = {label_: c * scale for label_, c in report.length_coefficients.items()}
        payload["bhh_theorem_size"] = bounds.bhh_theorem_size(args.n, args.t, args.epsilon)
    if args.format == "json":
        _emit(payload, "json")
    else:
        rows = [{"quantity": f"knabe_k{k}", "value": v} for k, v in report.knabe]
        if report.bhh is not None:
            rows.append({"quantity": f"bhh_k{report.bhh[0]}", "value": report.bhh[1]})
        rows += [{"quantity": f"coefficient_{k}", "value": v} for k, v in report.length_coefficients.items()]
        _emit(None, "csv", rows)
    if report.bhh is None:
        sys.stderr.write(f"error: global bound unavailable: {report.bhh_unavailable}\n")
        return EXIT_UNAVAILABLE
    return EXIT_OK


def _check(name: str, passed: bool, deviation: float, detail: str = "") -> dict:
    return {"check": name, "passed": bool(passed), "max_deviation": float(deviation), "detail": detail}


def e_operator_suite(t: int) -> list[dict]:
    """Matrix-unit orthogonality and composition for every irrep of S(t)."""
    labels, rows = e_operator_all(t)
    gram2 = gram_matrix(t, 2)
    hs = rows @ gram2 @ rows.T
    expected = np.zeros_like(hs)
    for a, (shape, i, j) in enumerate(labels):
        expected[a, a] = irreps.qubit_multiplicity(shape)
    orth = float(np.abs(hs - expected).max())
    index = {lab: a for a, lab in enumerate(labels)}
    comp = 0.0
    for a, (s1, i, j) in enumerate(labels):
        for b, (s2, k, l) in enumerate(labels):
            prod = convolve(rows[a], rows[b])
            if s1 == s2 and j == k:
                target = rows[index[(s1, i, l)]]
            else:
                target = np.zeros_like(prod)
            comp = max(comp, float(np.abs(prod - target).max()))
    return [
        _check(f"e-operator orthogonality t={t}", orth < 1e-9, orth, "HS products equal qubit multiplicities"),
        _check(f"e-operator composition t={t}", comp < 1e-12, comp, "E_ij E_kl = delta_jk E_il"),
    ]


def verify_checks(t: int, sites: int, mc_samples: int = 0, seed: int = eigensolve.DEFAULT_SEED, mc_trials: int = 3):
    checks = []
    reduced = eigensolve.spectral_gap(t, sites - 1)
    full = oracle.full_space_gap(t, sites)
    dev = abs(reduced.gap - full.gap)
    checks.append(
        _check("reduced vs full-space gap", dev <= 1e-8, dev, f"reduced {reduced.gap:.12g}, full {full.gap:.12g}")
    )
    g = ground_space(t, sites).multiplicity
    top_dev = abs(reduced.lambda_max - reduced.n_terms)
    checks.append(
        _check(
            "largest eigenvalue equals term count",
            top_dev <= 1e-9 and reduced.ground_multiplicity == g == full.ground_multiplicity,
            top_dev,
            f"ground multiplicity {g}",
        )
    )
    pair = pair_projector(site_basis(t))
    idem = float(np.abs(pair.matrix @ pair.matrix - pair.matrix).max())
    checks.append(_check("reduced pair projector idempotent", idem < 1e-10, idem, f"rank {pair.rank}"))
    basis_dev = float(np.abs(site_basis(t).projector() - site_basis(t, "irrep").projector()).max())
    checks.append(_check("gram-eigen vs irrep site projector", basis_dev < 1e-10, basis_dev))
    alt = pair_projector(site_basis(t, "irrep"))
    rank_dev = abs(float(np.trace(alt.matrix)) - pair.rank)
    checks.append(_check("irrep-basis pair projector trace", rank_dev < 1e-8, rank_dev))
    if t <= 4:
        exp_dev = pair_expansion_deviation(t)
        checks.append(_check("irrep group-sum pair expansion", exp_dev < 1e-8, exp_dev))
    if t <= 3:
        proj = oracle.full_space_pair_projector(t)
        fidem = float(np.abs(proj @ proj - proj).max())
        tr_dev = abs(float(np.trace(proj)) - pair.rank)
        checks.append(_check("full-space pair projector idempotent", fidem < 1e-10, fidem))
        checks.append(_check("full-space pair projector trace equals rank", tr_dev < 1e-8, tr_dev))
        comm = oracle.commutation_deviation(t, proj)
        checks.append(_check("full-space projector commutes with V_pi (x) V_pi", comm < 1e-10, comm))
    if t <= 4:
        checks.extend(e_operator_suite(t))
    if mc_samples:
        s = oracle.HaarSampler(4, seed, 0)
        first = oracle.mc_pair_projector(min(t, 3), mc_samples, s)
        again = oracle.mc_pair_projector(min(t, 3), mc_samples, s)
        same = bool(np.array_equal(first.matrix, again.matrix))
        dist = float(np.linalg.norm(first.matrix - oracle.full_space_pair_projector(min(t, 3))))
        checks.append(
            _check(
                "monte carlo determinism",
                same,
                0.0 if same else float(np.abs(first.matrix - again.matrix).max()),
                f"distance {dist:.6g}, stderr {first.stderr:.6g}, samples {mc_samples}, seed {seed}",
            )
        )
        ratios = oracle.mc_scaling_ratios(min(t, 3), mc_samples, mc_trials, seed)
        worst = float(np.max(np.abs(ratios - 0.5)))
        checks.append(
            _check(
                "monte carlo 1/sqrt(N) scaling",
                bool(np.all((ratios >= 0.35) & (ratios <= 0.7))),
                worst,
                "ratios " + ", ".join(f"{r:.4f}" for r in ratios),
            )
        )
    return checks, reduced, full


def cmd_verify(args) -> int:
    checks, reduced, full = verify_checks(args.t, args.sites, args.mc_samples, args.seed, args.mc_trials)
    payload = {
        "t": args.t,
        "sites": args.sites,
        "reduced_gap": reduced.gap,
        "full_gap": full.gap,
        "ground_multiplicity": reduced.ground_multiplicity,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
        "provenance": provenance(args.seed),
    }
    if args.format == "json":
        _emit(payload, "json")
    else:
        _emit(None, "csv", checks)
    failed = [c["check"] for c in checks if not c["passed"]]
    if failed:
        sys.stderr.write("verification failed: " + "; ".join(failed) + "\n")
        return EXIT_VERIFY
    return EXIT_OK


def cmd_basis(args) -> int:
    basis = site_basis(args.t)
    pair = pair_projector(basis)
    rows = [
        {"t": args.t, "sites": n, "m": basis.m, "pair_rank": pair.rank, "ground_multiplicity": ground_space(args.t, n, basis).multiplicity}
        for n in range(2, args.max_sites + 1)
    ]
    if args.format == "json":
        _emit({"t": args.t, "m": basis.m, "pair_rank": pair.rank, "sites": rows, "provenance": provenance()}, "json")
    else:
        _emit(None, "csv", rows)
    return EXIT_OK


def cmd_report(args) -> int:
    """Cached gaps against the published table, without computing anything."""
    records = GapCache(args.cache).load()
    rows = []
    for (t, k), ref in sorted(REFERENCE_GAPS.items()):
        rec = records.get((t, k))
        tol = 5e-4 if (t, k) in COARSE_KEYS else (1e-4 if t <= 3 else 1e-8)
        if rec is None:
            status, dev, got = "missing", float("nan"), float("nan")
        else:
            got = rec.gap
            dev = abs(got - ref)
            status = "match" if dev <= tol else "mismatch"
        rows.append({"t": t, "k_terms": k, "reference": ref, "cached": got, "deviation": dev, "tolerance": tol, "status": status})
    notes = [
        "second-largest eigenvalue 1/5 for t=2, two terms: not reproduced by any convention (0.7 per-n, 0.4 per-terms)",
        "Δ(H_{2,5}) ≈ 0.29 conflicts with the tabulated 0.37373469602",
    ]
    if args.format == "json":
        _emit({"rows": rows, "notes": notes, "provenance": provenance()}, "json")
    else:
        _emit(None, "csv", rows)
        for n in notes:
            sys.stdout.write(f"# {n}\n")
    return EXIT_OK


def build_parser() -> Parser:
    common = Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--cache", default=None, help="gap cache CSV path")
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--memory-budget-gb", type=float, default=8.0)
    common.add_argument("--seed", type=int, default=eigensolve.DEFAULT_SEED)
    common.add_argument("--tol", type=float, default=eigensolve.DEFAULT_TOL)
    common.add_argument("--solver", choices=("auto", "dense", "iterative"), default="auto")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = Parser(prog="design-gap", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("compute", parents=[common], help="one spectral gap")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--terms", type=int, required=True)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("table", parents=[common], help="gaps for k = 1..max-terms")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--max-terms", type=int, required=True)
    p.add_argument("--plot-data", action="store_true")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("bounds", parents=[common], help="finite-size and global gap bounds")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--max-terms", type=int, default=10)
    p.add_argument("--gaps", choices=("cache", "reference"), default="cache")
    p.add_argument("--convention", choices=(bounds.PER_N, bounds.PER_TERMS), default=bounds.PER_N)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", parents=[common], help="reduced model against brute force")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--sites", type=int, required=True)
    p.add_argument("--mc-samples", type=int, default=0)
    p.add_argument("--mc-trials", type=int, default=3)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("basis", parents=[common], help="site dimension, pair rank, ground multiplicities")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--max-sites", type=int, default=6)
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("report", parents=[common], help="cached gaps against the published table")
    p.set_defaults(func=cmd_report)
    return parser


def _validate(args) -> None:
    for name in ("terms", "max_terms"):
        if getattr(args, name, 1) is not None and getattr(args, name, 1) < 1:
            raise UsageError(f"--{name.replace('_', '-')} must be >= 1")
    if getattr(args, "sites", 2) < 2:
        raise UsageError("--sites must be >= 2")
    if getattr(args, "max_sites", 2) < 2:
        raise UsageError("--max-sites must be >= 2")
    eps = getattr(args, "epsilon", None)
    if eps is not None and not (0 < eps <= 1):
        raise UsageError("--epsilon must lie in (0, 1]")
    if args.memory_budget_gb <= 0 or args.tol <= 0:
        raise UsageError("--memory-budget-gb and --tol must be positive")
    if getattr(args, "mc_samples", 0) < 0 or not (0 <= args.seed < 2**64):
        raise UsageError("--mc-samples must be >= 0 and --seed a 64-bit unsigned integer")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        _validate(args)
        return args.func(args)
    except (UsageError, UnsupportedDegreeError) as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"design-gap: error: {exc}\n")
        return EXIT_USAGE
    except ResourceError as exc:
        sys.stderr.write(f"resource error: {exc}\n")
        return EXIT_RESOURCE
    except ConvergenceError as exc:
        sys.stderr.write(f"no convergence: {exc}\n")
        return EXIT_CONVERGENCE
    except UnavailableInputError as exc:
        sys.stderr.write(f"unavailable input: {exc}\n")
        return EXIT_UNAVAILABLE
    except DesignGapError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
