"""Acceptance criteria. Each test prints one PASS/FAIL line at the required tolerance.

Run directly (``python tests/test_acceptance.py``) to get the nine lines without pytest.
"""

from __future__ import annotations

import math
import sys

import numpy as np
import pytest

from design_gap import bounds, irreps, oracle
from design_gap.chain import pair_projector
from design_gap.cli import e_operator_suite
from design_gap.commutant import site_basis
from design_gap.eigensolve import GapResult, spectral_gap
from design_gap.errors import DesignGapError, UnavailableInputError
from design_gap.reference import REFERENCE_GAPS, reference_lookup

_RESULTS: dict[tuple[int, int], GapResult | DesignGapError] = {}
_EMIT = print


def gap_result(t: int, k: int) -> GapResult | DesignGapError:
    """Reduced-chain result, computed once per session; failures are kept as values."""
    if (t, k) not in _RESULTS:
        try:
            _RESULTS[(t, k)] = spectral_gap(t, k)
        except DesignGapError as exc:
            _RESULTS[(t, k)] = exc
    return _RESULTS[(t, k)]


def report(n: int, ok: bool, detail: str) -> None:
    _EMIT(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"criterion {n}: {detail}"


@pytest.fixture(autouse=True)
def _visible(capsys):
    global _EMIT

    def emit(line: str) -> None:
        with capsys.disabled():
            print("\n" + line)

    _EMIT = emit
    yield
    _EMIT = print


def compare(cases: list[tuple[int, int, float]]) -> tuple[bool, float, list[str]]:
    """(all within tolerance, worst deviation, per-case notes) against the published table."""
    ok, worst, notes = True, 0.0, []
    for t, k, tol in cases:
        res = gap_result(t, k)
        if isinstance(res, DesignGapError):
            ok = False
            notes.append(f"(t={t},k={k}) unavailable: {res}")
            continue
        dev = abs(res.gap - REFERENCE_GAPS[(t, k)])
        worst = max(worst, dev)
        if not dev <= tol:
            ok = False
            notes.append(f"(t={t},k={k}) computed {res.gap:.11f} published {REFERENCE_GAPS[(t, k)]} dev {dev:.2e} > {tol:g}")
    return ok, worst, notes


def test_criterion_1_t2_t3():
    ok, worst, notes = compare([(t, k, 1e-4) for t in (2, 3) for k in range(2, 11)])
    cross = 0.0
    for k in range(2, 11):
        a, b = gap_result(2, k), gap_result(3, k)
        if isinstance(a, DesignGapError) or isinstance(b, DesignGapError):
            ok = False
            continue
        cross = max(cross, abs(a.gap - b.gap))
    ok = ok and cross <= 1e-5
    report(1, ok, f"t=2,3 k=2..10 max|dev|={worst:.2e} (tol 1e-4), max|gap2-gap3|={cross:.2e} (tol 1e-5) {'; '.join(notes)}")


def test_criterion_2_t2_extended():
    ok, worst, notes = compare([(2, k, 5e-4) for k in range(11, 21)])
    report(2, ok, f"t=2 k=11..20 max|dev|={worst:.2e} (tol 5e-4) {'; '.join(notes)}")


def test_criterion_3_t4():
    ok, worst, notes = compare([(4, 2, 1e-8), (4, 3, 1e-8), (4, 4, 1e-8), (4, 5, 1e-6)])
    report(3, ok, f"t=4 k=2..5 max|dev|={worst:.2e} (tol 1e-8, k=5 1e-6) {'; '.join(notes)}")


def test_criterion_4_t5():
    ok, worst, notes = compare([(5, 2, 1e-8), (5, 3, 1e-8)])
    report(4, ok, f"t=5 k=2,3 max|dev|={worst:.2e} (tol 1e-8) {'; '.join(notes)}")


def test_criterion_5_convention_pin():
    two = oracle.full_space_gap(2, 3).gap
    one = oracle.full_space_gap(2, 2).gap
    ok = abs(two - 0.6) <= 1e-9 and one == 1.0
    report(5, ok, f"full-space gap(t=2, 3 sites)={two!r} (0.6 +- 1e-9), gap(t=2, 2 sites)={one!r} (exactly 1.0)")


def test_criterion_6_oracle_equivalence():
    worst, parts = 0.0, []
    for t, sites in [(2, 3), (2, 4), (3, 2), (3, 3)]:
        res = gap_result(t, sites - 1)
        full = oracle.full_space_gap(t, sites)
        dev = abs(res.gap - full.gap)
        worst = max(worst, dev)
        parts.append(f"({t},{sites}):{dev:.1e}")
    report(6, worst <= 1e-8, f"max|reduced-full|={worst:.2e} (tol 1e-8) {' '.join(parts)}")


EXPECTED_COEFFICIENTS = [
    (2, "local_bound", 5.0, 1e-9),
    (2, "global_bound", 13.34, 0.01),
    (3, "global_bound", 35.95, 0.02),
    (4, "global_bound", 37.66, 0.02),
    (4, "local_bound", 3.81, 0.01),
    (4, "gap_limit", 2.44, 0.01),
]


def _computed_lookup(t: int):
    def gap(k: int) -> float | None:
        res = _RESULTS.get((t, k))
        return None if res is None or isinstance(res, DesignGapError) else res.gap

    return gap


def test_criterion_7_bound_arithmetic():
    knabe = bounds.knabe_bound(0.6, 2)
    ok = knabe == 0.2
    parts = [f"knabe(0.6,2)={knabe!r}"]
    for t, label, want, tol in EXPECTED_COEFFICIENTS:
        rep = bounds.bound_report(t, reference_lookup(t), gap_source="reference")
        got = rep.length_coefficients.get(label, math.nan)
        good = abs(got - want) <= tol
        ok = ok and good
        parts.append(f"t={t} {label}={got:.4f}({want})")
    try:
        bounds.bhh_bound(5, reference_lookup(5))
        ok = False
        parts.append("bhh(t=5) unexpectedly available")
    except UnavailableInputError as exc:
        good = exc.k_star == 5 and "Δ(H_{5,5})" in str(exc)
        ok = ok and good
        parts.append(f"bhh(t=5): {exc}")
    # for information: the same arithmetic on gaps computed in this session
    info = []
    for t in (2, 3, 4):
        coeffs = bounds.bound_report(t, _computed_lookup(t), gap_source="computed").length_coefficients
        if coeffs:
            info.append(f"t={t} " + ",".join(f"{key}={val:.2f}" for key, val in sorted(coeffs.items())))
    report(7, ok, "; ".join(parts) + (" | computed gaps: " + "; ".join(info) if info else ""))


def _ground_dimension(t: int, n_sites: int) -> int:
    """Number of independent permutation operators on (C^{2^n})^{⊗t}."""
    return sum(irreps.dimension(s) ** 2 for s in irreps.partitions(t, max_rows=2**n_sites))


def _coxeter_deviation(t: int) -> float:
    worst = 0.0
    for shape in irreps.partitions(t):
        gens = irreps.generator_matrices(shape)
        eye = np.eye(irreps.dimension(shape))
        for i, s in enumerate(gens):
            worst = max(worst, np.abs(s @ s - eye).max(), np.abs(s @ s.T - eye).max())
            for j in range(i + 1, len(gens)):
                power = 3 if j == i + 1 else 2
                prod = np.linalg.matrix_power(s @ gens[j], power)
                worst = max(worst, np.abs(prod - eye).max())
    return float(worst)


def test_criterion_8_structure():
    parts, ok = [], True
    ranks, sizes, idem_worst, basis_worst = [], [], 0.0, 0.0
    for t in (2, 3, 4, 5):
        basis = site_basis(t)
        pair = pair_projector(basis)
        p = pair.matrix
        idem_worst = max(idem_worst, float(np.abs(p @ p - p).max()))
        ranks.append(int(round(float(np.trace(p)))))
        sizes.append(basis.m)
        basis_worst = max(basis_worst, float(np.abs(basis.projector() - site_basis(t, "irrep").projector()).max()))
    ok = ok and idem_worst < 1e-10 and ranks == [2, 6, 24, 119]
    ok = ok and sizes == [2, 5, 14, 42] == [irreps.catalan(t) for t in (2, 3, 4, 5)]
    ok = ok and basis_worst < 1e-10
    parts.append(f"|P^2-P|={idem_worst:.1e} ranks={ranks} site ranks={sizes} basis |dP|={basis_worst:.1e}")

    # every instance computed this session, plus the small ones if run alone
    for t in (2, 3, 4, 5):
        for k in (1, 2):
            gap_result(t, k)
    top_worst, bad = 0.0, []
    for (t, k), res in sorted(_RESULTS.items()):
        if isinstance(res, DesignGapError):
            continue
        top_worst = max(top_worst, abs(res.lambda_max - k))
        if res.ground_multiplicity != _ground_dimension(t, k + 1) or not res.lambda2 < k - 1e-8:
            bad.append((t, k))
    ok = ok and top_worst <= 1e-9 and not bad
    parts.append(f"lambda_max=k on {len(_RESULTS)} instances (max dev {top_worst:.1e}, multiplicity mismatches {bad})")

    suite = [c for t in (2, 3, 4) for c in e_operator_suite(t)]
    e_ok = all(c["passed"] for c in suite)
    cox = max(_coxeter_deviation(t) for t in (2, 3, 4, 5))
    ok = ok and e_ok and cox < 1e-12
    parts.append(f"E-operator suite t<=4 {'ok' if e_ok else 'broken'} ({len(suite)} checks), Coxeter dev t<=5 {cox:.1e}")
    report(8, ok, "; ".join(parts))


def test_criterion_9_monte_carlo():
    ratios = oracle.mc_scaling_ratios(t=2, samples=200, trials=10)
    ok = bool(np.all((ratios >= 0.35) & (ratios <= 0.7)))
    report(9, ok, f"distance ratio 4N/N over 10 trials in [{ratios.min():.3f}, {ratios.max():.3f}] (required [0.35, 0.7])")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted((n, f) for n, f in globals().items() if n.startswith("test_criterion_")):
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
