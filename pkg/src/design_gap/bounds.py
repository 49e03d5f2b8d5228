"""Finite-size gap bounds and circuit-length arithmetic.

Gap inputs are Δ(H_{k,t}) values indexed by k = number of local terms, supplied
through a lookup callable so that no large eigensolve is ever triggered here.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

from .errors import UnavailableInputError

GapLookup = Callable[[int], Optional[float]]

PER_N = "per-n"
PER_TERMS = "per-terms"
LOG_BASE = "natural"


def knabe_bound(gap_k: float, k: int) -> float:
    """(k Δ_k - 1) / (k - 1); a negative value carries no information."""
    if k < 2:
        raise ValueError(f"the finite-size criterion needs k >= 2 local terms, got {k}")
    gap_k = float(gap_k)
    if not math.isfinite(gap_k) or gap_k < 0 or gap_k > k:
        raise ValueError(f"gap {gap_k} outside [0, {k}]")
    # exact rational arithmetic on the shortest decimal form of the input, rounded once
    exact = Fraction(repr(gap_k))
    return float((k * exact - 1) / (k - 1))


def bhh_k_star(t: int, d: int = 2) -> int:
    if t < 2:
        raise ValueError("t must be >= 2")
    # exact for powers of d, where floating log could land just above an integer
    ratio = math.log(t) / math.log(d)
    nearest = round(ratio)
    if d**nearest == t:
        ratio = float(nearest)
    return math.ceil(2 * ratio)


def bhh_bound(t: int, gap_lookup: GapLookup, d: int = 2) -> tuple[int, float]:
    """(k_star, Δ(H_{k_star,t}) / (8 log_d t)), independent of chain length."""
    k_star = bhh_k_star(t, d)
    gap = gap_lookup(k_star)
    if gap is None:
        raise UnavailableInputError(t, k_star)
    value = float(gap) / (8.0 * math.log(t) / math.log(d))
    return k_star, value


def bhh_min_qubits(t: int) -> int:
    """Smallest n for which the global bound is stated, ceil(10 log2 t)."""
    return math.ceil(10 * math.log2(t) - 1e-12)


def length_coefficient(n_qubits: float, delta: float) -> float:
    """c in the circuit length c * log(1/ε); equal to n / Δ."""
    if not delta > 0:
        raise ValueError(f"no length bound from a non-positive gap {delta}")
    if delta > n_qubits:
        raise ValueError(f"gap {delta} exceeds n = {n_qubits}")
    return n_qubits / delta


def length_coefficient_exact(n_qubits: float, delta: float) -> float:
    """Steps per unit log(1/ε) solving (1 - Δ/n)^l = ε exactly."""
    if not delta > 0:
        raise ValueError(f"no length bound from a non-positive gap {delta}")
    if delta > n_qubits:
        raise ValueError(f"gap {delta} exceeds n = {n_qubits}")
    if delta == n_qubits:
        return 0.0
    return 1.0 / -math.log1p(-delta / n_qubits)


def design_error(n_qubits: int, delta: float, l: int, convention: str = PER_N) -> float:
    """(1 - Δ/divisor)^l with divisor n (per-n) or n - 1 (per-terms)."""
    if l < 0:
        raise ValueError("l must be non-negative")
    if convention == PER_N:
        divisor = n_qubits
    elif convention == PER_TERMS:
        divisor = n_qubits - 1
    else:
        raise ValueError(f"unknown convention {convention!r}")
    if not (0 < delta <= divisor):
        raise ValueError(f"gap {delta} outside (0, {divisor}]")
    return (1.0 - delta / divisor) ** l


def bhh_theorem_size(n: int, t: int, epsilon: float, d: int = 2) -> float:
    """log(1/ε) 2 log(d) log(t) t^5 n^2, natural logarithms."""
    if n < 2 or t < 2:
        raise ValueError("n and t must be >= 2")
    if not (0 < epsilon <= 1):
        raise ValueError("epsilon must lie in (0, 1]")
    return math.log(1.0 / epsilon) * 2.0 * math.log(d) * math.log(t) * t**5 * n**2


@dataclass
class BoundReport:
    t: int
    knabe: list[tuple[int, float]]
    bhh: tuple[int, float] | None
    best_lower_bound: float | None
    length_coefficients: dict[str, float]
    gap_source: str = "cache"
    convention: str = PER_N
    bhh_unavailable: str | None = None
    warnings: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["knabe"] = [{"k": k, "value": v} for k, v in self.knabe]
        d["bhh"] = None if self.bhh is None else {"k_star": self.bhh[0], "value": self.bhh[1]}
        return d


def bound_report(
    t: int,
    gap_lookup: GapLookup,
    max_terms: int = 20,
    n_qubits: int | None = None,
    gap_source: str = "cache",
    convention: str = PER_N,
) -> BoundReport:
    """Both bounds plus length coefficients per unit n log(1/ε).

    Labels: ``local_bound`` uses the best positive finite-size value,
    ``global_bound`` the n-independent value, ``gap_limit`` the raw gap of the
    longest available chain taken as the limiting value.
    """
    knabe = []
    largest_k = None
    for k in range(2, max_terms + 1):
        gap = gap_lookup(k)
        if gap is None:
            continue
        knabe.append((k, knabe_bound(gap, k)))
        largest_k = k
    bhh = None
    reason = None
    try:
        bhh = bhh_bound(t, gap_lookup)
    except UnavailableInputError as exc:
        reason = str(exc)

    positives = [v for _, v in knabe if v > 0]
    if bhh is not None and bhh[1] > 0:
        positives.append(bhh[1])
    best = max(positives) if positives else None

    coeffs: dict[str, float] = {}
    best_knabe = max((v for _, v in knabe if v > 0), default=None)
    if best_knabe is not None:
        coeffs["local_bound"] = length_coefficient(1.0, best_knabe)
    if bhh is not None:
        coeffs["global_bound"] = length_coefficient(1.0, bhh[1])
    if largest_k is not None:
        coeffs["gap_limit"] = length_coefficient(1.0, gap_lookup(largest_k))

    warnings = []
    if n_qubits is not None and n_qubits < bhh_min_qubits(t):
        warnings.append(f"global bound stated for n >= {bhh_min_qubits(t)}; requested n = {n_qubits}")
    if knabe and best_knabe is None:
        warnings.append("every finite-size value is negative; no local bound")
    notes = []
    if largest_k is not None:
        notes.append(f"gap_limit uses k = {largest_k}")
    return BoundReport(t, knabe, bhh, best, coeffs, gap_source, convention, reason, warnings, notes)
