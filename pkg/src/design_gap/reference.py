"""Published spectral gaps Δ(H_{k,t}) keyed by (t, k = number of local terms).

Used only for reproduction checks and for bound arithmetic when a caller
asks for the published inputs instead of computed ones.
"""

from __future__ import annotations

_T23 = {
    2: 0.6,
    3: 0.43431,
    4: 0.35279,
    5: 0.30718,
    6: 0.27922,
    7: 0.2609,
    8: 0.24825,
    9: 0.23915,
    10: 0.23241,
}

_T2_EXTENDED = {
    11: 0.2273,
    12: 0.2232,
    13: 0.2201,
    14: 0.2175,
    15: 0.2154,
    16: 0.2136,
    17: 0.2122,
    18: 0.2109,
    19: 0.2098,
    20: 0.2089,
}

REFERENCE_GAPS: dict[tuple[int, int], float] = {}
REFERENCE_GAPS.update({(2, k): v for k, v in _T23.items()})
REFERENCE_GAPS.update({(3, k): v for k, v in _T23.items()})
REFERENCE_GAPS.update({(2, k): v for k, v in _T2_EXTENDED.items()})
REFERENCE_GAPS.update(
    {
        (4, 2): 0.5,
        (4, 3): 0.45298644403,
        (4, 4): 0.42486035753,
        (4, 5): 0.41022855573,
        (5, 2): 0.37373469602,
        (5, 3): 0.32912548483,
    }
)

# entries quoted to four decimals
COARSE_KEYS = frozenset((2, k) for k in _T2_EXTENDED)


def reference_gap(t: int, k: int) -> float | None:
    return REFERENCE_GAPS.get((t, k))


def reference_lookup(t: int):
    """k -> Δ(H_{k,t}) from the published table, None where absent."""
    return lambda k: REFERENCE_GAPS.get((t, k))
