"""Spectral gaps of the frustration-free chains behind local random circuit t-designs."""

__version__ = "0.1.0"

from .errors import (
    ConsistencyError,
    ConvergenceError,
    DesignGapError,
    ResourceError,
    UnavailableInputError,
    UnsupportedDegreeError,
    ValidationError,
)
from .permgroup import Permutation, compose, cycle_count, enumerate_group, inverse
from .commutant import SiteBasis, gram_matrix, site_basis
from .chain import ChainOperator, GroundSpace, PairProjector, ground_space, pair_projector
from .eigensolve import GapResult, spectral_gap

__all__ = [
    "__version__",
    "ChainOperator",
    "ConsistencyError",
    "ConvergenceError",
    "DesignGapError",
    "GapResult",
    "GroundSpace",
    "PairProjector",
    "Permutation",
    "ResourceError",
    "SiteBasis",
    "UnavailableInputError",
    "UnsupportedDegreeError",
    "ValidationError",
    "compose",
    "cycle_count",
    "enumerate_group",
    "gram_matrix",
    "ground_space",
    "inverse",
    "pair_projector",
    "site_basis",
    "spectral_gap",
]
