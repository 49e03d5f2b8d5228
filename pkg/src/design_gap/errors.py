"""Exception hierarchy shared by the library and the CLI exit-code mapping."""

from __future__ import annotations


class DesignGapError(Exception):
    """Base class for all errors raised by this package."""


class UnsupportedDegreeError(DesignGapError, ValueError):
    pass


class ConsistencyError(DesignGapError, RuntimeError):
    """A numerical object failed one of its structural invariants."""


class ResourceError(DesignGapError, MemoryError):
    def __init__(self, message: str, dim: int | None = None):
        super().__init__(message)
        self.dim = dim


class ConvergenceError(DesignGapError, RuntimeError):
    def __init__(self, message: str, ritz_values=None, residuals=None, iterations: int = 0):
        super().__init__(message)
        self.ritz_values = ritz_values
        self.residuals = residuals
        self.iterations = iterations


class UnavailableInputError(DesignGapError, LookupError):
    """A bound needs a gap that is not in the cache."""

    def __init__(self, t: int, k_star: int):
        super().__init__(f"requires Δ(H_{{{k_star},{t}}}) (t={t}, k_terms={k_star}) which is not available")
        self.t = t
        self.k_star = k_star


class ValidationError(DesignGapError, AssertionError):
    def __init__(self, message: str, max_deviation: float):
        super().__init__(f"{message} (max deviation {max_deviation:.3e})")
        self.max_deviation = max_deviation
