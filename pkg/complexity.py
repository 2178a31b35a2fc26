"""Sample counts that guarantee the (epsilon, delta) bound for each estimation method.

Both bounds use the natural logarithm and the raw double-precision ceiling.
"""

import math
from dataclasses import dataclass
from typing import Optional

from errors import BinomialOverflowError, ProbabilityDomainError

INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class ProbParams:
    """Accuracy, confidence and the dimensions the bound depends on."""

    epsilon: float
    delta: float
    n_x: int
    k: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ProbabilityDomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise ProbabilityDomainError(f"delta must lie in (0, 1), got {self.delta}")
        if self.n_x < 1:
            raise ValueError(f"State dimension must be >= 1, got {self.n_x}")
        if self.k is not None and self.k < 1:
            raise ValueError(f"Christoffel half-degree must be >= 1, got {self.k}")


def pnorm_sample_count(p: ProbParams) -> int:
    """Samples needed by the scenario p-norm-ball program."""
    e = math.e
    n = p.n_x
    value = (1.0 / p.epsilon) * (e / (e - 1.0)) * (math.log(1.0 / p.delta) + 0.5 * (n * n + 3 * n))
    return math.ceil(value)


def christoffel_binomial(n_x: int, k: int) -> int:
    binomial = math.comb(n_x + 2 * k, n_x)
    if binomial > INT64_MAX:
        raise BinomialOverflowError(f"C({n_x + 2 * k}, {n_x}) exceeds the 64-bit integer range")
    return binomial


def christoffel_sample_count(p: ProbParams) -> int:
    """Samples needed by the empirical inverse Christoffel function."""
    if p.k is None:
        raise ValueError("christoffel_sample_count needs the half-degree k")
    binomial = christoffel_binomial(p.n_x, p.k)
    value = (5.0 / p.epsilon) * (math.log(4.0 / p.delta) + binomial * math.log(40.0 / p.epsilon))
    return math.ceil(value)


def required_samples(method: str, p: ProbParams) -> int:
    if method == "pnorm":
        return pnorm_sample_count(p)
    if method == "christoffel":
        return christoffel_sample_count(p)
    raise ValueError(f"Unknown estimation method: {method}")
