"""Exception types shared across the reachest modules."""

from typing import Optional


class ReachestError(Exception):
    """Base class for every error raised by reachest."""


class ConfigError(ReachestError, ValueError):
    """A run configuration failed validation."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ProbabilityDomainError(ReachestError, ValueError):
    """Accuracy or confidence parameter outside (0, 1)."""


class BinomialOverflowError(ReachestError, OverflowError):
    """Binomial coefficient does not fit a 64-bit integer."""


class IntegrationDivergedError(ReachestError, RuntimeError):
    """A state became NaN or infinite during integration."""

    def __init__(self, time_index: int, sample_index: Optional[int] = None):
        self.time_index = time_index
        self.sample_index = sample_index
        where = f"time index {time_index}"
        if sample_index is not None:
            where = f"sample {sample_index}, {where}"
        super().__init__(f"Integration diverged at {where}")

    def with_sample(self, sample_index: int) -> "IntegrationDivergedError":
        return IntegrationDivergedError(self.time_index, sample_index)


class WeightsNotDrawnError(ReachestError, RuntimeError):
    """A disturbance was evaluated before its weights were drawn."""


class DimensionError(ReachestError, ValueError):
    """A point, index list or lattice has the wrong dimension."""


class EmptySampleError(ReachestError, ValueError):
    """An estimator was given no samples."""


class RankDeficientError(ReachestError, ValueError):
    """Samples lie in a proper affine subspace."""


class NotPositiveDefiniteError(ReachestError, ValueError):
    """A matrix required to be positive definite is not."""


class BoundsTooSmallError(ReachestError, ValueError):
    """Lattice bounds do not cover the training samples."""


class SamplerCommandError(ReachestError, RuntimeError):
    """An external sampler command failed or printed malformed output."""


class FitError(ReachestError, RuntimeError):
    """Fitting a tube slice failed."""

    def __init__(self, time_index: int, cause: Exception):
        self.time_index = time_index
        self.cause = cause
        super().__init__(f"Fit failed at time index {time_index}: {cause}")
