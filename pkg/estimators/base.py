"""Base class for fitted reach-set estimates."""

import time
from abc import ABC, abstractmethod
from contextlib import contextmanager
from typing import Any, Dict, Iterator, List, Tuple

import numpy as np

from errors import DimensionError


class SetEstimate(ABC):
    """A set {x : evaluate(x) <= threshold + slack}.

    ``evaluate`` works on a (M, n) array of points and must give every row the
    same result whatever else is in the array, so a training sample evaluated
    alone matches the value used when the set was fitted.
    """

    method: str = "base"

    @property
    @abstractmethod
    def dim(self) -> int:
        """Ambient dimension."""
        pass

    @property
    @abstractmethod
    def threshold(self) -> float:
        """Level of the defining function on the set boundary."""
        pass

    @property
    def slack(self) -> float:
        """Tolerance added to the threshold by membership tests."""
        return 0.0

    @abstractmethod
    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Defining function at each row of points."""
        pass

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready representation."""
        pass

    def as_points(self, x) -> np.ndarray:
        points = np.asarray(x, dtype=float)
        if points.ndim == 1:
            # a flat vector is one point, except in 1-D where it is a column of points
            points = points.reshape(-1, 1) if self.dim == 1 else points.reshape(1, -1)
        if points.ndim != 2 or points.shape[1] != self.dim:
            raise DimensionError(f"Points of shape {np.shape(x)} do not match dimension {self.dim}")
        return points

    def contains_many(self, points) -> np.ndarray:
        return self.evaluate(self.as_points(points)) <= self.threshold + self.slack

    def contains(self, x) -> bool:
        point = np.asarray(x, dtype=float).reshape(1, -1)
        if point.shape[1] != self.dim:
            raise DimensionError(f"Point of size {point.shape[1]} does not match dimension {self.dim}")
        return bool(self.contains_many(point)[0])


class StageTimer:
    """Wall-clock durations of named stages, in the order they ran."""

    def __init__(self):
        self.stages: List[Tuple[str, float]] = []

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.stages.append((name, time.perf_counter() - start))

    def total(self) -> float:
        return sum(seconds for _, seconds in self.stages)

    def totals(self) -> Dict[str, float]:
        """Seconds per stage name, summed over repeats, in first-run order."""
        out: Dict[str, float] = {}
        for name, seconds in self.stages:
            out[name] = out.get(name, 0.0) + seconds
        return out


def format_duration(seconds: float) -> str:
    """Format as 'MM minutes and SS seconds'."""
    minutes, secs = divmod(int(round(seconds)), 60)
    return f"{minutes:02d} minutes and {secs:02d} seconds"
