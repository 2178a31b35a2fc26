"""Forced Duffing oscillator (chaotic for the default parameters)."""

from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from ode_sim import SystemSpec

from .base import BenchmarkSystem, Interval


class DuffingParams(BaseModel):
    """Damping, forcing amplitude and forcing frequency."""
    alpha: float = Field(default=0.05, description="Damping coefficient")
    gamma: float = Field(default=0.4, description="Forcing amplitude")
    omega: float = Field(default=1.3, description="Forcing frequency")


class DuffingSystem(BenchmarkSystem):
    """x' = y, y' = -alpha y + x - x^3 + gamma cos(omega t)."""

    name = "duffing"
    state_dim = 2
    default_t_range = (0.0, 100.0)
    default_parts = 1001

    def __init__(self, params: Optional[DuffingParams] = None):
        super().__init__(params or DuffingParams())

    def vector_field(self, x: np.ndarray, t: float) -> np.ndarray:
        p = self.params
        return np.array([
            x[1],
            -p.alpha * x[1] + x[0] - x[0] ** 3 + p.gamma * np.cos(p.omega * t),
        ])

    def default_intervals(self) -> List[Interval]:
        return [(0.95, 1.05), (-0.05, 0.05)]


def duffing_spec(
    params: Optional[DuffingParams] = None,
    intervals: Optional[Sequence[Interval]] = None,
    t_range: Optional[Interval] = None,
    parts: Optional[int] = None,
) -> SystemSpec:
    return DuffingSystem(params).build_spec(intervals=intervals, t_range=t_range, parts=parts)
