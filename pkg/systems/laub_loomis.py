"""Laub-Loomis 7-state enzymatic oscillator."""

from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from models.unsafe import HalfspacePredicate
from ode_sim import SystemSpec

from .base import BenchmarkSystem, Interval

LAUB_LOOMIS_CENTERS = (1.2, 1.05, 1.5, 2.4, 1.0, 0.1, 0.45)


class LaubLoomisParams(BaseModel):
    """Half-width of the initial box around the benchmark centers."""
    W: float = Field(default=0.1, gt=0.0, description="Initial box half-width")
    centers: Tuple[float, ...] = Field(default=LAUB_LOOMIS_CENTERS, min_length=7, max_length=7)
    unsafe_x4: float = Field(default=5.0, description="x4 >= this value is unsafe")


class LaubLoomisSystem(BenchmarkSystem):
    name = "laub_loomis"
    state_dim = 7
    default_t_range = (0.0, 20.0)
    default_parts = 1001

    def __init__(self, params: Optional[LaubLoomisParams] = None):
        super().__init__(params or LaubLoomisParams())

    def vector_field(self, x: np.ndarray, t: float) -> np.ndarray:
        return np.array([
            1.4 * x[2] - 0.9 * x[0],
            2.5 * x[4] - 1.5 * x[1],
            0.6 * x[6] - 0.8 * x[1] * x[2],
            2.0 - 1.3 * x[2] * x[3],
            0.7 * x[0] - x[3] * x[4],
            0.3 * x[0] - 3.1 * x[5],
            1.8 * x[5] - 1.5 * x[1] * x[6],
        ])

    def default_intervals(self) -> List[Interval]:
        w = self.params.W
        return [(c - w, c + w) for c in self.params.centers]

    def default_unsafe(self) -> HalfspacePredicate:
        coefficients = [0.0] * self.state_dim
        coefficients[3] = 1.0
        return HalfspacePredicate(coefficients=coefficients, offset=self.params.unsafe_x4)


def laub_loomis_spec(
    params: Optional[LaubLoomisParams] = None,
    t_range: Optional[Interval] = None,
    parts: Optional[int] = None,
    W: Optional[float] = None,
) -> SystemSpec:
    """Laub-Loomis spec; ``W`` sets the initial-box half-width without building params."""
    if W is not None:
        params = LaubLoomisParams.model_validate({**(params or LaubLoomisParams()).model_dump(), "W": W})
    return LaubLoomisSystem(params).build_spec(t_range=t_range, parts=parts)
