"""Planar spacecraft rendezvous with a mode-switched linear feedback controller."""

import math
from enum import Enum
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, computed_field

from ode_sim import SystemSpec

from .base import BenchmarkSystem, Interval

K1_GAINS = (
    (-28.8287, 0.1005, -1449.9754, 0.0046),
    (-0.087, -33.2562, 0.00462, -1451.5013),
)

# Two readings of the rendezvous-attempt gain: the printed v_x entry is four
# orders of magnitude off the matching v_y entry.
K2_GAINS = {
    "corrected": (
        (-288.0288, 0.1312, -9614.9898, 0.0),
        (-0.1312, -288.0, 0.0, -9614.9883),
    ),
    "printed": (
        (-288.0288, 0.1312, -96149898.0, 0.0),
        (-0.1312, -288.0, 0.0, -9614.9883),
    ),
}


def _apply_gain(K: np.ndarray, state: np.ndarray) -> np.ndarray:
    """K @ state as a fixed-order column sum; a sample's result is independent of the batch width."""
    shape = (K.shape[0],) + (1,) * (state.ndim - 1)
    out = np.zeros((K.shape[0],) + state.shape[1:])
    for j in range(K.shape[1]):
        out = out + K[:, j].reshape(shape) * state[j]
    return out


class RendezvousMode(str, Enum):
    APPROACHING = "approaching"
    RENDEZVOUS = "rendezvous"
    ABORTING = "aborting"


class RendezvousParams(BaseModel):
    """Orbital constants, controller gains and mode thresholds (meters, minutes)."""
    mu: float = Field(default=3.986e14 * 60.0 ** 2, gt=0.0, description="Gravitational parameter [m^3/min^2]")
    r: float = Field(default=42164e3, gt=0.0, description="Orbit radius [m]")
    m_c: float = Field(default=500.0, gt=0.0, description="Chaser mass [kg]")
    k2_reading: Literal["corrected", "printed"] = Field(
        default="corrected", description="Which reading of the rendezvous gain to use"
    )
    rendezvous_x: float = Field(default=-100.0, description="x at or above which the rendezvous gain is used")
    abort_time: float = Field(default=120.0, description="Time at or after which the controller is off")

    @computed_field
    @property
    def n(self) -> float:
        return math.sqrt(self.mu / self.r ** 3)

    def gains(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.array(K1_GAINS), np.array(K2_GAINS[self.k2_reading])


def rendezvous_mode(x: float, t: float, params: Optional[RendezvousParams] = None) -> RendezvousMode:
    """Controller mode; aborting overrides the position modes."""
    params = params or RendezvousParams()
    if t >= params.abort_time:
        return RendezvousMode.ABORTING
    if x >= params.rendezvous_x:
        return RendezvousMode.RENDEZVOUS
    return RendezvousMode.APPROACHING


class RendezvousSystem(BenchmarkSystem):
    """States (x, y, v_x, v_y) relative to the target."""

    name = "rendezvous"
    state_dim = 4
    default_t_range = (0.0, 200.0)
    default_parts = 2001

    def __init__(self, params: Optional[RendezvousParams] = None):
        super().__init__(params or RendezvousParams())
        self._k1, self._k2 = self.params.gains()

    def control(self, x: np.ndarray, t: float) -> np.ndarray:
        """Feedback force (u_x, u_y) for one state or a column batch."""
        state = np.asarray(x, dtype=float)
        if t >= self.params.abort_time:
            return np.zeros((2,) + state.shape[1:])
        rendezvous = state[0] >= self.params.rendezvous_x
        return np.where(rendezvous, _apply_gain(self._k2, state), _apply_gain(self._k1, state))

    def vector_field(self, x: np.ndarray, t: float) -> np.ndarray:
        p = self.params
        n = p.n
        u = self.control(x, t)
        r_c = np.sqrt((p.r + x[0]) ** 2 + x[1] ** 2)
        return np.array([
            x[2],
            x[3],
            n ** 2 * x[0] + 2.0 * n * x[3] + p.mu / p.r ** 2 - p.mu / p.r ** 3 * (p.r + x[0]) + u[0] / p.m_c,
            n ** 2 * x[1] - 2.0 * n * x[2] - p.mu / r_c ** 3 * x[1] + u[1] / p.m_c,
        ])

    def default_intervals(self) -> List[Interval]:
        return [(-925.0, -875.0), (-425.0, -375.0), (0.0, 0.0), (0.0, 0.0)]


def rendezvous_spec(
    params: Optional[RendezvousParams] = None,
    t_range: Optional[Interval] = None,
    parts: Optional[int] = None,
) -> SystemSpec:
    return RendezvousSystem(params).build_spec(t_range=t_range, parts=parts)
