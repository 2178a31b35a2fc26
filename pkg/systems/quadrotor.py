"""12-state quadrotor with PD height, roll and pitch control."""

from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, computed_field

from ode_sim import SystemSpec

from .base import BenchmarkSystem, Interval


class QuadrotorParams(BaseModel):
    """Physical constants and controller setpoints (SI units)."""
    g: float = Field(default=9.81, gt=0.0, description="Gravity [m/s^2]")
    R: float = Field(default=0.1, gt=0.0, description="Radius of the center mass [m]")
    l: float = Field(default=0.5, gt=0.0, description="Motor distance from the center [m]")
    M_rotor: float = Field(default=0.1, gt=0.0, description="Motor mass [kg]")
    M: float = Field(default=1.0, gt=0.0, description="Center mass [kg]")
    u1: float = Field(default=1.0, description="Height setpoint [m]")
    u2: float = Field(default=0.0, description="Roll setpoint [rad]")
    u3: float = Field(default=0.0, description="Pitch setpoint [rad]")

    @computed_field
    @property
    def m(self) -> float:
        return self.M + 4.0 * self.M_rotor

    @computed_field
    @property
    def J_x(self) -> float:
        return 0.4 * self.M * self.R ** 2 + 2.0 * self.l ** 2 * self.M_rotor

    @computed_field
    @property
    def J_y(self) -> float:
        return self.J_x

    @computed_field
    @property
    def J_z(self) -> float:
        return 0.4 * self.M * self.R ** 2 + 4.0 * self.l ** 2 * self.M_rotor


class QuadrotorSystem(BenchmarkSystem):
    """Positions x1..x3, body velocities x4..x6, Euler angles x7..x9, body rates x10..x12.

    The east-velocity row uses the body-to-inertial rotation (cos x8 sin x9 on x4).
    """

    name = "quadrotor"
    state_dim = 12
    default_t_range = (0.0, 5.0)
    default_parts = 501

    def __init__(self, params: Optional[QuadrotorParams] = None):
        super().__init__(params or QuadrotorParams())

    def controls(self, x: np.ndarray):
        """Thrust and the roll, pitch and yaw torques."""
        p = self.params
        F = p.m * p.g - 10.0 * (x[2] - p.u1) + 3.0 * x[5]
        tau_phi = -(x[6] - p.u2) - x[9]
        tau_theta = -(x[7] - p.u3) - x[10]
        tau_psi = 0.0 * x[11]
        return F, tau_phi, tau_theta, tau_psi

    def vector_field(self, x: np.ndarray, t: float) -> np.ndarray:
        p = self.params
        F, tau_phi, tau_theta, tau_psi = self.controls(x)
        s7, c7 = np.sin(x[6]), np.cos(x[6])
        s8, c8 = np.sin(x[7]), np.cos(x[7])
        s9, c9 = np.sin(x[8]), np.cos(x[8])
        t8 = np.tan(x[7])
        return np.array([
            c8 * c9 * x[3] + (s7 * s8 * c9 - c7 * s9) * x[4] + (c7 * s8 * c9 + s7 * s9) * x[5],
            c8 * s9 * x[3] + (s7 * s8 * s9 + c7 * c9) * x[4] + (c7 * s8 * s9 - s7 * c9) * x[5],
            s8 * x[3] - s7 * c8 * x[4] - c7 * c8 * x[5],
            x[11] * x[4] - x[10] * x[5] - p.g * s8,
            x[9] * x[5] - x[11] * x[3] + p.g * c8 * s7,
            x[10] * x[3] - x[9] * x[4] + p.g * c8 * c7 - F / p.m,
            x[9] + s7 * t8 * x[10] + c7 * t8 * x[11],
            c7 * x[10] - s7 * x[11],
            s7 / c8 * x[10] + c7 / c8 * x[11],
            (p.J_y - p.J_z) / p.J_x * x[10] * x[11] + tau_phi / p.J_x,
            (p.J_z - p.J_x) / p.J_y * x[9] * x[11] + tau_theta / p.J_y,
            (p.J_x - p.J_y) / p.J_z * x[9] * x[10] + tau_psi / p.J_z,
        ])

    def default_intervals(self) -> List[Interval]:
        return [(-0.4, 0.4)] * 6 + [(0.0, 0.0)] * 6


def quadrotor_spec(
    params: Optional[QuadrotorParams] = None,
    intervals: Optional[Sequence[Interval]] = None,
    t_range: Optional[Interval] = None,
    parts: Optional[int] = None,
) -> SystemSpec:
    return QuadrotorSystem(params).build_spec(intervals=intervals, t_range=t_range, parts=parts)
