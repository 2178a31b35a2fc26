"""Base class for built-in benchmark systems."""

from abc import ABC, abstractmethod
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from disturbance import DisturbanceSpec
from ode_sim import SystemSpec

Interval = Tuple[float, float]


class BenchmarkSystem(ABC):
    """Abstract base class for all built-in systems.

    An instance is the dynamics function of its ``SystemSpec``: calling it with
    ``(x, t, d)`` returns the vector field plus the additive disturbance ``d``.
    State rows are read as ``x[i]`` so one state (n_x,) and a batch (n_x, B)
    go through the same code.
    """

    name: str = "benchmark"
    state_dim: int = 0
    default_t_range: Interval = (0.0, 1.0)
    default_parts: int = 1001

    def __init__(self, params: BaseModel):
        self.params = params

    @abstractmethod
    def vector_field(self, x: np.ndarray, t: float) -> np.ndarray:
        """Undisturbed right-hand side."""
        pass

    @abstractmethod
    def default_intervals(self) -> List[Interval]:
        """Initial-state box of the benchmark."""
        pass

    def default_unsafe(self) -> Optional[Any]:
        """Unsafe set of the benchmark, if it defines one."""
        return None

    def __call__(self, x: np.ndarray, t: float, d: Optional[np.ndarray] = None) -> np.ndarray:
        derivative = self.vector_field(x, t)
        if d is not None:
            derivative = derivative + d
        return derivative

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.params!r})"

    def build_spec(
        self,
        intervals: Optional[Sequence[Interval]] = None,
        t_range: Optional[Tuple[Optional[float], Optional[float]]] = None,
        parts: Optional[int] = None,
        disturbance: Optional[DisturbanceSpec] = None,
    ) -> SystemSpec:
        """Assemble the SystemSpec, filling unset pieces with benchmark defaults."""
        t0, t1 = self.default_t_range
        if t_range is not None:
            t0 = t0 if t_range[0] is None else t_range[0]
            t1 = t1 if t_range[1] is None else t_range[1]
        return SystemSpec(
            state_dim=self.state_dim,
            t0=float(t0),
            t1=float(t1),
            parts=parts or self.default_parts,
            dynamics=self,
            init_intervals=tuple(intervals or self.default_intervals()),
            disturbance=disturbance,
            name=self.name,
            unsafe=self.default_unsafe(),
        )
