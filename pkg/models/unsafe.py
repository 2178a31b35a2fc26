"""Unsafe-set and goal-region Pydantic models with validation."""

from typing import Annotated, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from errors import DimensionError


class HalfspacePredicate(BaseModel):
    """Unsafe iff coefficients . x >= offset (coefficients indexed by state)."""
    kind: Literal["halfspace"] = "halfspace"
    coefficients: List[float] = Field(..., min_length=1, description="One coefficient per state index")
    offset: float = Field(..., description="Right-hand side d of c.x >= d")

    @field_validator('coefficients')
    @classmethod
    def validate_coefficients(cls, v: List[float]) -> List[float]:
        """Ensure the halfspace is not the whole space."""
        if not any(c != 0.0 for c in v):
            raise ValueError("At least one coefficient must be non-zero")
        return v

    def project(self, dims: Sequence[int]) -> np.ndarray:
        """Coefficients restricted to ``dims``; other states must not appear."""
        coefficients = np.zeros(len(dims))
        for state, c in enumerate(self.coefficients):
            if c == 0.0:
                continue
            if state not in dims:
                raise DimensionError(f"Halfspace uses state {state}, which the estimate does not cover")
            coefficients[list(dims).index(state)] = c
        return coefficients

    def is_unsafe(self, points: np.ndarray, dims: Sequence[int]) -> np.ndarray:
        return points @ self.project(dims) >= self.offset


class CylinderPredicate(BaseModel):
    """Unsafe iff the two cross coordinates lie within radius of center."""
    kind: Literal["cylinder"] = "cylinder"
    axis: int = Field(..., ge=0, description="State index of the cylinder axis")
    cross: Tuple[int, int] = Field(..., description="State indices of the two cross dimensions")
    center: Tuple[float, float] = Field(..., description="Center in the cross dimensions")
    radius: float = Field(..., gt=0.0, description="Cylinder radius")
    axis_range: Optional[Tuple[float, float]] = Field(
        None, description="Finite extent along the axis; infinite when omitted"
    )

    @model_validator(mode='after')
    def validate_geometry(self) -> 'CylinderPredicate':
        """Ensure the axis and cross dimensions are distinct."""
        if len({self.axis, *self.cross}) != 3:
            raise ValueError("axis and cross dimensions must be three distinct states")
        if self.axis_range is not None and self.axis_range[0] > self.axis_range[1]:
            raise ValueError("axis_range lower bound exceeds upper bound")
        return self

    def is_unsafe(self, points: np.ndarray, dims: Sequence[int]) -> np.ndarray:
        dims = list(dims)
        for state in self.cross:
            if state not in dims:
                raise DimensionError(f"Cylinder needs state {state}, which the estimate does not cover")
        a = points[:, dims.index(self.cross[0])] - self.center[0]
        b = points[:, dims.index(self.cross[1])] - self.center[1]
        inside = a * a + b * b <= self.radius ** 2
        if self.axis_range is not None:
            if self.axis not in dims:
                raise DimensionError(f"Cylinder axis state {self.axis} is not covered by the estimate")
            z = points[:, dims.index(self.axis)]
            inside &= (z >= self.axis_range[0]) & (z <= self.axis_range[1])
        return inside


UnsafePredicate = Annotated[
    Union[HalfspacePredicate, CylinderPredicate],
    Field(discriminator="kind"),
]


class GoalClause(BaseModel):
    """lower <= band(dim) <= upper over a time window of a reach tube."""
    dim: int = Field(..., ge=0, description="State index the clause constrains")
    lower: Optional[float] = Field(None, description="Band must stay at or above this value")
    upper: Optional[float] = Field(None, description="Band must stay at or below this value")
    after: Optional[float] = Field(None, description="Only times strictly after this value")
    before: Optional[float] = Field(None, description="Only times strictly before this value")
    at: Optional[float] = Field(None, description="Only the recorded time closest to this value")
    name: Optional[str] = Field(None, description="Label used in reports")

    @model_validator(mode='after')
    def validate_clause(self) -> 'GoalClause':
        """Ensure the clause constrains something over a sensible window."""
        if self.lower is None and self.upper is None:
            raise ValueError("A goal clause needs a lower or an upper bound")
        if self.lower is not None and self.upper is not None and self.lower > self.upper:
            raise ValueError("lower cannot exceed upper")
        if self.at is not None and (self.after is not None or self.before is not None):
            raise ValueError("'at' cannot be combined with 'after' or 'before'")
        return self

    def label(self) -> str:
        if self.name:
            return self.name
        bounds = []
        if self.lower is not None:
            bounds.append(f">= {self.lower:g}")
        if self.upper is not None:
            bounds.append(f"<= {self.upper:g}")
        window = "always"
        if self.at is not None:
            window = f"at t = {self.at:g}"
        elif self.after is not None or self.before is not None:
            parts = []
            if self.after is not None:
                parts.append(f"t > {self.after:g}")
            if self.before is not None:
                parts.append(f"t < {self.before:g}")
            window = " and ".join(parts)
        return f"x{self.dim + 1} {' and '.join(bounds)} {window}"

    def time_mask(self, times: np.ndarray) -> np.ndarray:
        if self.at is not None:
            mask = np.zeros(len(times), dtype=bool)
            mask[int(np.argmin(np.abs(times - self.at)))] = True
            return mask
        mask = np.ones(len(times), dtype=bool)
        if self.after is not None:
            mask &= times > self.after
        if self.before is not None:
            mask &= times < self.before
        return mask
