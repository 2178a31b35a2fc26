"""Time-varying disturbances modelled as random weighted sums of basis functions.

A ``ScalarDisturbance`` without weights is a template; ``draw_alpha`` returns a
new instance carrying weights, so one template serves every sample. Weights
may be a single row (one sample) or a stack of rows (a batch of samples), in
which case evaluation returns one value per sample.
"""

import math
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from errors import DimensionError, WeightsNotDrawnError

BasisFunction = Callable[[float], float]


class SinBasis:
    """f_0(t) = 1, f_i(t) = sin(2 pi i t) for i > 0."""

    def __init__(self, i: int):
        self.i = i

    def __call__(self, t: float) -> float:
        if self.i == 0:
            return 1.0
        return math.sin(2.0 * math.pi * self.i * t)

    def __repr__(self) -> str:
        return f"SinBasis({self.i})"


def weight_bounds(m: int) -> np.ndarray:
    """Upper bounds of the weights: 1 for alpha_0, 1/i for alpha_i."""
    return np.array([1.0] + [1.0 / i for i in range(1, m + 1)])


@dataclass(frozen=True)
class ScalarDisturbance:
    """Disturbance of a single state variable, d(t) = sum_i alpha_i f_i(t)."""

    basis: Tuple[BasisFunction, ...]
    alpha: Optional[np.ndarray] = None
    kind: str = "custom"

    @property
    def m(self) -> int:
        return len(self.basis) - 1

    @classmethod
    def sin_disturbance(cls, m: int) -> "ScalarDisturbance":
        """Template with the constant plus m sine basis functions."""
        if m < 0:
            raise ValueError(f"Number of sine basis functions must be >= 0, got {m}")
        return cls(basis=tuple(SinBasis(i) for i in range(m + 1)), kind="sin")

    def draw_alpha(self, rng: np.random.Generator) -> "ScalarDisturbance":
        """Return a copy with weights alpha_i ~ Uniform[0, bound_i]."""
        alpha = rng.uniform(0.0, weight_bounds(self.m))
        return replace(self, alpha=alpha)

    def basis_values(self, t: float) -> np.ndarray:
        return np.array([f(t) for f in self.basis], dtype=float)

    def d(self, t: float):
        """Evaluate the disturbance at time t (one value per weight row)."""
        if self.alpha is None:
            raise WeightsNotDrawnError("Disturbance weights have not been drawn")
        values = self.basis_values(t)
        out = self.alpha[..., 0] * values[0]
        for i in range(1, len(values)):
            out = out + self.alpha[..., i] * values[i]
        return out

    def to_dict(self) -> dict:
        return {"kind": self.kind, "m": self.m}


def sin_disturbance(m: int) -> ScalarDisturbance:
    return ScalarDisturbance.sin_disturbance(m)


def draw_alpha(template: ScalarDisturbance, rng: np.random.Generator) -> ScalarDisturbance:
    return template.draw_alpha(rng)


def eval_disturbance(d: ScalarDisturbance, t: float):
    return d.d(t)


@dataclass(frozen=True)
class DisturbanceSpec:
    """One optional ScalarDisturbance per state dimension."""

    per_dim: Tuple[Optional[ScalarDisturbance], ...]

    @property
    def state_dim(self) -> int:
        return len(self.per_dim)

    @property
    def is_drawn(self) -> bool:
        return all(sd is None or sd.alpha is not None for sd in self.per_dim)

    @classmethod
    def from_config(cls, entries: Sequence[Optional[dict]]) -> "DisturbanceSpec":
        """Build from ``{"kind": "sin", "m": ...}`` entries (``None`` = undisturbed)."""
        per_dim: List[Optional[ScalarDisturbance]] = []
        for entry in entries:
            if entry is None or entry.get("kind") in (None, "none"):
                per_dim.append(None)
            elif entry["kind"] == "sin":
                per_dim.append(ScalarDisturbance.sin_disturbance(int(entry.get("m", 0))))
            else:
                raise ValueError(f"Unknown disturbance kind: {entry['kind']}")
        return cls(per_dim=tuple(per_dim))

    def draw_alphas(self, rng: np.random.Generator) -> "DisturbanceSpec":
        """Draw the weights of every disturbed dimension, in dimension order."""
        return DisturbanceSpec(
            per_dim=tuple(None if sd is None else sd.draw_alpha(rng) for sd in self.per_dim)
        )

    def get_dist(self, dim: int, t: float):
        """Disturbance of the dim-th variable at time t (0 if undisturbed)."""
        if not 0 <= dim < self.state_dim:
            raise DimensionError(f"Dimension {dim} out of range for {self.state_dim} states")
        sd = self.per_dim[dim]
        if sd is None:
            return 0.0
        return sd.d(t)

    def values(self, t: float) -> np.ndarray:
        """All dimensions at time t: shape (n_x,) or (n_x, B) for stacked weights."""
        batch = self._batch_shape()
        out = np.zeros((self.state_dim,) + batch)
        for dim, sd in enumerate(self.per_dim):
            if sd is not None:
                out[dim] = sd.d(t)
        return out

    def _batch_shape(self) -> tuple:
        for sd in self.per_dim:
            if sd is not None and sd.alpha is not None:
                return sd.alpha.shape[:-1]
        return ()

    @staticmethod
    def stack(instances: Sequence["DisturbanceSpec"]) -> "DisturbanceSpec":
        """Stack drawn per-sample instances into one batched instance."""
        first = instances[0]
        per_dim = []
        for dim, sd in enumerate(first.per_dim):
            if sd is None:
                per_dim.append(None)
                continue
            rows = np.stack([inst.per_dim[dim].alpha for inst in instances])
            per_dim.append(replace(sd, alpha=rows))
        return DisturbanceSpec(per_dim=tuple(per_dim))

    def to_config(self) -> list:
        return [None if sd is None else sd.to_dict() for sd in self.per_dim]


def get_dist(spec: DisturbanceSpec, dim: int, t: float):
    return spec.get_dist(dim, t)
