"""Run-configuration Pydantic models with validation."""

import hashlib
import json
import math
import tomllib
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from errors import ConfigError

from .unsafe import GoalClause, UnsafePredicate

SYSTEM_NAMES = ("duffing", "laub_loomis", "rendezvous", "quadrotor")


class DisturbanceEntry(BaseModel):
    """Disturbance of one state variable."""
    kind: Literal["sin", "none"] = Field("sin", description="Basis family")
    m: int = Field(default=0, ge=0, description="Number of non-constant basis functions")


class SystemConfig(BaseModel):
    """Built-in benchmark or external-command sampler."""
    name: Optional[Literal["duffing", "laub_loomis", "rendezvous", "quadrotor"]] = Field(
        None, description="Built-in benchmark name"
    )
    params: Dict[str, Any] = Field(default_factory=dict, description="Benchmark parameter table")
    command: Optional[List[str]] = Field(None, min_length=1, description="External sampler argv")
    state_dim: Optional[int] = Field(None, ge=1, description="State dimension (command samplers)")
    t0: Optional[float] = Field(None, description="Start time")
    t1: Optional[float] = Field(None, description="Final time")
    parts: Optional[int] = Field(None, ge=2, description="Number of integration grid points")
    record_every: int = Field(default=1, ge=1, description="Keep every r-th grid state")
    intervals: Optional[List[Tuple[float, float]]] = Field(None, description="Initial-state box")
    disturbance: Optional[List[Optional[DisturbanceEntry]]] = Field(
        None, description="One entry per state, null/'none' for undisturbed"
    )

    @field_validator('disturbance', mode='before')
    @classmethod
    def validate_disturbance(cls, v: Any) -> Any:
        """Accept the bare string 'none' for undisturbed dimensions."""
        if v is None:
            return v
        return [None if entry in (None, "none") else entry for entry in v]

    @field_validator('intervals')
    @classmethod
    def validate_intervals(cls, v: Optional[List[Tuple[float, float]]]) -> Optional[List[Tuple[float, float]]]:
        """Ensure every interval is ordered."""
        if v is not None:
            for i, (lo, hi) in enumerate(v):
                if lo > hi:
                    raise ValueError(f"Interval {i} has lower bound {lo} above upper bound {hi}")
        return v

    @model_validator(mode='after')
    def validate_source(self) -> 'SystemConfig':
        """Ensure exactly one sampling source is configured."""
        if (self.name is None) == (self.command is None):
            raise ValueError("Set exactly one of 'name' (built-in system) or 'command' (external sampler)")
        if self.command is not None:
            missing = [f for f in ("state_dim", "t0", "t1", "parts") if getattr(self, f) is None]
            if missing:
                raise ValueError(f"Command samplers need {', '.join(missing)}")
        if self.t0 is not None and self.t1 is not None and not self.t1 > self.t0:
            raise ValueError("t1 must exceed t0")
        if self.parts is not None and (self.parts - 1) % self.record_every != 0:
            raise ValueError(f"record_every={self.record_every} must divide parts - 1 = {self.parts - 1}")
        return self

    def t_range(self) -> Optional[Tuple[float, float]]:
        if self.t0 is None and self.t1 is None:
            return None
        return self.t0, self.t1


class ProbabilisticConfig(BaseModel):
    """Accuracy and confidence of the (epsilon, delta) guarantee."""
    epsilon: float = Field(default=0.05, gt=0.0, lt=1.0, description="Accuracy parameter")
    delta: float = Field(default=1e-9, gt=0.0, lt=1.0, description="Confidence parameter")


class PNormMethod(BaseModel):
    """Scenario program over p-norm balls."""
    model_config = ConfigDict(ser_json_inf_nan="strings")

    kind: Literal["pnorm"] = "pnorm"
    p: float = Field(default=2.0, description="Norm exponent, 2 or inf")
    tol: float = Field(default=1e-7, gt=0.0, lt=1.0, description="Khachiyan stopping tolerance")
    max_iter: int = Field(default=1_000_000, ge=1, description="Khachiyan iteration cap")

    @field_validator('p', mode='before')
    @classmethod
    def validate_p(cls, v: Any) -> float:
        """Only the ellipsoid (p = 2) and the box (p = inf) are supported."""
        if isinstance(v, str) and v.lower() in ("inf", "infinity"):
            return math.inf
        if float(v) not in (2.0, math.inf):
            raise ValueError(f"p must be 2 or inf, got {v}")
        return float(v)


class ChristoffelMethod(BaseModel):
    """Empirical inverse Christoffel function."""
    kind: Literal["christoffel"] = "christoffel"
    k: int = Field(default=10, ge=1, description="Degree of the monomial features")
    rho: float = Field(default=1e-4, ge=0.0, description="Ridge added before inversion")
    normalize: bool = Field(default=True, description="Standardize coordinates before fitting")


MethodConfig = Annotated[Union[PNormMethod, ChristoffelMethod], Field(discriminator="kind")]


class PlotConfig(BaseModel):
    """Lattice and overlay settings for plots and grid checks."""
    grid_n: int = Field(default=200, ge=2, le=2000, description="Lattice points per dimension")
    bounds: Optional[List[Tuple[float, float]]] = Field(None, description="Lattice bounds per dimension")
    show_samples: bool = Field(default=True, description="Overlay sample markers")


class RunConfig(BaseModel):
    """A complete, declarative reachability run."""
    system: SystemConfig
    probabilistic: ProbabilisticConfig = Field(default_factory=ProbabilisticConfig)
    method: MethodConfig = Field(default_factory=ChristoffelMethod)
    iso_dims: Optional[List[int]] = Field(None, min_length=1, description="Isolated state indices")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Root seed of the sample streams")
    workers: Optional[int] = Field(None, ge=1, description="Parallel sampling workers")
    n: Optional[int] = Field(None, ge=1, description="Sample-count override (voids the guarantee)")
    outputs: str = Field(default="runs/default", min_length=1, description="Output directory")
    tube: bool = Field(default=False, description="Fit one estimate per recorded time")
    unsafe: Optional[UnsafePredicate] = None
    goals: List[GoalClause] = Field(default_factory=list)
    plot: PlotConfig = Field(default_factory=PlotConfig)

    @field_validator('iso_dims')
    @classmethod
    def validate_iso_dims(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        """Ensure isolated dimensions are non-negative and strictly increasing."""
        if v is not None:
            if any(d < 0 for d in v):
                raise ValueError("Dimension indices must be non-negative")
            if any(b <= a for a, b in zip(v, v[1:])):
                raise ValueError("Dimension indices must be strictly increasing without duplicates")
        return v

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise _config_error(e) from e

    @classmethod
    def from_file(cls, config_path: str) -> "RunConfig":
        """Load a run configuration from a TOML or JSON file."""
        path = Path(config_path)
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")
        try:
            if path.suffix == ".json":
                with open(path, 'r', encoding='utf-8') as f:
                    data = json.load(f)
            else:
                with open(path, 'rb') as f:
                    data = tomllib.load(f)
        except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
            raise ConfigError(str(path), f"cannot parse config: {e}") from e
        return cls.from_dict(data)

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Apply CLI overrides field-for-field (dotted keys reach nested tables)."""
        data = self.model_dump()
        for key, value in overrides.items():
            if value is None:
                continue
            target = data
            *parents, leaf = key.split(".")
            for parent in parents:
                target = target.setdefault(parent, {})
            target[leaf] = value
        return RunConfig.from_dict(data)

    def config_hash(self) -> str:
        """Stable hash of the run-defining fields."""
        return _hash(self.model_dump(mode="json", exclude={"workers", "outputs"}))

    def sampling_hash(self) -> str:
        """Hash of the fields that decide which samples are drawn."""
        return _hash(self.model_dump(
            mode="json",
            include={"system", "probabilistic", "method", "iso_dims", "seed", "n", "tube"},
        ))


def _hash(data: Dict[str, Any]) -> str:
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _config_error(error: ValidationError) -> ConfigError:
    first = error.errors()[0]
    field = ".".join(str(part) for part in first["loc"]) or "config"
    return ConfigError(field, first["msg"])
