"""Factory functions for creating systems from run configurations."""

from typing import Any, Dict, Optional

from pydantic import ValidationError

from disturbance import DisturbanceSpec
from errors import ConfigError
from models.run_config import SystemConfig
from ode_sim import SystemSpec

from .base import BenchmarkSystem
from .command import command_spec
from .duffing import DuffingParams, DuffingSystem
from .laub_loomis import LaubLoomisParams, LaubLoomisSystem
from .quadrotor import QuadrotorParams, QuadrotorSystem
from .rendezvous import RendezvousParams, RendezvousSystem

SYSTEMS = {
    "duffing": (DuffingSystem, DuffingParams),
    "laub_loomis": (LaubLoomisSystem, LaubLoomisParams),
    "rendezvous": (RendezvousSystem, RendezvousParams),
    "quadrotor": (QuadrotorSystem, QuadrotorParams),
}


def create_system(name: str, params: Optional[Dict[str, Any]] = None) -> BenchmarkSystem:
    """Create a built-in system from its name and parameter table.

    Args:
        name: Benchmark name
        params: Parameter overrides, validated by the benchmark's params model

    Returns:
        BenchmarkSystem instance

    Raises:
        ConfigError: If the name is unknown or a parameter is invalid
    """
    if name not in SYSTEMS:
        raise ConfigError("system.name", f"Unknown system: {name}")
    system_cls, params_cls = SYSTEMS[name]
    try:
        system_params = params_cls.model_validate(params or {})
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(part) for part in first["loc"])
        raise ConfigError(f"system.params.{loc}", first["msg"]) from e
    return system_cls(system_params)


def build_system_spec(config: SystemConfig, seed: int) -> SystemSpec:
    """Turn a validated system table into a SystemSpec."""
    if config.command is not None:
        return command_spec(config.command, seed, config.state_dim, config.t0, config.t1, config.parts)

    system = create_system(config.name, config.params)
    disturbance = None
    if config.disturbance is not None:
        if len(config.disturbance) != system.state_dim:
            raise ConfigError(
                "system.disturbance",
                f"expected {system.state_dim} entries, got {len(config.disturbance)}",
            )
        disturbance = DisturbanceSpec.from_config(
            [None if entry is None else entry.model_dump() for entry in config.disturbance]
        )
    if config.intervals is not None and len(config.intervals) != system.state_dim:
        raise ConfigError(
            "system.intervals",
            f"expected {system.state_dim} intervals, got {len(config.intervals)}",
        )
    return system.build_spec(
        intervals=config.intervals,
        t_range=config.t_range(),
        parts=config.parts,
        disturbance=disturbance,
    )
