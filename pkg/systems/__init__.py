"""Built-in benchmark systems and the external-command sampler."""

from .base import BenchmarkSystem
from .command import CommandSampler, command_spec
from .duffing import DuffingParams, DuffingSystem, duffing_spec
from .factory import build_system_spec, create_system
from .laub_loomis import LaubLoomisParams, LaubLoomisSystem, laub_loomis_spec
from .quadrotor import QuadrotorParams, QuadrotorSystem, quadrotor_spec
from .rendezvous import RendezvousMode, RendezvousParams, RendezvousSystem, rendezvous_mode, rendezvous_spec

__all__ = [
    "BenchmarkSystem",
    "CommandSampler",
    "command_spec",
    "DuffingParams",
    "DuffingSystem",
    "duffing_spec",
    "build_system_spec",
    "create_system",
    "LaubLoomisParams",
    "LaubLoomisSystem",
    "laub_loomis_spec",
    "QuadrotorParams",
    "QuadrotorSystem",
    "quadrotor_spec",
    "RendezvousMode",
    "RendezvousParams",
    "RendezvousSystem",
    "rendezvous_mode",
    "rendezvous_spec",
]
