"""Pydantic models for reachest run configurations."""

from .run_config import (
    ChristoffelMethod,
    DisturbanceEntry,
    PlotConfig,
    PNormMethod,
    ProbabilisticConfig,
    RunConfig,
    SystemConfig,
)
from .unsafe import CylinderPredicate, GoalClause, HalfspacePredicate

__all__ = [
    "ChristoffelMethod",
    "DisturbanceEntry",
    "PlotConfig",
    "PNormMethod",
    "ProbabilisticConfig",
    "RunConfig",
    "SystemConfig",
    "CylinderPredicate",
    "GoalClause",
    "HalfspacePredicate",
]
