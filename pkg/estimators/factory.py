"""Factory functions for fitting and restoring estimates."""

from typing import Any, Dict, Optional

from models.run_config import ChristoffelMethod, MethodConfig, PNormMethod

from .base import SetEstimate, StageTimer
from .christoffel import ChristoffelSet, fit_christoffel
from .pnorm import PNormBall, fit_pnorm_ball


def fit_estimate(samples, method: MethodConfig, timer: Optional[StageTimer] = None) -> SetEstimate:
    """Fit the estimate selected by the method table.

    Args:
        samples: SampleSet or (N, n) array of states
        method: PNormMethod or ChristoffelMethod
        timer: Optional StageTimer receiving the fit stages

    Returns:
        Fitted SetEstimate

    Raises:
        ValueError: If the method kind is not supported
    """
    if isinstance(method, PNormMethod):
        return fit_pnorm_ball(samples, p=method.p, tol=method.tol, max_iter=method.max_iter, timer=timer)
    elif isinstance(method, ChristoffelMethod):
        return fit_christoffel(samples, k=method.k, rho=method.rho, normalize=method.normalize,
                               timer=timer)
    else:
        raise ValueError(f"Unknown estimation method: {method!r}")


def estimate_from_dict(data: Dict[str, Any]) -> SetEstimate:
    """Restore an estimate from its JSON representation."""
    if data.get("method") == "pnorm":
        return PNormBall.from_dict(data)
    elif data.get("method") == "christoffel":
        return ChristoffelSet.from_dict(data)
    else:
        raise ValueError(f"Unknown estimate method: {data.get('method')}")
