"""Reach-set estimators: scenario p-norm balls and inverse Christoffel sublevel sets."""

from .base import SetEstimate, StageTimer, format_duration
from .christoffel import ChristoffelSet, fit_christoffel, monomial_features, monomials
from .factory import estimate_from_dict, fit_estimate
from .pnorm import PNormBall, fit_pnorm_ball, khachiyan, negative_log_det

__all__ = [
    "SetEstimate",
    "StageTimer",
    "format_duration",
    "ChristoffelSet",
    "fit_christoffel",
    "monomial_features",
    "monomials",
    "estimate_from_dict",
    "fit_estimate",
    "PNormBall",
    "fit_pnorm_ball",
    "khachiyan",
    "negative_log_det",
]
