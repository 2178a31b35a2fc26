"""Empirical inverse Christoffel function estimates.

C(x) = z_k(x)^T (M + rho I)^-1 z_k(x), with z_k the monomials of degree <= k
and M the empirical moment matrix of the training samples. The estimate is the
sublevel set {x : C(x) <= level} with level the largest C over the samples.
"""

import logging
import math
from itertools import combinations_with_replacement
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, pinvh

from errors import EmptySampleError, NotPositiveDefiniteError

from .base import SetEstimate, StageTimer

logger = logging.getLogger(__name__)

# rows evaluated per block; bounds the (rows, D) feature matrix
EVAL_CHUNK = 65536
PINV_RTOL = 1e-10


def monomial_exponents(n: int, k: int) -> List[Tuple[int, ...]]:
    """Variable-index tuples of every monomial of degree <= k, graded lexicographic."""
    if k < 0:
        raise ValueError(f"Degree must be >= 0, got {k}")
    terms: List[Tuple[int, ...]] = []
    for degree in range(k + 1):
        terms.extend(combinations_with_replacement(range(n), degree))
    return terms


def feature_count(n: int, k: int) -> int:
    return math.comb(n + k, k)


def monomial_features(points: np.ndarray, k: int) -> np.ndarray:
    """z_k of every row: (M, n) -> (M, D), leading column 1."""
    points = np.asarray(points, dtype=float)
    m, n = points.shape
    terms = monomial_exponents(n, k)
    column = {term: i for i, term in enumerate(terms)}
    Z = np.empty((m, len(terms)))
    Z[:, 0] = 1.0
    for i, term in enumerate(terms[1:], start=1):
        Z[:, i] = Z[:, column[term[:-1]]] * points[:, term[-1]]
    return Z


def monomials(x, k: int) -> np.ndarray:
    """z_k(x) of one point."""
    point = np.atleast_1d(np.asarray(x, dtype=float))
    return monomial_features(point.reshape(1, -1), k)[0]


class ChristoffelSet(SetEstimate):
    """Sublevel set of the empirical inverse Christoffel function."""

    method = "christoffel"

    def __init__(
        self,
        k: int,
        M_inv,
        level: float,
        rho: float,
        normalize: bool,
        shift,
        scale,
    ):
        self.k = int(k)
        self.M_inv = np.array(M_inv, dtype=float)
        self.level = float(level)
        self.rho = float(rho)
        self.normalize = bool(normalize)
        self.shift = np.array(shift, dtype=float)
        self.scale = np.array(scale, dtype=float)
        if self.M_inv.shape != (feature_count(self.dim, self.k),) * 2:
            raise ValueError(
                f"M_inv of shape {self.M_inv.shape} does not match "
                f"{feature_count(self.dim, self.k)} features"
            )

    @property
    def dim(self) -> int:
        return len(self.shift)

    @property
    def threshold(self) -> float:
        return self.level

    def transform(self, points: np.ndarray) -> np.ndarray:
        if not self.normalize:
            return np.asarray(points, dtype=float)
        return (np.asarray(points, dtype=float) - self.shift) / self.scale

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        out = np.empty(len(points))
        for start in range(0, len(points), EVAL_CHUNK):
            block = points[start:start + EVAL_CHUNK]
            Z = monomial_features(self.transform(block), self.k)
            # per-row summation order is fixed, so a row's value does not depend on the block
            out[start:start + EVAL_CHUNK] = np.einsum("ij,jk,ik->i", Z, self.M_inv, Z)
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": "christoffel",
            "k": self.k,
            "rho": self.rho,
            "normalize": self.normalize,
            "shift": self.shift.tolist(),
            "scale": self.scale.tolist(),
            "M_inv": self.M_inv.tolist(),
            "level": self.level,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ChristoffelSet":
        return cls(
            k=data["k"],
            M_inv=data["M_inv"],
            level=data["level"],
            rho=data["rho"],
            normalize=data["normalize"],
            shift=data["shift"],
            scale=data["scale"],
        )

    def __repr__(self) -> str:
        return f"ChristoffelSet(k={self.k}, dim={self.dim}, level={self.level:.6g})"


def _normalization(points: np.ndarray, normalize: bool) -> Tuple[np.ndarray, np.ndarray]:
    n = points.shape[1]
    if not normalize:
        return np.zeros(n), np.ones(n)
    shift = points.mean(axis=0)
    scale = points.std(axis=0)
    flat = scale == 0.0
    if np.any(flat):
        logger.warning(
            "Coordinates %s have zero standard deviation; leaving them unscaled",
            [int(i) for i in np.flatnonzero(flat)],
        )
        scale[flat] = 1.0
    return shift, scale


def moment_matrix(Z: np.ndarray) -> np.ndarray:
    M = (Z.T @ Z) / len(Z)
    return 0.5 * (M + M.T)


def invert_moment_matrix(M: np.ndarray, rho: float) -> np.ndarray:
    """(M + rho I)^-1, or the pseudo-inverse of M when rho is 0."""
    if rho == 0.0:
        return pinvh(M, atol=0.0, rtol=PINV_RTOL)
    try:
        factor = cho_factor(M + rho * np.eye(len(M)))
    except LinAlgError as e:
        raise NotPositiveDefiniteError("Regularized moment matrix is not positive definite") from e
    inverse = cho_solve(factor, np.eye(len(M)))
    return 0.5 * (inverse + inverse.T)


def fit_christoffel(
    samples,
    k: int = 10,
    rho: float = 1e-4,
    normalize: bool = True,
    timer: Optional[StageTimer] = None,
) -> ChristoffelSet:
    """Fit the empirical inverse Christoffel sublevel set of a SampleSet (or (N, n) array)."""
    timer = timer or StageTimer()
    points = np.asarray(getattr(samples, "terminal", samples), dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise EmptySampleError("Cannot fit a Christoffel estimate to an empty sample set")
    if rho < 0:
        raise ValueError(f"rho must be >= 0, got {rho}")

    shift, scale = _normalization(points, normalize)
    with timer.stage("apply polynomial mapping to data"):
        Z = monomial_features((points - shift) / scale if normalize else points, k)
    logger.debug("Moment matrix of %d features from %d samples", Z.shape[1], len(Z))
    with timer.stage("construct moment matrix"):
        M = moment_matrix(Z)
    with timer.stage("(pseudo)invert moment matrix"):
        M_inv = invert_moment_matrix(M, rho)

    fitted = ChristoffelSet(k=k, M_inv=M_inv, level=0.0, rho=rho, normalize=normalize, shift=shift, scale=scale)
    with timer.stage("compute level parameter"):
        fitted.level = float(np.max(fitted.evaluate(points)))
    return fitted
