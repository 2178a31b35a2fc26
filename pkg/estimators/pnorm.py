"""Scenario p-norm ball estimates: minimum-volume ellipsoid (p = 2) and tight box (p = inf).

The ellipsoid is found with Khachiyan's barycentric ascent on the dual of the
minimum-volume enclosing ellipsoid problem, lifted to n + 1 dimensions, with
Todd-Yildirim away steps so support weights can also shrink.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigh
from scipy.spatial import ConvexHull, QhullError

from errors import EmptySampleError, NotPositiveDefiniteError, RankDeficientError

from .base import SetEstimate, StageTimer

logger = logging.getLogger(__name__)

MIN_BOX_WIDTH = 1e-12
# p = inf membership slack per unit of max |b_j|, the scale of the rounding in A x - b
BOX_SLACK = 16 * np.finfo(float).eps
# hull pre-reduction only pays off in low dimension
MAX_HULL_DIM = 8


class PNormBall(SetEstimate):
    """The set {x : ||A x - b||_p <= 1} for p in {2, inf}."""

    method = "pnorm"

    def __init__(self, A, b, p: float, tol: float = 1e-7):
        self.A = np.array(A, dtype=float).reshape(len(b), len(b))
        self.b = np.array(b, dtype=float)
        self.p = float(p)
        self.tol = float(tol)
        if self.p not in (2.0, math.inf):
            raise ValueError(f"p must be 2 or inf, got {p}")

    @property
    def dim(self) -> int:
        return len(self.b)

    @property
    def threshold(self) -> float:
        return 1.0

    @property
    def slack(self) -> float:
        if self.p == 2.0:
            return 10.0 * self.tol
        return BOX_SLACK * (1.0 + float(np.max(np.abs(self.b))))

    @property
    def center(self) -> np.ndarray:
        return np.linalg.solve(self.A, self.b)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.p == math.inf:
            return np.max(np.abs(points * np.diag(self.A) - self.b), axis=1)
        return np.linalg.norm(points @ self.A.T - self.b, axis=1)

    def negative_log_det(self) -> float:
        return negative_log_det(self.A)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": "pnorm",
            "p": "inf" if self.p == math.inf else self.p,
            "tol": self.tol,
            "A": self.A.tolist(),
            "b": self.b.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PNormBall":
        p = data["p"]
        return cls(
            A=data["A"],
            b=data["b"],
            p=math.inf if str(p).lower() in ("inf", "infinity") else float(p),
            tol=data.get("tol", 1e-7),
        )

    def __repr__(self) -> str:
        return f"PNormBall(p={self.p}, dim={self.dim})"


@dataclass(frozen=True)
class KhachiyanResult:
    center: np.ndarray
    shape: np.ndarray  # ellipsoid {x : (x - center)^T shape (x - center) <= 1}
    weights: np.ndarray
    iterations: int
    gap: float
    converged: bool


def negative_log_det(A) -> float:
    """-log det A through a Cholesky factorization."""
    A = np.asarray(A, dtype=float)
    try:
        c, _ = cho_factor(A)
    except LinAlgError as e:
        raise NotPositiveDefiniteError("Matrix is not positive definite") from e
    return float(-2.0 * np.sum(np.log(np.diag(c))))


def _check_full_rank(points: np.ndarray) -> None:
    n, d = points.shape
    if n < d + 1:
        raise RankDeficientError(f"Need at least {d + 1} samples to span {d} dimensions, got {n}")
    centered = points - points.mean(axis=0)
    rank = np.linalg.matrix_rank(centered)
    if rank < d:
        raise RankDeficientError(f"Samples span an affine subspace of dimension {rank} < {d}")


def hull_points(points: np.ndarray) -> np.ndarray:
    """Vertices of the convex hull (only these can touch the ellipsoid)."""
    n, d = points.shape
    if d == 1:
        return np.unique(points[[np.argmin(points[:, 0]), np.argmax(points[:, 0])]], axis=0)
    if d > MAX_HULL_DIM or n <= d + 1:
        return points
    try:
        hull = ConvexHull(points)
    except QhullError:
        logger.debug("Convex hull failed, using all %d points", n)
        return points
    return points[np.sort(hull.vertices)]


def khachiyan(points, tol: float = 1e-7, max_iter: int = 1_000_000) -> KhachiyanResult:
    """Minimum-volume enclosing ellipsoid of the rows of ``points``.

    Stops once max_i (M_i - (d+1)) / (d+1) <= tol, where M_i is the lifted
    Mahalanobis norm of point i under the current dual weights.
    """
    P = np.asarray(points, dtype=float)
    n, d = P.shape
    Q = np.vstack([P.T, np.ones(n)])
    u = np.full(n, 1.0 / n)
    gap = math.inf
    iterations = max_iter
    converged = False

    for it in range(max_iter):
        X = (Q * u) @ Q.T
        try:
            factor = cho_factor(X)
        except LinAlgError as e:
            raise RankDeficientError("Lifted moment matrix became singular") from e
        M = np.einsum("ij,ij->j", Q, cho_solve(factor, Q))

        j = int(np.argmax(M))
        gap = (M[j] - (d + 1)) / (d + 1)
        if gap <= tol:
            iterations = it
            converged = True
            break

        support = np.flatnonzero(u > 0)
        k = int(support[np.argmin(M[support])])
        away = ((d + 1) - M[k]) / (d + 1)

        if away > gap and u[k] < 1.0:
            # shrink the weight of the most interior support point
            max_step = u[k] / (1.0 - u[k])
            step = max_step if M[k] <= 1.0 else min(((d + 1) - M[k]) / ((d + 1) * (M[k] - 1.0)), max_step)
            u *= 1.0 + step
            u[k] -= step
            if step == max_step:
                u[k] = 0.0
        else:
            step = (M[j] - (d + 1)) / ((d + 1) * (M[j] - 1.0))
            u *= 1.0 - step
            u[j] += step
    else:
        logger.warning("Khachiyan stopped after %d iterations with gap %.3g > tol %.3g", max_iter, gap, tol)

    center = u @ P
    cov = (P.T * u) @ P - np.outer(center, center)
    cov = 0.5 * (cov + cov.T)
    try:
        factor = cho_factor(cov)
    except LinAlgError as e:
        raise RankDeficientError("Ellipsoid covariance is singular") from e
    shape = cho_solve(factor, np.eye(d)) / d
    return KhachiyanResult(center=center, shape=0.5 * (shape + shape.T), weights=u, iterations=iterations, gap=gap,
                           converged=converged)


def symmetric_sqrt(S: np.ndarray) -> np.ndarray:
    w, V = eigh(S)
    if np.any(w <= 0):
        raise NotPositiveDefiniteError("Shape matrix is not positive definite")
    root = (V * np.sqrt(w)) @ V.T
    return 0.5 * (root + root.T)


def fit_ellipsoid(points: np.ndarray, tol: float = 1e-7, max_iter: int = 1_000_000) -> PNormBall:
    _check_full_rank(points)
    reduced = hull_points(points)
    logger.debug("MVEE on %d of %d points", len(reduced), len(points))
    result = khachiyan(reduced, tol=tol, max_iter=max_iter)
    A = symmetric_sqrt(result.shape)
    return PNormBall(A=A, b=A @ result.center, p=2.0, tol=tol)


def fit_box(points: np.ndarray) -> PNormBall:
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    width = np.maximum(hi - lo, MIN_BOX_WIDTH)
    if np.any(hi - lo < MIN_BOX_WIDTH):
        logger.warning("Zero-width coordinate in box estimate; using minimum width %g", MIN_BOX_WIDTH)
    diag = 2.0 / width
    return PNormBall(A=np.diag(diag), b=diag * (hi + lo) / 2.0, p=math.inf)


def fit_pnorm_ball(
    samples,
    p: float = 2.0,
    tol: float = 1e-7,
    max_iter: int = 1_000_000,
    timer: Optional[StageTimer] = None,
) -> PNormBall:
    """Fit the scenario p-norm ball of a SampleSet (or an (N, n) array)."""
    points = np.asarray(getattr(samples, "terminal", samples), dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise EmptySampleError("Cannot fit a p-norm ball to an empty sample set")
    if p not in (2.0, math.inf):
        raise ValueError(f"p must be 2 or inf, got {p}")
    timer = timer or StageTimer()
    with timer.stage("solve the scenario program"):
        if p == 2.0:
            return fit_ellipsoid(points, tol=tol, max_iter=max_iter)
        return fit_box(points)


def pnorm_bounds(ball: PNormBall) -> Tuple[np.ndarray, np.ndarray]:
    """Axis-aligned bounding box of the ball, slack included."""
    radius = 1.0 + ball.slack
    if ball.p == math.inf:
        half = radius / np.diag(ball.A)
    else:
        A_inv = np.linalg.inv(ball.A)
        half = radius * np.linalg.norm(A_inv, axis=0)
    center = ball.center
    return center - half, center + half
