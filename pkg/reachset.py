"""Post-fit geometry: membership, dimension isolation, reach tubes, lattice fields and safety checks."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage

from errors import BoundsTooSmallError, DimensionError, FitError, ReachestError
from estimators import ChristoffelSet, PNormBall, SetEstimate, StageTimer, estimate_from_dict, fit_estimate
from estimators.pnorm import pnorm_bounds
from models.run_config import MethodConfig
from models.unsafe import CylinderPredicate, GoalClause, HalfspacePredicate
from ode_sim import SampleSet

logger = logging.getLogger(__name__)

Bounds = List[Tuple[float, float]]

# a grid verdict may only certify clearance on lattices at least this fine
MIN_CLEAR_GRID = 64
BOUNDS_PAD = 0.25
INTERVAL_GRID = 2001


@dataclass(frozen=True)
class ReachEstimate:
    """A fitted set together with the original state indices it covers."""

    estimate: SetEstimate
    dims: Tuple[int, ...]
    sample_lo: np.ndarray
    sample_hi: np.ndarray

    def __post_init__(self):
        if len(self.dims) != self.estimate.dim:
            raise DimensionError(f"{len(self.dims)} dims for a {self.estimate.dim}-dimensional estimate")

    @property
    def dim(self) -> int:
        return self.estimate.dim

    @property
    def method(self) -> str:
        return self.estimate.method

    def contains(self, x) -> bool:
        return self.estimate.contains(x)

    def contains_many(self, points) -> np.ndarray:
        return self.estimate.contains_many(points)

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.estimate.to_dict(),
            "dims": list(self.dims),
            "sample_lo": self.sample_lo.tolist(),
            "sample_hi": self.sample_hi.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ReachEstimate":
        return cls(
            estimate=estimate_from_dict(data),
            dims=tuple(data["dims"]),
            sample_lo=np.array(data["sample_lo"], dtype=float),
            sample_hi=np.array(data["sample_hi"], dtype=float),
        )


@dataclass(frozen=True)
class ReachTube:
    """One estimate per recorded time."""

    times: np.ndarray
    slices: Tuple[ReachEstimate, ...]

    def __post_init__(self):
        if len(self.times) != len(self.slices):
            raise DimensionError(f"{len(self.times)} times for {len(self.slices)} slices")

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.slices[0].dims

    def band(self, dim: int, grid_n: int = INTERVAL_GRID) -> Tuple[np.ndarray, np.ndarray]:
        """Lower and upper extent of state ``dim`` at every recorded time."""
        extents = np.array([interval_of(s, dim, grid_n=grid_n) for s in self.slices])
        return extents[:, 0], extents[:, 1]

    def to_dict(self) -> Dict[str, Any]:
        return {"times": self.times.tolist(), "slices": [s.to_dict() for s in self.slices]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ReachTube":
        return cls(
            times=np.array(data["times"], dtype=float),
            slices=tuple(ReachEstimate.from_dict(s) for s in data["slices"]),
        )


def contains(e: ReachEstimate, x) -> bool:
    return e.contains(x)


def iso_dim(samples: SampleSet, dims: Sequence[int]) -> SampleSet:
    """Project onto the columns ``dims`` (positions in the current set).

    The result records the original state indices of the kept columns.
    """
    dims = list(dims)
    if not dims:
        raise DimensionError("Need at least one dimension to isolate")
    if any(b <= a for a, b in zip(dims, dims[1:])):
        raise DimensionError(f"Dimensions must be strictly increasing without duplicates: {dims}")
    if dims[0] < 0 or dims[-1] >= samples.state_dim:
        raise DimensionError(f"Dimensions {dims} out of range for {samples.state_dim} states")
    full = samples.full[:, :, dims] if samples.full is not None else None
    return SampleSet(
        terminal=samples.terminal[:, dims],
        seed=samples.seed,
        full=full,
        times=samples.times,
        dims=tuple(samples.dims[i] for i in dims),
    )


def fit_reach(samples: SampleSet, method: MethodConfig, timer: Optional[StageTimer] = None) -> ReachEstimate:
    points = samples.terminal
    return ReachEstimate(
        estimate=fit_estimate(points, method, timer),
        dims=tuple(samples.dims),
        sample_lo=points.min(axis=0),
        sample_hi=points.max(axis=0),
    )


def fit_tube(
    samples: SampleSet,
    method: MethodConfig,
    workers: int = 1,
    timer: Optional[StageTimer] = None,
) -> ReachTube:
    """Fit every recorded time independently, with the same method and budget."""
    if not samples.has_full:
        raise ReachestError("Reach tubes need full trajectories; sample with keep_full")

    def fit_slice(index: int) -> ReachEstimate:
        try:
            return fit_reach(samples.at_time(index), method, timer)
        except (ReachestError, ValueError, ArithmeticError) as e:
            raise FitError(index, e) from e

    indices = range(len(samples.times))
    if workers <= 1:
        slices = [fit_slice(i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            slices = list(executor.map(fit_slice, indices))
    return ReachTube(times=np.asarray(samples.times), slices=tuple(slices))


@dataclass(frozen=True)
class ScalarField:
    """Defining function on a uniform lattice; members satisfy value <= threshold + slack."""

    axes: Tuple[np.ndarray, ...]
    values: np.ndarray
    threshold: float
    slack: float
    bounds: Bounds
    grid_n: int
    dims: Tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def member_mask(self) -> np.ndarray:
        return self.values <= self.threshold + self.slack

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def rows(self) -> np.ndarray:
        """One row ``i, j[, k], x1, x2[, x3], value`` per lattice point."""
        index = np.indices(self.values.shape).reshape(self.dim, -1).T
        return np.hstack([index, self.points(), self.values.reshape(-1, 1)])

    def sidecar(self) -> Dict[str, Any]:
        return {
            "threshold": self.threshold,
            "slack": self.slack,
            "bounds": [list(b) for b in self.bounds],
            "grid_n": self.grid_n,
            "dims": list(self.dims),
        }


def default_bounds(e: ReachEstimate) -> Bounds:
    """Sample box padded by a quarter of its width, widened to the ball's own box for p-norm sets."""
    lo = np.asarray(e.sample_lo, dtype=float)
    hi = np.asarray(e.sample_hi, dtype=float)
    width = hi - lo
    pad = np.where(width > 0, BOUNDS_PAD * width, 0.5)
    lo, hi = lo - pad, hi + pad
    if isinstance(e.estimate, PNormBall):
        ball_lo, ball_hi = pnorm_bounds(e.estimate)
        margin = 0.05 * (ball_hi - ball_lo)
        lo = np.minimum(lo, ball_lo - margin)
        hi = np.maximum(hi, ball_hi + margin)
    return [(float(a), float(b)) for a, b in zip(lo, hi)]


def _resolve_bounds(e: ReachEstimate, bounds: Optional[Sequence[Tuple[float, float]]]) -> Bounds:
    if bounds is None:
        return default_bounds(e)
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    if len(bounds) != e.dim:
        raise DimensionError(f"{len(bounds)} bounds for a {e.dim}-dimensional estimate")
    for j, (lo, hi) in enumerate(bounds):
        if not hi > lo:
            raise DimensionError(f"Bounds of x{e.dims[j] + 1} are empty: [{lo}, {hi}]")
        if e.sample_lo[j] < lo or e.sample_hi[j] > hi:
            raise BoundsTooSmallError(
                f"Bounds [{lo}, {hi}] of x{e.dims[j] + 1} do not cover the samples "
                f"[{e.sample_lo[j]}, {e.sample_hi[j]}]"
            )
    return bounds


def evaluate_lattice(
    e: ReachEstimate,
    bounds: Optional[Sequence[Tuple[float, float]]] = None,
    grid_n: int = 200,
) -> ScalarField:
    """Defining function on a grid_n^d lattice, for d in 1..3."""
    if not 1 <= e.dim <= 3:
        raise DimensionError(f"Lattice evaluation supports 1 to 3 dimensions, got {e.dim}")
    if grid_n < 2:
        raise DimensionError(f"grid_n must be at least 2, got {grid_n}")
    bounds = _resolve_bounds(e, bounds)
    axes = tuple(np.linspace(lo, hi, grid_n) for lo, hi in bounds)
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    values = e.estimate.evaluate(points).reshape((grid_n,) * e.dim)
    return ScalarField(
        axes=axes,
        values=values,
        threshold=e.estimate.threshold,
        slack=e.estimate.slack,
        bounds=bounds,
        grid_n=grid_n,
        dims=e.dims,
    )


def grid_contour(
    e: ReachEstimate,
    bounds: Optional[Sequence[Tuple[float, float]]] = None,
    grid_n: int = 200,
) -> ScalarField:
    """Scalar field for contour extraction (2-D or 3-D estimates)."""
    if e.dim not in (2, 3):
        raise DimensionError(f"Contour fields need a 2- or 3-dimensional estimate, got {e.dim}")
    return evaluate_lattice(e, bounds, grid_n)


def holes(f: ScalarField) -> List[np.ndarray]:
    """Lattice points outside the set that are enclosed by members, one array per hole."""
    outside = ~f.member_mask
    labels, count = ndimage.label(outside)
    border = set()
    for axis in range(f.dim):
        for edge in (0, -1):
            border.update(np.unique(np.take(labels, edge, axis=axis)).tolist())
    return [np.argwhere(labels == label) for label in range(1, count + 1) if label not in border]


def interval_of(
    e: ReachEstimate,
    dim: int,
    bounds: Optional[Sequence[Tuple[float, float]]] = None,
    grid_n: int = INTERVAL_GRID,
) -> Tuple[float, float]:
    """Extent of the set along original state ``dim``.

    Exact for p-norm balls; for Christoffel sets, the member lattice points
    widened by one lattice step on each side.
    """
    if dim not in e.dims:
        raise DimensionError(f"State {dim} is not covered by the estimate (dims {list(e.dims)})")
    position = list(e.dims).index(dim)
    if isinstance(e.estimate, PNormBall):
        lo, hi = pnorm_bounds(e.estimate)
        return float(lo[position]), float(hi[position])

    if e.dim > 3:
        raise DimensionError(f"Lattice extent supports up to 3 dimensions, got {e.dim}")
    n = grid_n if e.dim == 1 else min(grid_n, 401 if e.dim == 2 else 101)
    f = evaluate_lattice(e, bounds, n)
    mask = f.member_mask
    other = tuple(a for a in range(f.dim) if a != position)
    along = np.any(mask, axis=other) if other else mask
    if not along.any():
        return float(e.sample_lo[position]), float(e.sample_hi[position])
    axis = f.axes[position]
    step = axis[1] - axis[0]
    first, last = np.flatnonzero(along)[[0, -1]]
    if first == 0 or last == len(axis) - 1:
        logger.warning("Estimate of x%d reaches the lattice bounds; its extent may be larger", dim + 1)
    return float(axis[first] - step), float(axis[last] + step)


class Verdict(str, Enum):
    INTERSECTS = "intersects"
    CLEAR = "clear"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class UnsafeReport:
    verdict: Verdict
    exact: bool = False
    witness: Optional[np.ndarray] = None
    time_index: Optional[int] = None
    details: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "exact": self.exact,
            "witness": None if self.witness is None else self.witness.tolist(),
            "time_index": self.time_index,
        }


def _halfspace_exact(e: ReachEstimate, predicate: HalfspacePredicate) -> Optional[UnsafeReport]:
    ball = e.estimate
    if not isinstance(ball, PNormBall):
        return None
    c = predicate.project(e.dims)
    radius = 1.0 + ball.slack
    A_inv = np.linalg.inv(ball.A)
    center = A_inv @ ball.b
    if ball.p == math.inf:
        direction = np.sign(c)
        support = c @ center + radius * np.sum(np.abs(c) / np.diag(ball.A))
    else:
        g = A_inv @ c
        norm = np.linalg.norm(g)
        direction = g / norm
        support = c @ center + radius * norm
    if support >= predicate.offset:
        witness = center + radius * (A_inv @ direction)
        return UnsafeReport(Verdict.INTERSECTS, exact=True, witness=witness,
                            details=[f"support value {support:.6g} >= {predicate.offset:g}"])
    return UnsafeReport(Verdict.CLEAR, exact=True,
                        details=[f"support value {support:.6g} < {predicate.offset:g}"])


def _grid_check(
    e: ReachEstimate,
    predicate: Union[HalfspacePredicate, CylinderPredicate],
    bounds: Optional[Sequence[Tuple[float, float]]],
    grid_n: int,
) -> UnsafeReport:
    f = evaluate_lattice(e, bounds, grid_n)
    points = f.points()
    hits = f.member_mask.ravel() & predicate.is_unsafe(points, e.dims)
    if hits.any():
        return UnsafeReport(Verdict.INTERSECTS, witness=points[int(np.argmax(hits))])
    if grid_n >= MIN_CLEAR_GRID:
        return UnsafeReport(Verdict.CLEAR)
    return UnsafeReport(Verdict.UNKNOWN, details=[f"grid_n {grid_n} < {MIN_CLEAR_GRID}"])


def _check_estimate(
    e: ReachEstimate,
    predicate: Union[HalfspacePredicate, CylinderPredicate],
    bounds: Optional[Sequence[Tuple[float, float]]],
    grid_n: int,
) -> UnsafeReport:
    if isinstance(predicate, HalfspacePredicate):
        exact = _halfspace_exact(e, predicate)
        if exact is not None:
            return exact
    return _grid_check(e, predicate, bounds, grid_n)


def check_unsafe(
    e: Union[ReachEstimate, ReachTube],
    predicate: Union[HalfspacePredicate, CylinderPredicate],
    bounds: Optional[Sequence[Tuple[float, float]]] = None,
    grid_n: int = 200,
) -> UnsafeReport:
    """Does the estimate (or any tube slice) meet the unsafe set?"""
    if isinstance(e, ReachEstimate):
        return _check_estimate(e, predicate, bounds, grid_n)

    first_unknown: Optional[UnsafeReport] = None
    exact = True
    for i, s in enumerate(e.slices):
        report = _check_estimate(s, predicate, bounds, grid_n)
        exact = exact and report.exact
        if report.verdict == Verdict.INTERSECTS:
            return UnsafeReport(Verdict.INTERSECTS, exact=report.exact, witness=report.witness,
                                time_index=i, details=report.details)
        if report.verdict == Verdict.UNKNOWN and first_unknown is None:
            first_unknown = UnsafeReport(Verdict.UNKNOWN, time_index=i, details=report.details)
    if first_unknown is not None:
        return first_unknown
    return UnsafeReport(Verdict.CLEAR, exact=exact)


@dataclass(frozen=True)
class GoalResult:
    clause: GoalClause
    passed: bool
    worst_time: Optional[float] = None
    worst_value: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "clause": self.clause.label(),
            "passed": self.passed,
            "worst_time": self.worst_time,
            "worst_value": self.worst_value,
        }


def check_goals(tube: ReachTube, goals: Sequence[GoalClause]) -> List[GoalResult]:
    """Check each clause against the tube band of its state."""
    results: List[GoalResult] = []
    bands: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
    for clause in goals:
        if clause.dim not in bands:
            bands[clause.dim] = tube.band(clause.dim)
        lo, hi = bands[clause.dim]
        mask = clause.time_mask(tube.times)
        if not mask.any():
            logger.warning("Goal '%s' selects no recorded time", clause.label())
            results.append(GoalResult(clause, passed=False))
            continue
        times = tube.times[mask]
        margins = []
        if clause.lower is not None:
            margins.append((lo[mask] - clause.lower, lo[mask]))
        if clause.upper is not None:
            margins.append((clause.upper - hi[mask], hi[mask]))
        worst_margin, worst_time, worst_value = math.inf, None, None
        for margin, values in margins:
            i = int(np.argmin(margin))
            if margin[i] < worst_margin:
                worst_margin, worst_time, worst_value = margin[i], float(times[i]), float(values[i])
        results.append(GoalResult(clause, passed=bool(worst_margin >= 0), worst_time=worst_time, worst_value=worst_value))
    return results


def estimate_kind(e: ReachEstimate) -> str:
    if isinstance(e.estimate, ChristoffelSet):
        return "Inverse Christoffel Function"
    return "Scenario p-Norm Ball"
