"""System abstraction, fixed-step RK4 integration and i.i.d. trajectory sampling.

States are integrated either one at a time (shape ``(n_x,)``) or as a batch in
column layout (dynamics see ``(n_x, B)`` and index rows with ``x[i]``). Every
sample owns a counter-based random stream derived from ``(seed, index)``, and
batches are cut by sample index only, so the output never depends on how many
workers drew it.
"""

import logging
import pickle
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from disturbance import DisturbanceSpec
from errors import ConfigError, DimensionError, IntegrationDivergedError, ReachestError

logger = logging.getLogger(__name__)

Dynamics = Callable[[np.ndarray, float, Optional[np.ndarray]], np.ndarray]
CustomSampler = Callable[[np.random.Generator, int], Any]


@dataclass(frozen=True)
class SystemSpec:
    """Everything needed to draw trajectories of one system."""

    state_dim: int
    t0: float
    t1: float
    parts: int
    dynamics: Optional[Dynamics] = None
    init_intervals: Tuple[Tuple[float, float], ...] = ()
    disturbance: Optional[DisturbanceSpec] = None
    custom_sampler: Optional[CustomSampler] = None
    name: str = "custom"
    unsafe: Any = None  # default UnsafePredicate of a benchmark, if it has one

    def __post_init__(self):
        if self.state_dim < 1:
            raise ConfigError("state_dim", "must be a positive integer")
        if self.parts < 2:
            raise ConfigError("parts", f"need at least 2 grid points, got {self.parts}")
        if not self.t1 > self.t0:
            raise ConfigError("t1", f"t1 ({self.t1}) must exceed t0 ({self.t0})")
        if (self.dynamics is None) == (self.custom_sampler is None):
            raise ConfigError("dynamics", "exactly one of dynamics or custom_sampler must be set")
        if self.dynamics is not None:
            intervals = tuple((float(lo), float(hi)) for lo, hi in self.init_intervals)
            object.__setattr__(self, "init_intervals", intervals)
            if len(intervals) != self.state_dim:
                raise ConfigError(
                    "init_intervals",
                    f"expected {self.state_dim} intervals, got {len(intervals)}",
                )
            for i, (lo, hi) in enumerate(intervals):
                if lo > hi:
                    raise ConfigError(f"init_intervals.{i}", f"lower bound {lo} exceeds upper bound {hi}")
        if self.disturbance is not None and self.disturbance.state_dim != self.state_dim:
            raise ConfigError(
                "disturbance",
                f"expected {self.state_dim} entries, got {self.disturbance.state_dim}",
            )

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.parts)

    @property
    def uses_dynamics(self) -> bool:
        return self.dynamics is not None


@dataclass(frozen=True)
class Trajectory:
    """Grid times and states; states are (parts, n_x) or (B, parts, n_x)."""

    times: np.ndarray
    states: np.ndarray

    @property
    def terminal(self) -> np.ndarray:
        return self.states[..., -1, :]


@dataclass(frozen=True)
class SampleSet:
    """N terminal states, optionally with the recorded trajectories."""

    terminal: np.ndarray
    seed: int
    full: Optional[np.ndarray] = None
    times: Optional[np.ndarray] = None
    dims: Tuple[int, ...] = ()

    def __post_init__(self):
        if not self.dims:
            object.__setattr__(self, "dims", tuple(range(self.terminal.shape[1])))
        if len(self.dims) != self.terminal.shape[1]:
            raise DimensionError(f"{len(self.dims)} dims for {self.terminal.shape[1]} columns")

    @property
    def n_samples(self) -> int:
        return self.terminal.shape[0]

    @property
    def state_dim(self) -> int:
        return self.terminal.shape[1]

    @property
    def has_full(self) -> bool:
        return self.full is not None

    def at_time(self, index: int) -> "SampleSet":
        """The states of every sample at one recorded time index."""
        if self.full is None:
            raise ReachestError("Sample set does not hold full trajectories")
        return SampleSet(terminal=self.full[:, index, :], seed=self.seed, dims=self.dims)


def _field(spec: SystemSpec, disturbance: Optional[DisturbanceSpec]):
    f = spec.dynamics

    def evaluate(state: np.ndarray, t: float) -> np.ndarray:
        d = None if disturbance is None else disturbance.values(t)
        derivative = np.asarray(f(state, t, d), dtype=float)
        if derivative.ndim < state.ndim:
            derivative = derivative.reshape(derivative.shape + (1,) * (state.ndim - derivative.ndim))
        return np.broadcast_to(derivative, state.shape)

    return evaluate


def integrate(spec: SystemSpec, x0, disturbance: Optional[DisturbanceSpec] = None) -> Trajectory:
    """Classical RK4 over the uniform grid of ``spec``.

    ``x0`` is one state (n_x,) or a batch (B, n_x); the returned states have
    shape (parts, n_x) or (B, parts, n_x). Disturbance values are taken at the
    exact stage times.
    """
    if not spec.uses_dynamics:
        raise ConfigError("dynamics", "integrate needs a dynamics-based system")
    x = np.array(x0, dtype=float)
    if x.ndim not in (1, 2) or x.shape[-1] != spec.state_dim:
        raise DimensionError(f"Initial state of shape {x.shape} does not match {spec.state_dim} states")
    batched = x.ndim == 2
    state = x.T.copy() if batched else x
    times = spec.grid
    out = np.empty((spec.parts,) + state.shape)
    out[0] = state
    rhs = _field(spec, disturbance)

    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(spec.parts - 1):
            t = times[i]
            h = times[i + 1] - t
            k1 = rhs(state, t)
            k2 = rhs(state + 0.5 * h * k1, t + 0.5 * h)
            k3 = rhs(state + 0.5 * h * k2, t + 0.5 * h)
            k4 = rhs(state + h * k3, times[i + 1])
            state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            finite = np.isfinite(state)
            if not finite.all():
                if batched:
                    column = int(np.argmin(finite.all(axis=0)))
                    raise IntegrationDivergedError(i + 1, sample_index=column)
                raise IntegrationDivergedError(i + 1)
            out[i + 1] = state

    states = out.transpose(2, 0, 1) if batched else out
    return Trajectory(times=times, states=states)


def sample_stream(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream owned by one sample index."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def draw_initial(spec: SystemSpec, rng: np.random.Generator) -> np.ndarray:
    """Each coordinate uniform on its interval."""
    lows = np.array([lo for lo, _ in spec.init_intervals])
    highs = np.array([hi for _, hi in spec.init_intervals])
    return rng.uniform(lows, highs)


def _as_states(spec: SystemSpec, result: Any, index: int) -> np.ndarray:
    states = result.states if isinstance(result, Trajectory) else np.asarray(result, dtype=float)
    if states.shape != (spec.parts, spec.state_dim):
        raise DimensionError(
            f"Sampler returned shape {states.shape} for sample {index}, "
            f"expected ({spec.parts}, {spec.state_dim})"
        )
    if not np.isfinite(states).all():
        bad = int(np.argmin(np.isfinite(states).all(axis=1)))
        raise IntegrationDivergedError(bad, sample_index=index)
    return states


@dataclass(frozen=True)
class _Chunk:
    spec: SystemSpec
    seed: int
    start: int
    stop: int
    keep_full: bool
    record_every: int


def _sample_chunk(chunk: _Chunk) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    spec = chunk.spec
    indices = range(chunk.start, chunk.stop)

    if spec.custom_sampler is not None:
        states = np.stack([
            _as_states(spec, spec.custom_sampler(sample_stream(chunk.seed, j), j), j)
            for j in indices
        ])
    else:
        x0s: List[np.ndarray] = []
        drawn: List[DisturbanceSpec] = []
        for j in indices:
            rng = sample_stream(chunk.seed, j)
            x0s.append(draw_initial(spec, rng))
            if spec.disturbance is not None:
                drawn.append(spec.disturbance.draw_alphas(rng))
        batch_disturbance = DisturbanceSpec.stack(drawn) if drawn else None
        try:
            states = integrate(spec, np.stack(x0s), batch_disturbance).states
        except IntegrationDivergedError as e:
            raise e.with_sample(chunk.start + e.sample_index) from e

    terminal = states[:, -1, :].copy()
    full = states[:, ::chunk.record_every, :].copy() if chunk.keep_full else None
    return terminal, full


def _is_picklable(spec: SystemSpec) -> bool:
    try:
        pickle.dumps(spec)
    except (pickle.PicklingError, AttributeError, TypeError):
        return False
    return True


def _make_executor(spec: SystemSpec, workers: int) -> Executor:
    if _is_picklable(spec):
        return ProcessPoolExecutor(max_workers=workers)
    logger.warning("System '%s' cannot be pickled; sampling with %d threads instead of processes",
                   spec.name, workers)
    return ThreadPoolExecutor(max_workers=workers)


def iter_sample_chunks(
    spec: SystemSpec,
    n: int,
    seed: int,
    keep_full: bool = False,
    workers: int = 1,
    batch_size: int = 256,
    record_every: int = 1,
) -> Iterator[Tuple[int, np.ndarray, Optional[np.ndarray]]]:
    """Yield ``(stop, terminal, full)`` per batch, in sample-index order."""
    if n < 1:
        raise ConfigError("n", f"need at least one sample, got {n}")
    if record_every < 1 or (spec.parts - 1) % record_every != 0:
        raise ConfigError("record_every", f"{record_every} does not divide {spec.parts - 1} steps")
    chunks = [
        _Chunk(spec, seed, start, min(start + batch_size, n), keep_full, record_every)
        for start in range(0, n, batch_size)
    ]
    if workers <= 1 or len(chunks) == 1:
        for chunk in chunks:
            terminal, full = _sample_chunk(chunk)
            yield chunk.stop, terminal, full
        return
    with _make_executor(spec, workers) as executor:
        for chunk, (terminal, full) in zip(chunks, executor.map(_sample_chunk, chunks)):
            yield chunk.stop, terminal, full


def sample_system(
    spec: SystemSpec,
    n: int,
    seed: int,
    keep_full: bool = False,
    workers: int = 1,
    batch_size: int = 256,
    record_every: int = 1,
    progress: Optional[Callable[[int, int], None]] = None,
) -> SampleSet:
    """Draw n i.i.d. trajectories; identical output for any worker count."""
    terminals: List[np.ndarray] = []
    fulls: List[np.ndarray] = []
    for stop, terminal, full in iter_sample_chunks(
        spec, n, seed, keep_full, workers, batch_size, record_every
    ):
        terminals.append(terminal)
        if full is not None:
            fulls.append(full)
        if progress is not None:
            progress(stop, n)
    return assemble_samples(spec, seed, terminals, fulls if keep_full else None, record_every)


def assemble_samples(
    spec: SystemSpec,
    seed: int,
    terminals: Sequence[np.ndarray],
    fulls: Optional[Sequence[np.ndarray]],
    record_every: int = 1,
) -> SampleSet:
    full = np.concatenate(fulls) if fulls else None
    times = spec.grid[::record_every] if full is not None else None
    return SampleSet(terminal=np.concatenate(terminals), seed=seed, full=full, times=times)
