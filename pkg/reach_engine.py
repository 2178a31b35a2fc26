"""Reachability engine that yields structured events for any frontend."""

import logging
import time
from importlib.metadata import PackageNotFoundError, version
from typing import Any, Dict, Generator, List, Optional, Tuple, Union

from rich.console import Console

from complexity import ProbParams, required_samples
from config import AppConfig
from errors import ConfigError, DimensionError
from estimators import StageTimer, format_duration
from models.run_config import ChristoffelMethod, RunConfig
from ode_sim import SampleSet, assemble_samples, iter_sample_chunks
from reachset import (
    ReachEstimate,
    ReachTube,
    Verdict,
    check_goals,
    check_unsafe,
    estimate_kind,
    evaluate_lattice,
    fit_reach,
    fit_tube,
    interval_of,
)
from services.file_manager import CHECK_FILE, ESTIMATE_FILE, MANIFEST_FILE, SAMPLES_FILE, FileManager
from services.plotter import Plotter
from systems import build_system_spec

logger = logging.getLogger(__name__)

# Event type constants
EVENT_SUMMARY = "summary"
EVENT_WARNING = "warning"
EVENT_SAMPLING_START = "sampling_start"
EVENT_SAMPLING_PROGRESS = "sampling_progress"
EVENT_SAMPLING_DONE = "sampling_done"
EVENT_STAGE_TIMES = "stage_times"
EVENT_ESTIMATE_DONE = "estimate_done"
EVENT_UNSAFE_RESULT = "unsafe_result"
EVENT_GOAL_RESULTS = "goal_results"
EVENT_FILES_SAVED = "files_saved"
EVENT_COMMAND_END = "command_end"

# Exit statuses
EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INTERSECTS = 2
EXIT_UNKNOWN = 3
EXIT_RUNTIME = 4

Estimate = Union[ReachEstimate, ReachTube]


def package_version() -> str:
    try:
        return version("reachest")
    except PackageNotFoundError:
        return "0.1.0"


class ReachEngine:
    """Runs the summary, sample, estimate, check and plot commands of one run config."""

    def __init__(
        self,
        config: RunConfig,
        app_config: Optional[AppConfig] = None,
        console: Optional[Console] = None,
    ):
        self.config = config
        self.app_config = app_config or AppConfig.from_env()
        self.spec = build_system_spec(config.system, config.seed)
        self.files = FileManager(config.outputs, console)
        self.plotter = Plotter(config.outputs, console)
        self._samples: Optional[SampleSet] = None
        self._estimate: Optional[Estimate] = None

        if config.iso_dims is not None and config.iso_dims[-1] >= self.spec.state_dim:
            raise ConfigError(
                "iso_dims",
                f"index {config.iso_dims[-1]} out of range for {self.spec.state_dim} states",
            )

    @property
    def workers(self) -> int:
        return self.config.workers or self.app_config.workers

    @property
    def dims(self) -> List[int]:
        return list(self.config.iso_dims) if self.config.iso_dims is not None else list(range(self.spec.state_dim))

    @property
    def record_every(self) -> int:
        return self.config.system.record_every

    def required_samples(self) -> int:
        method = self.config.method
        params = ProbParams(
            epsilon=self.config.probabilistic.epsilon,
            delta=self.config.probabilistic.delta,
            n_x=len(self.dims),
            k=method.k if isinstance(method, ChristoffelMethod) else None,
        )
        return required_samples(method.kind, params)

    @property
    def n_samples(self) -> int:
        return self.config.n if self.config.n is not None else self.required_samples()

    @property
    def guarantee_void(self) -> bool:
        return self.config.n is not None

    # ------------------------------------------------------------------ summary

    def summary_fields(self) -> List[Tuple[str, str]]:
        """Label/value rows of the summary block."""
        method = self.config.method
        fields = [
            ("State dimension", str(len(self.dims))),
            ("Accuracy parameter epsilon", str(self.config.probabilistic.epsilon)),
            ("Confidence parameter delta", str(self.config.probabilistic.delta)),
            ("Number of samples", str(self.required_samples())),
        ]
        if isinstance(method, ChristoffelMethod):
            fields += [
                ("Method of estimation", "Inverse Christoffel Function"),
                ("Degree of polynomial features", str(method.k)),
                ("Constant rho", str(method.rho)),
                ("Normalize", str(method.normalize)),
            ]
            status_label = "Status of Christoffel function estimate"
        else:
            fields += [
                ("Method of estimation", "Scenario p-Norm Ball"),
                ("Norm exponent p", "inf" if method.p == float("inf") else f"{method.p:g}"),
                ("Khachiyan tolerance", str(method.tol)),
            ]
            status_label = "Status of p-norm ball estimate"
        if self.config.iso_dims is not None:
            fields.append(("Isolated states", ", ".join(f"x{d + 1}" for d in self.dims)))
        if self.guarantee_void:
            fields.append(("Sample count override", f"{self.config.n} (guarantee void)"))
        if self.files.has_estimate():
            status = f"Estimate saved to {self.files.path(ESTIMATE_FILE)}"
        else:
            status = "No estimate has been made yet"
        fields.append((status_label, status))
        return fields

    def summary(self) -> Generator[Dict[str, Any], None, None]:
        yield {"type": EVENT_SUMMARY, "fields": self.summary_fields()}
        yield {"type": EVENT_COMMAND_END, "command": "summary", "status": EXIT_OK}

    # ----------------------------------------------------------------- sampling

    def sample(self, save: bool = True) -> Generator[Dict[str, Any], None, None]:
        """Draw the samples (projected to the isolated dims) and write them with a manifest."""
        n = self.n_samples
        if self.guarantee_void:
            yield {"type": EVENT_WARNING,
                   "message": f"Sample count overridden to {n}; the (epsilon, delta) guarantee no longer applies"}
        yield {"type": EVENT_SAMPLING_START, "n": n, "workers": self.workers}

        timer = StageTimer()
        terminals, fulls = [], []
        dims = self.dims
        with timer.stage(f"draw {n} samples"):
            for stop, terminal, full in iter_sample_chunks(
                self.spec,
                n,
                self.config.seed,
                keep_full=self.config.tube,
                workers=self.workers,
                batch_size=self.app_config.batch_size,
                record_every=self.record_every,
            ):
                terminals.append(terminal[:, dims])
                if full is not None:
                    fulls.append(full[:, :, dims])
                yield {"type": EVENT_SAMPLING_PROGRESS, "completed": stop, "total": n}
        samples = assemble_samples(
            self.spec, self.config.seed, terminals, fulls if self.config.tube else None, self.record_every
        )
        self._samples = SampleSet(
            terminal=samples.terminal, seed=samples.seed, full=samples.full, times=samples.times, dims=tuple(dims)
        )
        yield {"type": EVENT_SAMPLING_DONE, "n": n}
        yield {"type": EVENT_STAGE_TIMES, "stages": timer.totals()}

        if save:
            written = self.files.save_samples(self._samples)
            written.append(self.files.save_manifest(self._manifest(n, timer.total())))
            yield {"type": EVENT_FILES_SAVED, "files": written}
        yield {"type": EVENT_COMMAND_END, "command": "sample", "status": EXIT_OK}

    def _manifest(self, n: int, wall_time: float) -> Dict[str, Any]:
        return {
            "seed": self.config.seed,
            "n_samples": n,
            "required_samples": self.required_samples(),
            "guarantee_void": self.guarantee_void,
            "config_hash": self.config.config_hash(),
            "sampling_hash": self.config.sampling_hash(),
            "wall_time_seconds": round(wall_time, 3),
            "version": package_version(),
            "system": self.spec.name,
            "dims": self.dims,
            "record_every": self.record_every,
            "config": self.config.model_dump(mode="json"),
        }

    def _stored_samples_match(self) -> bool:
        if not self.files.exists(MANIFEST_FILE) or not self.files.exists(SAMPLES_FILE):
            return False
        try:
            manifest = self.files.load_manifest()
        except ValueError:
            return False
        return manifest.get("sampling_hash") == self.config.sampling_hash()

    def _ensure_samples(self) -> Generator[Dict[str, Any], None, SampleSet]:
        if self._samples is not None:
            return self._samples
        if self._stored_samples_match():
            self._samples = self.files.load_samples(seed=self.config.seed, with_full=self.config.tube)
            return self._samples
        yield {"type": EVENT_WARNING, "message": "No samples for this configuration; drawing them now"}
        for event in self.sample():
            if event["type"] != EVENT_COMMAND_END:
                yield event
        return self._samples

    # --------------------------------------------------------------- estimation

    def estimate(self) -> Generator[Dict[str, Any], None, None]:
        samples = yield from self._ensure_samples()
        timer = StageTimer()
        if self.config.tube:
            self._estimate = fit_tube(samples, self.config.method, workers=self.workers, timer=timer)
            data = {"tube": True, **self._estimate.to_dict()}
        else:
            self._estimate = fit_reach(samples, self.config.method, timer=timer)
            data = {"tube": False, **self._estimate.to_dict()}
        yield {"type": EVENT_STAGE_TIMES, "stages": timer.totals()}
        yield {"type": EVENT_ESTIMATE_DONE, "kind": estimate_kind(self._first_slice()),
               "tube": self.config.tube, "dims": self.dims}
        yield {"type": EVENT_FILES_SAVED, "files": [self.files.save_estimate(data)]}
        yield {"type": EVENT_COMMAND_END, "command": "estimate", "status": EXIT_OK}

    def _first_slice(self) -> ReachEstimate:
        e = self._load_estimate()
        return e.slices[0] if isinstance(e, ReachTube) else e

    def _load_estimate(self) -> Estimate:
        if self._estimate is None:
            data = self.files.load_estimate()
            self._estimate = ReachTube.from_dict(data) if data.get("tube") else ReachEstimate.from_dict(data)
        return self._estimate

    # ------------------------------------------------------------------- checks

    def check(self) -> Generator[Dict[str, Any], None, None]:
        estimate = self._load_estimate()
        predicate = self.config.unsafe if self.config.unsafe is not None else self.spec.unsafe
        goals = self.config.goals
        if predicate is None and not goals:
            raise ConfigError("unsafe", "no unsafe set or goal clause is configured")

        status = EXIT_OK
        report: Dict[str, Any] = {}
        if predicate is not None:
            result = check_unsafe(estimate, predicate, self.config.plot.bounds, self.config.plot.grid_n)
            report["unsafe"] = result.to_dict()
            yield {"type": EVENT_UNSAFE_RESULT, "result": result}
            if result.verdict == Verdict.INTERSECTS:
                status = EXIT_INTERSECTS
            elif result.verdict == Verdict.UNKNOWN:
                status = EXIT_UNKNOWN

        if goals:
            if not isinstance(estimate, ReachTube):
                raise ConfigError("goals", "goal clauses need a reach tube (set tube = true)")
            results = check_goals(estimate, goals)
            report["goals"] = [r.to_dict() for r in results]
            yield {"type": EVENT_GOAL_RESULTS, "results": results}
            if not all(r.passed for r in results) and status == EXIT_OK:
                status = EXIT_INTERSECTS

        report["status"] = status
        yield {"type": EVENT_FILES_SAVED, "files": [self.files.save_json(CHECK_FILE, report)]}
        yield {"type": EVENT_COMMAND_END, "command": "check", "status": status}

    # ----------------------------------------------------------------- plotting

    def plot(self, show_samples: Optional[bool] = None) -> Generator[Dict[str, Any], None, None]:
        show = self.config.plot.show_samples if show_samples is None else show_samples
        if not self.files.has_estimate() and self._estimate is None:
            samples = yield from self._ensure_samples()
            yield {"type": EVENT_FILES_SAVED, "files": [self.plotter.plot_samples(samples)]}
            yield {"type": EVENT_COMMAND_END, "command": "plot", "status": EXIT_OK}
            return

        estimate = self._load_estimate()
        samples = None
        if show:
            samples = yield from self._ensure_samples()

        timer = StageTimer()
        written: List[str] = []
        with timer.stage("compute contour"):
            if isinstance(estimate, ReachTube):
                written += self._plot_tube(estimate, samples)
            else:
                written += self._plot_estimate(estimate, samples)
        yield {"type": EVENT_STAGE_TIMES, "stages": timer.totals()}
        yield {"type": EVENT_FILES_SAVED, "files": written}
        yield {"type": EVENT_COMMAND_END, "command": "plot", "status": EXIT_OK}

    def _plot_estimate(self, e: ReachEstimate, samples: Optional[SampleSet]) -> List[str]:
        points = samples.terminal if samples is not None else None
        grid_n = self.config.plot.grid_n
        if e.dim == 1:
            lo, hi = interval_of(e, e.dims[0], self.config.plot.bounds)
            return [self.plotter.plot_interval(lo, hi, e.dims[0], points)]
        if e.dim > 3:
            raise DimensionError(f"Plots support up to 3 dimensions, got {e.dim}; set iso_dims")
        field = evaluate_lattice(e, self.config.plot.bounds, grid_n)
        written = self.files.save_field(field)
        if e.dim == 2:
            written.append(self.plotter.plot_field(field, points))
        return written

    def _plot_tube(self, tube: ReachTube, samples: Optional[SampleSet]) -> List[str]:
        written = []
        dims = tube.dims
        for position, dim in enumerate(dims):
            lo, hi = tube.band(dim)
            trajectories = None
            if samples is not None and samples.full is not None:
                trajectories = samples.full[:, :, position]
            filename = "reach.svg" if len(dims) == 1 else f"reach_x{dim + 1}.svg"
            written.append(self.plotter.plot_tube(
                tube.times, lo, hi, dim, trajectories, self._limits(dim), filename=filename
            ))
        return written

    def _limits(self, dim: int) -> List[float]:
        limits = []
        predicate = self.config.unsafe if self.config.unsafe is not None else self.spec.unsafe
        coefficients = getattr(predicate, "coefficients", None)
        if coefficients is not None:
            used = [i for i, c in enumerate(coefficients) if c != 0.0]
            if used == [dim]:
                limits.append(predicate.offset / coefficients[dim])
        for clause in self.config.goals:
            if clause.dim == dim:
                limits += [v for v in (clause.lower, clause.upper) if v is not None]
        return sorted(set(limits))

    # ---------------------------------------------------------------------- run

    def run(self, show_samples: Optional[bool] = None) -> Generator[Dict[str, Any], None, None]:
        """Sample, estimate, check (when configured) and plot."""
        status = EXIT_OK
        steps = [self.sample(), self.estimate()]
        if self.config.unsafe is not None or self.spec.unsafe is not None or self.config.goals:
            steps.append(self.check())
        if len(self.dims) <= 3:
            steps.append(self.plot(show_samples))
        start = time.perf_counter()
        for step in steps:
            for event in step:
                if event["type"] == EVENT_COMMAND_END:
                    status = max(status, event["status"])
                    continue
                yield event
        logger.debug("Run finished in %s", format_duration(time.perf_counter() - start))
        yield {"type": EVENT_COMMAND_END, "command": "run", "status": status}

