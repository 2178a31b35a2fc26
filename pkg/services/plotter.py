"""SVG plots of estimates, tubes and sample trajectories."""

import logging
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from rich.console import Console  # noqa: E402

from errors import DimensionError  # noqa: E402
from ode_sim import SampleSet  # noqa: E402

logger = logging.getLogger(__name__)

# fixed ids and no timestamp, so identical inputs give identical files
matplotlib.rcParams["svg.hashsalt"] = "reachest"
SVG_METADATA = {"Date": None}

MAX_LINES = 200
SET_COLOR = "#7b2d8e"
SAMPLE_COLOR = "#e79bc3"


def _label(dim: int) -> str:
    return f"$x_{{{dim + 1}}}$"


def _fan(rows: np.ndarray) -> np.ndarray:
    """At most MAX_LINES trajectories for a line fan."""
    if len(rows) > MAX_LINES:
        logger.info("Drawing %d of %d sample trajectories", MAX_LINES, len(rows))
    return rows[:MAX_LINES]


class Plotter:
    """Writes SVG figures into a run directory."""

    def __init__(self, run_directory: str, console: Optional[Console] = None):
        self.run_directory = Path(run_directory)
        self.console = console or Console()
        self.run_directory.mkdir(parents=True, exist_ok=True)

    def _save(self, fig, filename: str) -> str:
        filepath = self.run_directory / filename
        fig.savefig(filepath, format="svg", metadata=SVG_METADATA)
        plt.close(fig)
        self.console.print(f"[green]✓ Saved {filepath}[/green]")
        return str(filepath)

    def plot_field(self, field, samples: Optional[np.ndarray] = None, filename: str = "reach.svg") -> str:
        """Filled membership region and boundary of a 2-D field; 3-D fields are exported as CSV only."""
        if field.dim != 2:
            raise DimensionError(f"Field plots need a 2-dimensional field, got {field.dim}")
        values = field.values
        members = field.member_mask
        x, y = field.axes[0], field.axes[1]
        level = field.threshold + field.slack

        fig, ax = plt.subplots(figsize=(6, 5))
        if samples is not None and len(samples):
            ax.scatter(samples[:, 0], samples[:, 1], s=2, color=SAMPLE_COLOR, label="samples", zorder=1,
                       rasterized=True)
        ax.contourf(x, y, members.T.astype(float), levels=[0.5, 1.5], colors=[SET_COLOR], alpha=0.35, zorder=2)
        if np.nanmin(values) <= level <= np.nanmax(values):
            ax.contour(x, y, values.T, levels=[level], colors=[SET_COLOR], linewidths=1.2, zorder=3)
        ax.set_xlabel(_label(field.dims[0]))
        ax.set_ylabel(_label(field.dims[1]))
        ax.set_title("Reachable set estimate")
        if samples is not None and len(samples):
            ax.legend(loc="upper right")
        return self._save(fig, filename)

    def plot_interval(self, lo: float, hi: float, dim: int, samples: Optional[np.ndarray] = None,
                      filename: str = "reach.svg") -> str:
        """1-D estimate as a shaded interval over the sample histogram."""
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.axvspan(lo, hi, color=SET_COLOR, alpha=0.35, label="estimate")
        if samples is not None and len(samples):
            ax.hist(samples[:, 0], bins=50, color=SAMPLE_COLOR, label="samples")
        ax.set_xlabel(_label(dim))
        ax.set_yticks([])
        ax.legend(loc="upper right")
        return self._save(fig, filename)

    def plot_tube(
        self,
        times: np.ndarray,
        lo: np.ndarray,
        hi: np.ndarray,
        dim: int,
        trajectories: Optional[np.ndarray] = None,
        limits: Sequence[float] = (),
        filename: str = "reach.svg",
    ) -> str:
        """Band of one state over time, with a fan of sample trajectories."""
        fig, ax = plt.subplots(figsize=(7, 4))
        if trajectories is not None:
            for row in _fan(trajectories):
                ax.plot(times, row, color=SAMPLE_COLOR, linewidth=0.4, zorder=1)
        ax.fill_between(times, lo, hi, color=SET_COLOR, alpha=0.35, linewidth=0, zorder=2, label="estimate")
        for value in limits:
            ax.axhline(value, color="black", linestyle="--", linewidth=0.8)
        ax.set_xlabel("$t$")
        ax.set_ylabel(_label(dim))
        ax.set_title("Reachable set estimate over time")
        ax.legend(loc="upper right")
        return self._save(fig, filename)

    def plot_samples(self, samples: SampleSet, filename: str = "samples.svg") -> str:
        """Trajectory fan (1-D, against time) or phase plot (first two dimensions)."""
        fig, ax = plt.subplots(figsize=(6, 5))
        if samples.state_dim == 1:
            if samples.full is not None:
                for row in _fan(samples.full[:, :, 0]):
                    ax.plot(samples.times, row, color=SAMPLE_COLOR, linewidth=0.4)
                ax.set_xlabel("$t$")
                ax.set_ylabel(_label(samples.dims[0]))
            else:
                ax.hist(samples.terminal[:, 0], bins=50, color=SAMPLE_COLOR)
                ax.set_xlabel(_label(samples.dims[0]))
        else:
            if samples.full is not None:
                for trajectory in _fan(samples.full):
                    ax.plot(trajectory[:, 0], trajectory[:, 1], color=SAMPLE_COLOR, linewidth=0.3)
            ax.scatter(samples.terminal[:, 0], samples.terminal[:, 1], s=2, color=SET_COLOR, rasterized=True)
            ax.set_xlabel(_label(samples.dims[0]))
            ax.set_ylabel(_label(samples.dims[1]))
        ax.set_title("Sampled states")
        return self._save(fig, filename)
