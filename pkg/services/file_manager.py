"""File management service for run directories: samples, manifests, estimates and fields."""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from rich.console import Console

from ode_sim import SampleSet

SAMPLES_FILE = "samples.csv"
TRAJECTORIES_FILE = "trajectories.csv"
MANIFEST_FILE = "manifest.json"
ESTIMATE_FILE = "estimate.json"
CHECK_FILE = "check.json"

FLOAT_FORMAT = "%.17g"


def _state_header(dims) -> List[str]:
    return [f"x{d + 1}" for d in dims]


def _parse_header(line: str) -> Tuple[int, ...]:
    names = [name.strip() for name in line.strip().split(",")]
    return tuple(int(name[1:]) - 1 for name in names if name.startswith("x"))


class FileManager:
    """Reads and writes the files of one run directory."""

    def __init__(self, run_directory: str = "runs/default", console: Optional[Console] = None):
        self.run_directory = Path(run_directory)
        self.console = console or Console()

        self.run_directory.mkdir(parents=True, exist_ok=True)

    def path(self, filename: str) -> Path:
        return self.run_directory / filename

    def exists(self, filename: str) -> bool:
        return self.path(filename).exists()

    def has_estimate(self) -> bool:
        return self.exists(ESTIMATE_FILE)

    def save_json(self, filename: str, data: Dict[str, Any], announce: bool = True) -> str:
        filepath = self.path(filename)
        try:
            with open(filepath, 'w', encoding='utf-8') as f:
                json.dump(data, f, indent=2, sort_keys=True)
                f.write("\n")
        except OSError as e:
            self.console.print(f"[red]Error saving {filepath}: {e}[/red]")
            raise
        if announce:
            self.console.print(f"[green]✓ Saved {filepath}[/green]")
        return str(filepath)

    def load_json(self, filename: str) -> Dict[str, Any]:
        filepath = self.path(filename)
        if not filepath.exists():
            raise FileNotFoundError(f"Run file not found: {filepath}")
        try:
            with open(filepath, 'r', encoding='utf-8') as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON in {filepath}: {e}") from e

    def save_samples(self, samples: SampleSet) -> List[str]:
        """Write terminal states, plus full trajectories when present."""
        written = []
        filepath = self.path(SAMPLES_FILE)
        np.savetxt(
            filepath,
            samples.terminal,
            fmt=FLOAT_FORMAT,
            delimiter=",",
            header=",".join(_state_header(samples.dims)),
            comments="",
        )
        written.append(str(filepath))

        if samples.full is not None:
            n, steps, d = samples.full.shape
            rows = np.empty((n * steps, d + 2))
            rows[:, 0] = np.repeat(np.arange(n), steps)
            rows[:, 1] = np.tile(samples.times, n)
            rows[:, 2:] = samples.full.reshape(n * steps, d)
            filepath = self.path(TRAJECTORIES_FILE)
            np.savetxt(
                filepath,
                rows,
                fmt=["%d", FLOAT_FORMAT] + [FLOAT_FORMAT] * d,
                delimiter=",",
                header=",".join(["sample", "t"] + _state_header(samples.dims)),
                comments="",
            )
            written.append(str(filepath))

        for path in written:
            self.console.print(f"[green]✓ Saved {path}[/green]")
        return written

    def load_samples(self, seed: int = 0, with_full: bool = False) -> SampleSet:
        """Read samples back; full trajectories only when asked for and present."""
        filepath = self.path(SAMPLES_FILE)
        if not filepath.exists():
            raise FileNotFoundError(f"Samples not found: {filepath} (run the 'sample' command first)")
        with open(filepath, 'r', encoding='utf-8') as f:
            dims = _parse_header(f.readline())
        terminal = np.loadtxt(filepath, delimiter=",", skiprows=1, ndmin=2)

        full = times = None
        if with_full:
            trajectories = self.path(TRAJECTORIES_FILE)
            if not trajectories.exists():
                raise FileNotFoundError(f"Trajectories not found: {trajectories} (sample with tube = true)")
            rows = np.loadtxt(trajectories, delimiter=",", skiprows=1, ndmin=2)
            n = terminal.shape[0]
            steps = rows.shape[0] // n
            times = rows[:steps, 1].copy()
            full = rows[:, 2:].reshape(n, steps, terminal.shape[1])
        return SampleSet(terminal=terminal, seed=seed, full=full, times=times, dims=dims)

    def save_manifest(self, manifest: Dict[str, Any]) -> str:
        return self.save_json(MANIFEST_FILE, manifest)

    def load_manifest(self) -> Dict[str, Any]:
        return self.load_json(MANIFEST_FILE)

    def save_estimate(self, estimate: Dict[str, Any]) -> str:
        return self.save_json(ESTIMATE_FILE, estimate)

    def load_estimate(self) -> Dict[str, Any]:
        return self.load_json(ESTIMATE_FILE)

    def save_field(self, field, name: str = "field") -> List[str]:
        """Lattice as CSV rows ``i,j[,k],x1,x2[,x3],value`` plus a JSON sidecar."""
        rows = field.rows()
        d = field.dim
        state_names = _state_header(field.dims)
        index_names = ["i", "j", "k"][:d]
        filepath = self.path(f"{name}.csv")
        np.savetxt(
            filepath,
            rows,
            fmt=["%d"] * d + [FLOAT_FORMAT] * (d + 1),
            delimiter=",",
            header=",".join(index_names + state_names + ["value"]),
            comments="",
        )
        self.console.print(f"[green]✓ Saved {filepath}[/green]")
        return [str(filepath), self.save_json(f"{name}.json", field.sidecar())]
