"""External-command sampler.

The command is run once per sample as ``argv seed index t0 t1 parts`` and must
print one trajectory as CSV: ``parts`` rows of ``n_x`` values, optionally
preceded by a header line and optionally with a leading time column.
"""

import io
import logging
import subprocess
from typing import Optional, Sequence

import numpy as np

from errors import SamplerCommandError
from ode_sim import SystemSpec

logger = logging.getLogger(__name__)


class CommandSampler:
    """Custom sampler backed by an executable."""

    def __init__(
        self,
        argv: Sequence[str],
        seed: int,
        state_dim: int,
        t0: float,
        t1: float,
        parts: int,
        timeout: Optional[float] = None,
    ):
        self.argv = list(argv)
        self.seed = seed
        self.state_dim = state_dim
        self.t0 = t0
        self.t1 = t1
        self.parts = parts
        self.timeout = timeout

    def command_line(self, index: int) -> list:
        return self.argv + [str(self.seed), str(index), repr(float(self.t0)), repr(float(self.t1)), str(self.parts)]

    def __call__(self, rng: np.random.Generator, index: int) -> np.ndarray:
        cmd = self.command_line(index)
        logger.debug("Running sampler command: %s", " ".join(cmd))
        try:
            result = subprocess.run(cmd, capture_output=True, text=True, timeout=self.timeout, check=False)
        except (OSError, subprocess.TimeoutExpired) as e:
            raise SamplerCommandError(f"Sampler command failed for sample {index}: {e}") from e
        if result.returncode != 0:
            raise SamplerCommandError(
                f"Sampler command exited with status {result.returncode} for sample {index}: "
                f"{result.stderr.strip()}"
            )
        return self.parse(result.stdout, index)

    def parse(self, text: str, index: int = 0) -> np.ndarray:
        """Parse CSV output into a (parts, n_x) array."""
        lines = [line for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
        if lines and not _is_numeric_row(lines[0]):
            lines = lines[1:]
        try:
            states = np.loadtxt(io.StringIO("\n".join(lines)), delimiter=",", ndmin=2)
        except ValueError as e:
            raise SamplerCommandError(f"Sampler output for sample {index} is not numeric CSV: {e}") from e
        if states.shape[1] == self.state_dim + 1:
            states = states[:, 1:]
        if states.shape != (self.parts, self.state_dim):
            raise SamplerCommandError(
                f"Sampler output for sample {index} has shape {states.shape}, "
                f"expected ({self.parts}, {self.state_dim})"
            )
        return states

    def __repr__(self) -> str:
        return f"CommandSampler({self.argv!r})"


def _is_numeric_row(line: str) -> bool:
    try:
        [float(v) for v in line.split(",")]
    except ValueError:
        return False
    return True


def command_spec(
    argv: Sequence[str],
    seed: int,
    state_dim: int,
    t0: float,
    t1: float,
    parts: int,
) -> SystemSpec:
    sampler = CommandSampler(argv, seed, state_dim, t0, t1, parts)
    return SystemSpec(
        state_dim=state_dim,
        t0=t0,
        t1=t1,
        parts=parts,
        custom_sampler=sampler,
        name="command",
    )
