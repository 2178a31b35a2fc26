#!/usr/bin/env python3

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TextColumn
from rich.table import Table

from config import AppConfig
from errors import ConfigError, ReachestError
from estimators import format_duration
from models.run_config import RunConfig
from reach_engine import (
    EVENT_COMMAND_END,
    EVENT_ESTIMATE_DONE,
    EVENT_FILES_SAVED,
    EVENT_GOAL_RESULTS,
    EVENT_SAMPLING_DONE,
    EVENT_SAMPLING_PROGRESS,
    EVENT_SAMPLING_START,
    EVENT_STAGE_TIMES,
    EVENT_SUMMARY,
    EVENT_UNSAFE_RESULT,
    EVENT_WARNING,
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_RUNTIME,
    ReachEngine,
)
from reachset import Verdict

console = Console()
logger = logging.getLogger(__name__)

COMMANDS = ("summary", "sample", "estimate", "check", "plot", "run")

VERDICT_STYLES = {
    Verdict.CLEAR: "bold green",
    Verdict.INTERSECTS: "bold red",
    Verdict.UNKNOWN: "bold yellow",
}


class ReachApp:
    def __init__(self, config: RunConfig, app_config: Optional[AppConfig] = None):
        self.app_config = app_config or AppConfig.from_env()
        self.engine = ReachEngine(config, self.app_config, console)
        self._progress: Optional[Progress] = None
        self._task = None

    def _render_event(self, event: Dict[str, Any]):
        """Render a single reach engine event to the Rich terminal."""
        event_type = event["type"]

        if event_type == EVENT_SUMMARY:
            self._display_summary(event["fields"])

        elif event_type == EVENT_WARNING:
            console.print(f"[yellow]⚠ {event['message']}[/yellow]")

        elif event_type == EVENT_SAMPLING_START:
            console.print(f"Drawing {event['n']} samples with {event['workers']} worker(s)")
            self._progress = Progress(
                SpinnerColumn(),
                TextColumn("[bold]Sampling trajectories..."),
                BarColumn(),
                MofNCompleteColumn(),
                transient=True, console=console,
            )
            self._progress.start()
            self._task = self._progress.add_task("sampling", total=event["n"])

        elif event_type == EVENT_SAMPLING_PROGRESS:
            if self._progress is not None:
                self._progress.update(self._task, completed=event["completed"])

        elif event_type == EVENT_SAMPLING_DONE:
            self._stop_progress()
            console.print(f"[green]✓ Drew {event['n']} samples[/green]")

        elif event_type == EVENT_STAGE_TIMES:
            for name, seconds in event["stages"].items():
                console.print(f"Time to {name}: {format_duration(seconds)}")

        elif event_type == EVENT_ESTIMATE_DONE:
            shape = "reach tube" if event["tube"] else "reachable set"
            dims = ", ".join(f"x{d + 1}" for d in event["dims"])
            console.print(Panel(
                f"{event['kind']} {shape} over {dims}",
                title="Estimate computed",
                style="green",
                padding=(0, 2),
            ))

        elif event_type == EVENT_UNSAFE_RESULT:
            self._display_unsafe(event["result"])

        elif event_type == EVENT_GOAL_RESULTS:
            self._display_goals(event["results"])

        elif event_type == EVENT_FILES_SAVED:
            logger.debug("Wrote %s", ", ".join(event["files"]))

        elif event_type == EVENT_COMMAND_END:
            pass

    def _stop_progress(self):
        if self._progress is not None:
            self._progress.stop()
            self._progress = None

    def _display_summary(self, fields: List):
        table = Table(title="Estimator summary", show_header=False)
        table.add_column("Field", style="cyan")
        table.add_column("Value", style="yellow")
        for label, value in fields:
            table.add_row(label, value)
        console.print(table)

    def _display_unsafe(self, result):
        style = VERDICT_STYLES[result.verdict]
        how = "exact" if result.exact else "lattice"
        line = f"[{style}]Unsafe set: {result.verdict.value}[/{style}] [dim]({how})[/dim]"
        if result.time_index is not None:
            line += f" at time index {result.time_index}"
        console.print(line)
        if result.witness is not None:
            console.print(f"  witness: {', '.join(f'{v:.6g}' for v in result.witness)}")
        for detail in result.details:
            console.print(f"  [dim]{detail}[/dim]")

    def _display_goals(self, results):
        table = Table(title="Goal clauses")
        table.add_column("Clause", style="cyan")
        table.add_column("Result")
        table.add_column("Worst time", style="yellow")
        table.add_column("Worst value", style="yellow")
        for r in results:
            verdict = "[green]✓ pass[/green]" if r.passed else "[red]✗ fail[/red]"
            worst_time = "-" if r.worst_time is None else f"{r.worst_time:g}"
            worst_value = "-" if r.worst_value is None else f"{r.worst_value:.6g}"
            table.add_row(r.clause.label(), verdict, worst_time, worst_value)
        console.print(table)

    def run_command(self, command: str, show_samples: Optional[bool] = None) -> int:
        """Consume the events of one engine command and return its exit status."""
        if command == "summary":
            events = self.engine.summary()
        elif command == "sample":
            events = self.engine.sample()
        elif command == "estimate":
            events = self.engine.estimate()
        elif command == "check":
            events = self.engine.check()
        elif command == "plot":
            events = self.engine.plot(show_samples)
        elif command == "run":
            events = self.engine.run(show_samples)
        else:
            raise ValueError(f"Unknown command: {command}")

        status = EXIT_OK
        try:
            for event in events:
                self._render_event(event)
                if event["type"] == EVENT_COMMAND_END:
                    status = event["status"]
        finally:
            self._stop_progress()
        return status


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reachest", description="reachest - data-driven reachable set estimation")
    parser.add_argument("command", choices=COMMANDS, help="Workflow step to run")
    parser.add_argument("--config", required=True, help="Path to the run configuration (TOML or JSON)")
    parser.add_argument("--seed", type=int, help="Root seed of the sample streams")
    parser.add_argument("--workers", type=int, help="Parallel sampling workers")
    parser.add_argument("--n", type=int, help="Draw exactly this many samples (voids the guarantee)")
    parser.add_argument("--output", help="Output directory")
    parser.add_argument("--epsilon", type=float, help="Accuracy parameter")
    parser.add_argument("--delta", type=float, help="Confidence parameter")
    parser.add_argument("--grid-n", type=int, help="Lattice points per dimension")
    parser.add_argument("--tube", action="store_true", default=None, help="Fit a reach tube")
    parser.add_argument("--no-samples", action="store_true", help="Leave sample markers off plots")
    return parser


def load_config(args: argparse.Namespace, app_config: AppConfig) -> RunConfig:
    """Read the run config and apply the command-line overrides."""
    config = RunConfig.from_file(args.config)
    output = args.output
    if output is None and "outputs" not in config.model_fields_set:
        output = str(Path(app_config.output_dir) / Path(args.config).stem)
    return config.with_overrides(**{
        "seed": args.seed,
        "workers": args.workers,
        "n": args.n,
        "outputs": output,
        "probabilistic.epsilon": args.epsilon,
        "probabilistic.delta": args.delta,
        "plot.grid_n": args.grid_n,
        "tube": args.tube,
    })


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    app_config = AppConfig.from_env()
    logging.basicConfig(
        level=app_config.log_level,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )

    try:
        config = load_config(args, app_config)
        app = ReachApp(config, app_config)
        return app.run_command(args.command, show_samples=False if args.no_samples else None)
    except (ConfigError, ValidationError) as e:
        console.print(f"[red]Configuration error: {e}[/red]")
        return EXIT_CONFIG
    except (ReachestError, FileNotFoundError, ValueError) as e:
        console.print(f"[red]Error: {e}[/red]")
        return EXIT_RUNTIME
    except (OSError, RuntimeError) as e:
        logger.error("Run failed: %s", e, exc_info=app_config.log_level == "DEBUG")
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted.[/yellow]")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
