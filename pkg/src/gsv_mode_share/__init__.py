"""
GSV Mode Share - Cycling and motorcycling mode shares estimated from street-view imagery.
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional, Sequence, Tuple

from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table
from rich import box

from gsv_mode_share.settings import DEBUG, LOG_LEVEL

from gsv_mode_share.config import PipelineConfig, load_config
from gsv_mode_share.errors import ConfigError, ModeShareError
from gsv_mode_share.pipeline import STAGES, PipelineRunner, StageResult

logger = logging.getLogger(__name__)

# Initialize Rich console
console = Console()

EXIT_OK = 0
EXIT_STAGE_FAILED = 1
EXIT_CONFIG_ERROR = 2


def print_header(text: str) -> None:
    """Print a formatted header."""
    console.print(f"\n[bold white on blue]{text}[/bold white on blue]")


def print_section(text: str) -> None:
    """Print a formatted section header."""
    console.print(f"\n[bold cyan]--- {text} ---[/bold cyan]")


def print_error(text: str) -> None:
    """Print a formatted error panel."""
    console.print(Panel(f"[bold red]{text}[/bold red]", border_style="red"))


def format_value(value: object) -> str:
    if isinstance(value, float):
        return f"{value:.4g}"
    if isinstance(value, list):
        return ", ".join(str(item) for item in value) or "-"
    return str(value)


def setup_logging(verbose: bool = False) -> None:
    """Route library logging through a Rich handler on the shared console."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else LOG_LEVEL,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=False, rich_tracebacks=DEBUG)],
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsv-mode-share",
        description="Estimate city cycling and motorcycling mode shares from street-view detections",
        epilog="Any config value can be overridden with its dotted name, e.g. --sampling.spacing_m 40",
    )
    parser.add_argument("stage", choices=STAGES, help="Pipeline stage to run")
    parser.add_argument("--config", type=str, default=None, help="TOML configuration file")
    parser.add_argument("--out", type=str, default=None, help="Output directory (output_dir)")
    parser.add_argument("--seed", type=int, default=None, help="Sampling seed (sampling.seed)")
    parser.add_argument("--workers", type=int, default=None, help="Worker pool size (workers)")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log debug messages")
    return parser


def split_overrides(argv: Sequence[str]) -> Tuple[List[str], Dict[str, str]]:
    """Separate ``--section.key value`` / ``--section.key=value`` overrides from regular arguments.

    Raises:
        ConfigError: If an override lacks a value
    """
    remaining: List[str] = []
    overrides: Dict[str, str] = {}
    tokens = list(argv)
    i = 0
    while i < len(tokens):
        token = tokens[i]
        name, sep, value = token[2:].partition("=")
        if not token.startswith("--") or "." not in name:
            remaining.append(token)
            i += 1
            continue
        if not sep:
            if i + 1 >= len(tokens):
                raise ConfigError([f"{name}: missing value"])
            i += 1
            value = tokens[i]
        overrides[name] = value
        i += 1
    return remaining, overrides


def display_result(result: StageResult) -> None:
    """Show a stage's headline numbers and artifacts."""
    print_section("Summary")
    table = Table(show_header=False, box=box.SIMPLE)
    table.add_column("Metric", style="bold cyan")
    table.add_column("Value", style="white", justify="right")
    for key, value in result.summary.items():
        table.add_row(key, format_value(value))
    console.print(table)

    print_section("Artifacts")
    for path in result.artifacts:
        console.print(f"  [green]{path}[/green]")


def main(argv: Optional[List[str]] = None) -> int:
    """Run one pipeline stage from the command line.

    Returns:
        0 on success, 2 for configuration errors, 1 for stage failures
    """
    try:
        remaining, overrides = split_overrides(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print_error("Invalid configuration:\n" + "\n".join(exc.messages))
        return EXIT_CONFIG_ERROR
    args = build_parser().parse_args(remaining)
    setup_logging(args.verbose)

    try:
        if args.out is not None:
            overrides["output_dir"] = args.out
        if args.seed is not None:
            overrides["sampling.seed"] = str(args.seed)
        if args.workers is not None:
            overrides["workers"] = str(args.workers)
        config: PipelineConfig = load_config(args.config, overrides)
    except ConfigError as exc:
        print_error("Invalid configuration:\n" + "\n".join(exc.messages))
        return EXIT_CONFIG_ERROR

    print_header(f"GSV Mode Share: {args.stage}")
    runner = PipelineRunner(config)
    try:
        result = runner.run(args.stage)
    except ConfigError as exc:
        print_error("Invalid configuration:\n" + "\n".join(exc.messages))
        return EXIT_CONFIG_ERROR
    except (ModeShareError, ValueError, OSError) as exc:
        logger.debug("Stage %s failed", args.stage, exc_info=True)
        print_error(f"Stage {args.stage} failed: {exc}")
        return EXIT_STAGE_FAILED

    display_result(result)
    return EXIT_OK
