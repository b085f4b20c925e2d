"""
CLI for the analysis pipeline.

    python demos/analysis_cli.py run-all --config run.json [--out DIR] [--jobs N]
    python demos/analysis_cli.py embed --config run.json
    python demos/analysis_cli.py run-all --config run.json --stage acoustics

Each subcommand runs its stage together with the stages it depends on.
Exit codes: 0 success, 1 fatal config/corpus error, 2 partial (some pieces or a stage failed).
"""

import argparse
import os
import sys
from pathlib import Path

from dotenv import load_dotenv
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel

_PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
sys.path.insert(0, _PROJECT_ROOT)

from core.errors import ConfigError
from core.pipeline.runner import EXIT_FATAL, ERROR_REPORT, AnalysisRunner, write_error_report
from core.schema.run_config import apply_overrides, validate_config
from core.schema.schema_config import STAGE_ORDER, Stage, stage_closure
from utils.logging_setup import setup_logging

console = Console()

SUBCOMMANDS = {
    "ingest": Stage.INGEST,
    "dynamics": Stage.DYNAMICS,
    "embed": Stage.EMBED,
    "acoustics": Stage.ACOUSTICS,
    "report": Stage.REPORT,
    "run-all": None,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Information dynamics and envelope analysis of a music corpus")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        cmd = sub.add_parser(name, help=f"run the {name} stage and its prerequisites" if name != "run-all" else "run every stage")
        cmd.add_argument("--config", type=Path, required=True, help="Run configuration (JSON)")
        cmd.add_argument("--out", type=Path, default=None, help="Output directory (overrides config and environment)")
        cmd.add_argument("--jobs", type=int, default=None, help="Worker processes for per-piece work")
        cmd.add_argument(
            "--stage",
            action="append",
            choices=[s.value for s in STAGE_ORDER],
            default=None,
            help="Restrict to these stages (and their prerequisites); repeatable",
        )
        cmd.add_argument("--quiet", action="store_true", help="Only print errors")
        cmd.add_argument("--verbose", action="store_true", help="Debug logging")
    return parser


def selected_stages(command: str, stage_flags) -> list:
    targets = [Stage(s) for s in stage_flags] if stage_flags else []
    if SUBCOMMANDS[command] is not None:
        targets.append(SUBCOMMANDS[command])
    if not targets:
        return list(STAGE_ORDER)
    needed = set()
    for stage in targets:
        needed.update(stage_closure(stage))
    return [s for s in STAGE_ORDER if s in needed]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    load_dotenv()
    setup_logging(verbose=args.verbose)

    try:
        config = validate_config(args.config)
        config = apply_overrides(
            config,
            output_dir=args.out,
            jobs=args.jobs,
            stages=selected_stages(args.command, args.stage),
        )
    except ConfigError as e:
        console.print(Panel(escape(str(e)), title="[red]Configuration error[/red]", border_style="red"))
        fallback = args.out or Path(os.getenv("MUSIC_DYNAMICS_OUTPUT_DIR") or "outputs")
        try:
            write_error_report(Path(fallback) / ERROR_REPORT, e)
        except OSError:
            pass
        return EXIT_FATAL

    if not args.quiet:
        console.print(
            Panel.fit(
                f"[bold]Manifest:[/bold] {config.manifest}\n"
                f"[bold]Stages:[/bold] {', '.join(s.value for s in config.stages)}\n"
                f"[bold]Output:[/bold] {config.output_dir}   [bold]Jobs:[/bold] {config.jobs}",
                title="Music dynamics analysis",
                border_style="blue",
            )
        )
    report = AnalysisRunner(config, quiet=args.quiet).run()
    if report.fatal_error:
        console.print(f"[red]Fatal: {escape(report.fatal_error)}[/red]")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
