"""
Command line application.

This module provides the ``clickbait-affect`` command: one subcommand per
pipeline stage, plus ``attack-candidates``, ``report`` and ``run``. Stage
subcommands run every earlier stage that is not yet checkpointed.
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

from tqdm import tqdm

from .. import __version__
from ..core.config import PipelineConfig, load_config
from ..core.errors import ToolkitError
from ..pipeline.report import emit_report
from ..pipeline.runner import STAGE_ORDER, find_attack_candidates, run_pipeline
from ..pipeline.state import PipelineState
from ..utils.log import setup_logging

logger = logging.getLogger(__name__)

STAGE_HELP = {
    "ingest": "Load the headline and post corpora",
    "embed": "Embed headlines and posts",
    "align": "Align headlines to posts",
    "stylize": "Rewrite aligned texts in every configured style",
    "annotate": "Annotate posts and variants with emotion scores",
    "score": "Map annotations to VAD and compute CG / delta CG",
    "evaluate": "Score detector predictions per style and framing group",
}


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser with subcommands."""
    parser = argparse.ArgumentParser(
        prog="clickbait-affect",
        description="Emotion-aware clickbait analysis toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="Path to the JSON config file (default: built-in defaults)")
    parser.add_argument("--output-dir", help="Override the configured output directory")
    parser.add_argument("--seed", type=int, help="Override the configured seed")
    parser.add_argument(
        "--offline",
        action="store_true",
        default=None,
        help="Forbid every network backend endpoint",
    )
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: INFO)",
    )
    parser.add_argument("--no-progress", action="store_true", help="Disable the progress bar")

    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    for stage in STAGE_ORDER:
        subparsers.add_parser(stage, help=STAGE_HELP[stage])

    attack = subparsers.add_parser("attack-candidates", help="Rank variants for injection into one post")
    attack.add_argument("--post-id", required=True, help="Target post id")
    attack.add_argument("--k", type=int, help="Candidates per objective (default: ranking.k)")

    subparsers.add_parser("report", help="Write the report bundle of a completed run")
    subparsers.add_parser("run", help="Run every stage and write the report bundle")
    return parser


def _load(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config)
    return config.with_overrides(output_dir=args.output_dir, seed=args.seed, offline=args.offline)


def _run_stages(config: PipelineConfig, until: Optional[str], show_progress: bool) -> PipelineState:
    total = STAGE_ORDER.index(until) + 1 if until else len(STAGE_ORDER)
    with tqdm(total=total, unit="stage", disable=not show_progress, file=sys.stderr) as bar:
        def on_stage(done: int, _total: int, message: str) -> None:
            bar.set_postfix_str(message)
            bar.update(done - bar.n)

        return run_pipeline(config, until=until, callback=on_stage)


def _print_stage_summary(state: PipelineState, stages) -> None:
    for stage in stages:
        entry = state.manifest.stage(stage)
        print(f"{stage:<10} {entry.get('status', '-'):<9} {json.dumps(entry.get('counts', {}), sort_keys=True)}")
    print(f"network calls: {state.manifest.get('network_calls', 0)}")


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main entry point of the command line application.

    Returns:
        int: Exit status (0 on success, 1 on a toolkit error)
    """
    args = create_parser().parse_args(argv)
    setup_logging(args.log_level)
    show_progress = not args.no_progress

    try:
        config = _load(args)
        if args.command in STAGE_ORDER:
            state = _run_stages(config, args.command, show_progress)
            _print_stage_summary(state, STAGE_ORDER[:STAGE_ORDER.index(args.command) + 1])
        elif args.command == "run":
            state = _run_stages(config, None, show_progress)
            files = emit_report(config, state)
            _print_stage_summary(state, STAGE_ORDER)
            print(f"report: {state.report_dir} ({len(files)} files)")
        elif args.command == "report":
            state = PipelineState(config)
            files = emit_report(config, state)
            for name, digest in sorted(files.items()):
                print(f"{name}  {digest}")
        elif args.command == "attack-candidates":
            ranked = find_attack_candidates(config, args.post_id, k=args.k)
            print(json.dumps(ranked.to_dict(), indent=2, ensure_ascii=False))
    except ToolkitError as e:
        logger.debug("Command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
