# pixel_eql/cli.py

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence

import dotenv
from rich.console import Console

from pixel_eql.__about__ import __version__
from pixel_eql.config import RunConfig, apply_overrides, load_config
from pixel_eql.errors import MissingArtifactError, NumericError, PixelEqlError, TrainingDivergedError
from pixel_eql.models import CommandSummary
from pixel_eql.pipeline import (
    run_eval,
    run_explain,
    run_extract,
    run_gen_dataset,
    run_grad_check,
    run_pretrain,
    run_train,
)
from pixel_eql.reporting import print_summary
from pixel_eql.utils.setup_logging import configure_logging

logger = logging.getLogger(__name__)

# ---------------- helpers ----------------
dotenv.load_dotenv()

VARIANT_FLAGS = {
    "no_pretrain": "no_pretrain",
    "freeze_perception": "fixed",
    "no_neural_guidance": "no_ng",
    "coor_neural": "coor_neural",
}


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    """Config file, then command-line overrides."""
    config = load_config(args.config)
    overrides: Dict[str, Any] = {
        "seed": args.seed,
        "out_dir": str(args.out_dir) if args.out_dir else None,
    }
    for flag, variant in VARIANT_FLAGS.items():
        if getattr(args, flag, False):
            overrides["ppo.variant"] = variant
    if getattr(args, "offline", None) is not None:
        overrides["explain.offline"] = args.offline
    overrides["explain.base_url"] = getattr(args, "llm_base_url", None)
    overrides["explain.model"] = getattr(args, "llm_model", None)
    overrides["explain.decision_samples"] = getattr(args, "decisions", None)
    overrides["perception.epochs"] = getattr(args, "epochs", None)
    overrides["ppo.total_steps"] = getattr(args, "total_steps", None)
    overrides["dataset.n_frames"] = getattr(args, "n_frames", None)
    return apply_overrides(config, overrides)


def _run(
    console: Console,
    status: str,
    action: Callable[[], CommandSummary],
    failure: Callable[[CommandSummary], Optional[str]] | None = None,
) -> int:
    try:
        with console.status(status):
            summary = action()
    except MissingArtifactError as exc:
        console.print(f"Error: {exc}")
        return exc.exit_code
    except TrainingDivergedError as exc:
        console.print(f"Error: {exc}")
        if exc.checkpoint is not None:
            console.print(f"Last good parameters saved to {exc.checkpoint}")
        return exc.exit_code
    except PixelEqlError as exc:
        console.print(f"Error ({exc.category}): {exc}")
        return exc.exit_code
    print_summary(summary, Console())
    message = failure(summary) if failure is not None else None
    if message:
        console.print(f"Error: {message}")
        return NumericError.exit_code
    return 0


# ---------------- commands ----------------


def cmd_gen_dataset(args: argparse.Namespace, console: Console) -> int:
    config = _resolve_config(args)
    return _run(console, f"Generating {config.dataset.n_frames} {config.env.env_id} frames...", lambda: run_gen_dataset(config))


def cmd_pretrain(args: argparse.Namespace, console: Console) -> int:
    config = _resolve_config(args)
    return _run(console, "Pre-training perception...", lambda: run_pretrain(config))


def cmd_train(args: argparse.Namespace, console: Console) -> int:
    config = _resolve_config(args)
    return _run(console, f"Training ({config.ppo.variant})...", lambda: run_train(config))


def cmd_eval(args: argparse.Namespace, console: Console) -> int:
    config = _resolve_config(args)
    return _run(
        console,
        f"Evaluating the {args.mode} actor...",
        lambda: run_eval(config, episodes=args.episodes, mode=args.mode, greedy=args.greedy),
    )


def cmd_extract(args: argparse.Namespace, console: Console) -> int:
    config = _resolve_config(args)
    return _run(console, "Extracting the symbolic policy...", lambda: run_extract(config))


def cmd_explain(args: argparse.Namespace, console: Console) -> int:
    config = _resolve_config(args)
    where = "outbox" if config.explain.offline else config.explain.base_url
    return _run(console, f"Rendering explanation prompts ({where})...", lambda: run_explain(config))


def _grad_failure(summary: CommandSummary) -> Optional[str]:
    failed = [row.name for row in summary.grad_checks if not row.passed]
    return f"gradient check failed for {', '.join(failed)}" if failed else None


def cmd_grad_check(args: argparse.Namespace, console: Console) -> int:
    config = _resolve_config(args)
    return _run(
        console,
        f"Checking gradients on {args.instances} instances...",
        lambda: run_grad_check(config, instances=args.instances, tolerance=args.tolerance),
        _grad_failure,
    )


# ---------------- parser ----------------


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", type=Path, help="TOML or JSON run configuration")
    common.add_argument("-o", "--out-dir", type=Path, help="Artifact directory (overrides out_dir)")
    common.add_argument("--seed", type=int, help="Run seed (overrides seed)")
    common.add_argument("--verbose", action="store_true", help="Enable debug logging")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pixel-eql",
        description="Learn object coordinates from pixels, train a symbolic policy on them, and explain it.",
    )
    parser.add_argument("-v", "--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    # gen-dataset
    p_gen = sub.add_parser("gen-dataset", parents=[common], help="Roll out a behavior policy and save frames with symbols")
    p_gen.add_argument("--n-frames", type=int, help="Number of samples (overrides dataset.n_frames)")
    p_gen.set_defaults(func=cmd_gen_dataset)

    # pretrain
    p_pre = sub.add_parser("pretrain", parents=[common], help="Supervised pre-training of the perception network")
    p_pre.add_argument("--epochs", type=int, help="Overrides perception.epochs")
    p_pre.set_defaults(func=cmd_pretrain)

    # train
    p_train = sub.add_parser("train", parents=[common], help="Joint PPO training with neural guidance")
    p_train.add_argument("--total-steps", type=int, help="Overrides ppo.total_steps")
    variants = p_train.add_mutually_exclusive_group()
    variants.add_argument("--no-pretrain", action="store_true", help="Start from an untrained perception network")
    variants.add_argument("--freeze-perception", action="store_true", help="Keep perception fixed during training")
    variants.add_argument(
        "--no-neural-guidance", action="store_true", help="Train the EQL actor directly on the PPO loss"
    )
    variants.add_argument(
        "--coor-neural", action="store_true", help="Feed predicted coordinates to a neural actor instead of EQL"
    )
    p_train.set_defaults(func=cmd_train)

    # eval
    p_eval = sub.add_parser("eval", parents=[common], help="Play episodes with a trained actor")
    p_eval.add_argument("--episodes", type=int, default=10, help="Episodes to play (default: 10)")
    p_eval.add_argument(
        "--mode", choices=["neural", "eql", "random"], default="neural", help="Acting policy (default: neural)"
    )
    p_eval.add_argument("--greedy", action="store_true", help="Take the most likely action instead of sampling")
    p_eval.set_defaults(func=cmd_eval)

    # extract
    p_ext = sub.add_parser("extract", parents=[common], help="Prune the EQL actor and export its expressions")
    p_ext.set_defaults(func=cmd_extract)

    # explain
    p_exp = sub.add_parser("explain", parents=[common], help="Render and send policy and decision explanation prompts")
    online = p_exp.add_mutually_exclusive_group()
    online.add_argument("--offline", dest="offline", action="store_true", default=None, help="Write prompts to outbox/")
    online.add_argument("--online", dest="offline", action="store_false", help="Send prompts to the chat endpoint")
    p_exp.add_argument("--llm-base-url", help="OpenAI-compatible endpoint (overrides explain.base_url)")
    p_exp.add_argument("--llm-model", help="Model name (overrides explain.model)")
    p_exp.add_argument("--decisions", type=int, help="Decisions to explain (overrides explain.decision_samples)")
    p_exp.set_defaults(func=cmd_explain)

    # grad-check
    p_grad = sub.add_parser("grad-check", parents=[common], help="Compare analytic gradients to finite differences")
    p_grad.add_argument("--instances", type=int, default=100, help="Random tiny models per objective (default: 100)")
    p_grad.add_argument("--tolerance", type=float, default=1e-5, help="Maximum relative error (default: 1e-5)")
    p_grad.set_defaults(func=cmd_grad_check)

    return parser


# entry
def main(argv: Sequence[str] | None = None) -> int:
    configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)

    console = Console(stderr=True, style="bold red")

    if getattr(args, "verbose", False):
        configure_logging(logging.DEBUG)

    try:
        return args.func(args, console)
    except PixelEqlError as exc:
        # Config problems surface before a command starts.
        console.print(f"Error ({exc.category}): {exc}")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
