"""Command-line interface.

Verbs: generate, extract, train, predict, evaluate, report.  Exit code 0
on success; failures print one line `error:<category>: <message>` to
stderr and return the category's code.
"""

from __future__ import annotations

import argparse
import sys

from .pipeline import (
    METHODS,
    SPLITS,
    PipelineError,
    cmd_evaluate,
    cmd_extract,
    cmd_generate,
    cmd_predict,
    cmd_report,
    cmd_train,
    load_config,
)

_EXIT_CODES = {"usage": 2, "config": 3, "io": 4, "data": 5, "model": 6}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skelgest",
        description="Skeleton gesture segmentation and classification pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_split in (
        ("generate", False),
        ("extract", True),
        ("train", False),
        ("predict", True),
        ("evaluate", True),
        ("report", True),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="INI configuration file")
        p.add_argument("--method", choices=METHODS, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--paper-scale", action="store_true", default=None)
        if needs_split:
            p.add_argument("--split", choices=SPLITS, default="test")
    return parser


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        config = load_config(
            path=args.config,
            method=args.method,
            seed=args.seed,
            paper_scale=args.paper_scale,
        )
        if args.command == "generate":
            written = cmd_generate(config)
        elif args.command == "extract":
            written = cmd_extract(config, split=args.split)
        elif args.command == "train":
            written = cmd_train(config)
        elif args.command == "predict":
            written = cmd_predict(config, split=args.split)
        elif args.command == "evaluate":
            written = cmd_evaluate(config, split=args.split)
        else:
            written = cmd_report(config, split=args.split)
    except PipelineError as exc:
        print(f"error:{exc.category}: {exc}", file=sys.stderr)
        return _EXIT_CODES.get(exc.category, 1)
    except OSError as exc:
        print(f"error:io: {exc}", file=sys.stderr)
        return _EXIT_CODES["io"]

    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
