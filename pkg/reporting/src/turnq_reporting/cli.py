"""Standalone plotting entry point."""

from __future__ import annotations

import argparse
import sys

from .plot import FigureSpec, SchemaError, plot_run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="turnq-plot",
        description="Render training curves with evaluation payoffs from turnq CSVs",
    )
    parser.add_argument(
        "--train-csv", action="append", required=True, help="train.csv path (repeatable)"
    )
    parser.add_argument(
        "--eval-csv", action="append", default=[], help="eval.csv path (one per train csv)"
    )
    parser.add_argument("--label", action="append", default=[], help="legend label per run")
    parser.add_argument(
        "--perspective", action="append", default=[], help="panel perspective (default: from eval)"
    )
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--format", choices=("png", "svg"), default="png")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(
            train_csvs=args.train_csv,
            eval_csvs=args.eval_csv,
            out=args.out,
            image_format=args.format,
            labels=args.label,
            perspectives=args.perspective,
        )
        path = plot_run(spec)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
