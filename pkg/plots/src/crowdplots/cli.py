"""Command line entry point: plot --kind tradeoff --in records.csv --out fig.png"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render a static figure from experiment record CSVs.",
    )
    parser.add_argument("--kind", choices=KINDS, required=True)
    parser.add_argument("--in", dest="input_path", required=True, help="input CSV path")
    parser.add_argument("--out", dest="output_path", required=True, help="output image path")
    parser.add_argument(
        "--y-scale",
        choices=["log", "linear"],
        default="",
        help="override the kind's default y-axis scale",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        input_path=args.input_path,
        kind=args.kind,
        output_path=args.output_path,
        y_scale=args.y_scale,
    )
    try:
        render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
