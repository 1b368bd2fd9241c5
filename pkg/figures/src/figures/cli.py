"""Command line: figures <figure-id> --csv <path...> --out <file>."""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_IDS, EmptyDataError, FigureRecipe, MissingColumnError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render a figure analogue (1-6) from experiment CSVs.",
    )
    parser.add_argument("figure_id", type=int, choices=FIGURE_IDS, help="figure analogue 1-6")
    parser.add_argument("--csv", nargs="+", required=True, help="input CSV path(s)")
    parser.add_argument("--out", required=True, help="output image file (.png or .svg)")
    parser.add_argument("--title", default="", help="optional figure title")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        recipe = FigureRecipe(args.figure_id, tuple(args.csv), args.out, title=args.title)
        path = render(recipe)
    except (MissingColumnError, EmptyDataError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
