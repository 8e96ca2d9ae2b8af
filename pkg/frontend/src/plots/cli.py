"""Command line entry point: render one CSV file to one figure."""

import argparse

from .figures import KINDS, FigureSpec, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qpurify-plot",
        description="render a sweep or trajectory CSV to a figure",
    )
    parser.add_argument("input_csv", help="CSV file produced by qpurify sweep or qpurify zeno")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("output", help="image path; .svg gives byte-stable vector output")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        render(FigureSpec(args.input_csv, args.kind, args.output))
    except (OSError, ValueError) as exc:
        raise SystemExit(f"error: {exc}")
    return 0
