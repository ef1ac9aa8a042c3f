"""Command line interface.

Subcommands:
  export  query a census backend for one manifold and write a bundle file
  record  freeze the backend's answers in a replayable dataset file

Both run single-threaded, one filling at a time.  Exit codes: 0 success
(including exports where some fillings failed and were reported per
entry), 2 malformed input or unavailable backend.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .backend import resolve_backend
from .errors import ExportError
from .export import ConeData, ExportRequest, export, parse_filling, record_dataset


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="census-export",
        description="export census link exteriors to manifold bundle files",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--name", required=True, help="census manifold name")
        p.add_argument(
            "--fill",
            action="append",
            default=[],
            metavar="P,Q;P,Q",
            help="filling to sample, one slope per cusp (repeatable)",
        )
        p.add_argument("--out", required=True, type=Path, help="output file")
        p.add_argument(
            "--backend",
            default="snappy",
            metavar="SNAPPY|DATASET",
            help="'snappy' for the live census (default) or a recorded "
            "dataset file",
        )

    p_export = sub.add_parser("export", help="write a manifold bundle file")
    add_common(p_export)
    p_export.add_argument(
        "--depth", type=float, default=None, help="declared tube depth bound"
    )
    p_export.add_argument(
        "--clearance", type=float, default=None, help="declared core clearance"
    )
    p_export.add_argument(
        "--mu", type=float, default=None, help="declared thin-part cutoff"
    )
    p_export.add_argument(
        "--comparison-constant",
        type=float,
        default=None,
        help="declared thick-norm comparison constant",
    )
    p_export.add_argument(
        "--ell-threshold",
        type=float,
        default=None,
        help="declared persistence threshold on normalized length",
    )
    p_export.add_argument(
        "--twist",
        type=float,
        default=None,
        help="tube twist angle (default: the bundle's golden-angle default)",
    )
    p_export.add_argument(
        "--tube-radius",
        type=float,
        default=None,
        help="fixed tube radius (default: meyerhoff radius policy)",
    )

    p_record = sub.add_parser("record", help="write a replayable dataset file")
    add_common(p_record)

    return parser


def _request(args: argparse.Namespace) -> ExportRequest:
    return ExportRequest(
        name=args.name,
        fillings=tuple(parse_filling(text) for text in args.fill),
        out=args.out,
    )


def _cone(args: argparse.Namespace) -> ConeData:
    defaults = ConeData()
    return ConeData(
        depth=defaults.depth if args.depth is None else args.depth,
        clearance=(
            defaults.clearance if args.clearance is None else args.clearance
        ),
        mu=defaults.mu if args.mu is None else args.mu,
        comparison_constant=(
            defaults.comparison_constant
            if args.comparison_constant is None
            else args.comparison_constant
        ),
        ell_threshold=(
            defaults.ell_threshold
            if args.ell_threshold is None
            else args.ell_threshold
        ),
        twist=args.twist,
        tube_radius=args.tube_radius,
    )


def _warn(warnings: list[str]) -> None:
    for line in warnings:
        print(f"warning: {line}", file=sys.stderr)


def _cmd_export(args: argparse.Namespace) -> int:
    backend = resolve_backend(args.backend)
    _, warnings = export(_request(args), backend, _cone(args))
    _warn(warnings)
    print(f"bundle written to {args.out}")
    return 0


def _cmd_record(args: argparse.Namespace) -> int:
    backend = resolve_backend(args.backend)
    _, warnings = record_dataset(_request(args), backend)
    _warn(warnings)
    print(f"dataset written to {args.out}")
    return 0


_COMMANDS = {"export": _cmd_export, "record": _cmd_record}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
