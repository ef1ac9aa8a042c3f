"""Command line interface.

Subcommands:
  slope         lengths of a filling slope on each cusp and combined
  nz            filled-core length window for a normalized length
  certify       run the certification criterion for one filling
  family        certify a declared family and locate its threshold
  verify-tubes  seeded Monte Carlo suites for the tube-geometry guarantees

Exit codes: 0 success, 2 malformed input, 3 hypothesis not met, 4 a
guaranteed property observed to fail.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .bundle import (
    ManifoldBundle,
    dumps_canonical,
    family_table_to_dict,
    load_manifold,
    parse_complete_slope,
    report_to_dict,
)
from .certify import AssumptionBundle, certify_filling, dichotomy_statement
from .errors import InputError, LamcertError
from .family import family_table
from .lattice import normalized_length, slope_length, total_normalized_length
from .tube import nz_core_length_window
from .verify import SUITES, merge_reports


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lamcert",
        description="certified norm bounds and core-curve certification "
        "for Dehn-filling families",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, manifold: bool = True) -> None:
        if manifold:
            p.add_argument(
                "--manifold", required=True, help="manifold bundle JSON file"
            )
            p.add_argument(
                "-C",
                "--constant",
                action="append",
                default=[],
                metavar="KEY=VALUE",
                help="override a declared constant "
                "(comparison_constant, ell_threshold)",
            )
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--out", help="also write the JSON report to this file")

    p = sub.add_parser("slope", help="slope lengths on the cusp tori")
    add_common(p)
    p.add_argument("--slope", required=True, help="complete slope 'p,q;p,q;...'")

    p = sub.add_parser("nz", help="filled-core length window")
    add_common(p, manifold=False)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--ell", type=float, help="total normalized length")
    group.add_argument("--manifold-slope", nargs=2, metavar=("MANIFOLD", "SLOPE"),
                       help="bundle file and complete slope to derive ell from")

    p = sub.add_parser("certify", help="certification criterion for one filling")
    add_common(p)
    p.add_argument("--slope", required=True, help="complete slope 'p,q;p,q;...'")
    p.add_argument("--surgery-class", required=True, help="named class in the bundle")

    p = sub.add_parser("family", help="certify the bundle's declared family")
    add_common(p)

    p = sub.add_parser("verify-tubes", help="Monte Carlo tube-geometry suites")
    p.add_argument(
        "--suite",
        choices=sorted(SUITES) + ["all"],
        default="all",
    )
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", help="also write the JSON report to this file")
    return parser


def _apply_overrides(bundle: ManifoldBundle, overrides: list[str]) -> ManifoldBundle:
    if not overrides:
        return bundle
    values = {
        "comparison_constant": bundle.constants.comparison_constant,
        "ell_threshold": bundle.constants.ell_threshold,
    }
    for item in overrides:
        if "=" not in item:
            raise InputError(f"constant override {item!r} must be KEY=VALUE")
        key, _, raw = item.partition("=")
        if key not in values:
            raise InputError(f"unknown constant {key!r}")
        try:
            values[key] = float(raw)
        except ValueError:
            raise InputError(f"constant override {item!r}: bad number") from None
    constants = AssumptionBundle(**values)
    return ManifoldBundle(
        name=bundle.name,
        cusps=bundle.cusps,
        inclusion=bundle.inclusion,
        tubes=bundle.tubes,
        deepness=bundle.deepness,
        constants=constants,
        classes=bundle.classes,
        family=bundle.family,
        provenance=bundle.provenance,
    )


def _emit(args, payload: dict, human_lines: list[str]) -> None:
    text = dumps_canonical(payload)
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    if args.json:
        sys.stdout.write(text)
    else:
        for line in human_lines:
            print(line)
        if getattr(args, "out", None):
            print(f"report written to {args.out}")


def _cmd_slope(args) -> int:
    bundle = _apply_overrides(load_manifold(args.manifold), args.constant)
    slopes = parse_complete_slope(args.slope, len(bundle.cusps))
    lattices = bundle.lattices
    rows = []
    lines = []
    for i, (lat, s) in enumerate(zip(lattices, slopes)):
        length = slope_length(lat, s)
        norm = normalized_length(lat, s)
        rows.append({"cusp": i, "p": s.p, "q": s.q,
                     "length": length, "normalized_length": norm})
        lines.append(
            f"cusp {i}: slope ({s.p}, {s.q})  length {length:.12g}  "
            f"normalized {norm:.12g}"
        )
    total = total_normalized_length(lattices, slopes)
    lines.append(f"total normalized length: {total:.12g}")
    _emit(args, {
        "schema": "lamcert-v1",
        "kind": "slope-lengths",
        "manifold": bundle.name,
        "cusps": rows,
        "total_normalized_length": total,
    }, lines)
    return 0


def _cmd_nz(args) -> int:
    if args.ell is not None:
        ell = args.ell
        source = {"ell": ell}
    else:
        bundle = load_manifold(args.manifold_slope[0])
        slopes = parse_complete_slope(args.manifold_slope[1], len(bundle.cusps))
        ell = total_normalized_length(bundle.lattices, slopes)
        source = {"manifold": bundle.name, "slope": args.manifold_slope[1], "ell": ell}
    window = nz_core_length_window(ell)
    _emit(args, {
        "schema": "lamcert-v1",
        "kind": "core-length-window",
        **source,
        "window": [window.lo, window.hi],
    }, [
        f"ell = {ell:.12g}",
        f"core length window: ({window.lo:.12g}, {window.hi:.12g})",
    ])
    return 0


def _cmd_certify(args) -> int:
    bundle = _apply_overrides(load_manifold(args.manifold), args.constant)
    slopes = parse_complete_slope(args.slope, len(bundle.cusps))
    datum = bundle.class_datum(args.surgery_class)
    ell = total_normalized_length(bundle.lattices, slopes)
    deepness = bundle.try_resolve_deepness(ell)
    report = certify_filling(
        filling_id=f"{bundle.name}{args.slope}",
        lattices=bundle.lattices,
        slopes=slopes,
        datum=datum,
        inclusion=bundle.inclusion,
        bundle=bundle.constants,
        deepness=deepness,
    )
    payload = report_to_dict(report)
    payload["dichotomy"] = dichotomy_statement(report)
    lines = [
        f"filling {report.filling_id}: ell = {report.ell:.9g}",
        f"stable lower bound: "
        + ("none" if report.stable_lower is None else f"{report.stable_lower:.9g}")
        + f" ({report.stable_lower_source})",
        f"thick upper bound (conditional): {report.thick_upper:.9g}",
        "criterion margin: "
        + ("none" if report.criterion_margin is None
           else f"{report.criterion_margin:.9g}"),
        f"deepness (doubled depth): {report.deepness_full.status}",
        f"verdict: {report.verdict}",
        f"dichotomy: {payload['dichotomy']}",
    ]
    lines.extend(f"  reason: {r}" for r in report.reasons)
    _emit(args, payload, lines)
    return 0


def _cmd_family(args) -> int:
    bundle = _apply_overrides(load_manifold(args.manifold), args.constant)
    if bundle.family is None:
        raise InputError("bundle declares no family")
    table = family_table(
        bundle.family,
        bundle.inclusion,
        bundle.lattices,
        bundle.constants,
        bundle.try_resolve_deepness,
    )
    payload = family_table_to_dict(table)
    lines = []
    for row in table.rows:
        r = row.report
        margin = "none" if r.criterion_margin is None else f"{r.criterion_margin:.6g}"
        lines.append(
            f"n = {row.n:>4d}  ell = {r.ell:9.4f}  margin = {margin:>12s}  "
            f"{r.verdict}"
        )
    for s in table.skipped:
        lines.append(f"n = {s.n:>4d}  skipped (gcd {s.gcd})")
    if table.threshold.threshold is None:
        lines.append(
            "threshold: none visible (criterion fails at the top of the range)"
        )
    else:
        lines.append(f"threshold: criterion holds for every n > {table.threshold.threshold}")
    if table.annotation:
        lines.append(table.annotation)
    _emit(args, payload, lines)
    return 0


def _run_suite_chunk(job: tuple[str, int, int, float, float]) -> dict:
    name, seed, samples, radius, depth_bound = job
    if name == "cap-margin":
        report = SUITES[name](seed, samples, radius, depth_bound)
    else:
        report = SUITES[name](seed, samples)
    return report.to_dict()


def _cmd_verify_tubes(args) -> int:
    from .tube import LOG4
    from .verify import SuiteReport

    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    if args.samples < 1:
        raise InputError("--samples must be positive")
    if args.jobs < 1:
        raise InputError("--jobs must be positive")
    results = []
    for name in names:
        chunk_sizes = [
            args.samples // args.jobs + (1 if i < args.samples % args.jobs else 0)
            for i in range(args.jobs)
        ]
        jobs = [
            (name, args.seed + i, size, 4.0, 2.0 * LOG4)
            for i, size in enumerate(chunk_sizes)
            if size > 0
        ]
        if len(jobs) == 1:
            dicts = [_run_suite_chunk(jobs[0])]
        else:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                dicts = list(pool.map(_run_suite_chunk, jobs))
        reports = [
            SuiteReport(
                suite=d["suite"], seed=d["seed"], samples=d["samples"],
                checked=d["checked"], violations=d["violations"],
                worst_margin=d["worst_margin"], notes=d["notes"],
            )
            for d in dicts
        ]
        results.append(merge_reports(reports))
    payload = {
        "schema": "lamcert-v1",
        "kind": "tube-verification",
        "seed": args.seed,
        "samples": args.samples,
        "suites": [r.to_dict() for r in results],
    }
    lines = [
        f"{r.suite}: {r.checked} checked, {r.violations} violations, "
        f"worst margin {r.worst_margin:.6g}"
        for r in results
    ]
    _emit(args, payload, lines)
    if any(not r.passed for r in results):
        return 4
    return 0


_COMMANDS = {
    "slope": _cmd_slope,
    "nz": _cmd_nz,
    "certify": _cmd_certify,
    "family": _cmd_family,
    "verify-tubes": _cmd_verify_tubes,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except LamcertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
