"""Seeded Monte Carlo suites exercising the tube-geometry guarantees.

Three suites, shared between the CLI and the test battery:

  projection   random boundary curves projected inward; checks the projected
               length against the certified factor bound.
  cap-margin   random deep boundary-to-boundary arcs closed by their minimal
               cap; checks the tightening inequality margin.
  shortening   random hybrid curves with deep strands run through the
               shortening procedure; checks strict decrease, trace and
               homology preservation, cap bounds, and the K functional.

All sampling is driven by numpy Generators seeded explicitly, so runs are
reproducible and partitionable by seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curves import (
    CapTightenResult,
    ChainEvaluator,
    HybridCurve,
    ThickSegment,
    TubeSegment,
    cap_and_tighten,
    curve_length,
    k_functional,
    minimal_cap,
    multicurve_length,
    shorten_deep_multicurve,
    tube_depth,
)
from .errors import InputError
from .lattice import covering_radius
from .tube import (
    LOG4,
    TWO_PI,
    TubeShape,
    path_length,
    project_path,
    projection_factor_bound,
    torus_lattice_at_radius,
)

GOLDEN = 2.0 * math.pi * (1.0 - 2.0 / (1.0 + math.sqrt(5.0)))


@dataclass
class SuiteReport:
    suite: str
    seed: int
    samples: int
    checked: int
    violations: int
    worst_margin: float
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "samples": self.samples,
            "checked": self.checked,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "notes": dict(self.notes),
        }


def merge_reports(reports: list[SuiteReport]) -> SuiteReport:
    """Combine chunked runs of one suite deterministically (by seed order)."""
    if not reports:
        raise InputError("nothing to merge")
    if len({r.suite for r in reports}) != 1:
        raise InputError("cannot merge reports from different suites")
    ordered = sorted(reports, key=lambda r: r.seed)
    return SuiteReport(
        suite=ordered[0].suite,
        seed=ordered[0].seed,
        samples=sum(r.samples for r in ordered),
        checked=sum(r.checked for r in ordered),
        violations=sum(r.violations for r in ordered),
        worst_margin=min(r.worst_margin for r in ordered),
        notes={"chunks": [r.seed for r in ordered]},
    )


def random_boundary_curve(
    rng: np.random.Generator, tube: TubeShape, n_vertices: int
) -> np.ndarray:
    """Random polyline on the boundary torus (unwrapped coordinates)."""
    theta = np.cumsum(rng.uniform(-0.8, 0.8, size=n_vertices))
    theta += rng.uniform(0.0, TWO_PI)
    z = np.cumsum(rng.uniform(-1.0, 1.0, size=n_vertices)) * tube.core_length
    r = np.full(n_vertices, tube.radius)
    return np.column_stack([r, theta, z])


def run_projection_suite(seed: int, samples: int) -> SuiteReport:
    """Projected length of boundary curves must not exceed the factor bound
    times the original length (both lengths by quadrature, tolerance 1e-8)."""
    rng = np.random.default_rng(seed)
    violations = 0
    worst = math.inf
    for _ in range(samples):
        tube = TubeShape(
            core_length=float(rng.uniform(0.05, 1.0)),
            twist=float(rng.uniform(0.0, TWO_PI)),
            radius=float(rng.uniform(1.0, 4.0)),
        )
        curve = random_boundary_curve(rng, tube, int(rng.integers(3, 8)))
        r = float(rng.uniform(0.05, tube.radius * 0.95))
        bound = projection_factor_bound(r, tube.radius)
        orig = path_length(curve, 1e-9)
        proj = path_length(project_path(tube, curve, r), 1e-9)
        margin = bound * orig - proj + 1e-8
        worst = min(worst, margin)
        if margin < 0.0:
            violations += 1
    return SuiteReport("projection", seed, samples, samples, violations, worst)


def sample_deep_arc(
    rng: np.random.Generator, tube: TubeShape, depth_bound: float
) -> np.ndarray:
    """Boundary-to-boundary arc descending strictly deeper than depth_bound."""
    r_floor = tube.radius - depth_bound
    if r_floor <= 0.06:
        raise InputError("tube too shallow for the requested depth bound")
    r_min = float(rng.uniform(0.05, r_floor - 0.01))
    n_mid = int(rng.integers(2, 6))
    radii = np.concatenate([
        [tube.radius],
        np.sort(rng.uniform(r_min, tube.radius * 0.98, size=n_mid))[::-1],
        [r_min],
        np.sort(rng.uniform(r_min, tube.radius * 0.98, size=n_mid)),
        [tube.radius],
    ])
    n = radii.shape[0]
    theta = np.cumsum(rng.uniform(-0.6, 0.6, size=n)) + rng.uniform(0.0, TWO_PI)
    z = np.cumsum(rng.uniform(-1.0, 1.0, size=n)) * tube.core_length
    return np.column_stack([radii, theta, z])


def run_cap_margin_suite(
    seed: int,
    samples: int,
    radius: float = 4.0,
    depth_bound: float = 2.0 * LOG4,
) -> SuiteReport:
    """Margins of the cap-and-tighten inequality on random deep arcs.

    The margin is reported whether or not the certified hypotheses hold;
    the report counts flagged (uncertified) samples separately.
    """
    rng = np.random.default_rng(seed)
    violations = 0
    flagged = 0
    worst = math.inf
    for _ in range(samples):
        tube = TubeShape(
            core_length=float(rng.uniform(0.005, 0.05)),
            twist=float(rng.uniform(0.0, TWO_PI)),
            radius=radius,
        )
        arc = sample_deep_arc(rng, tube, depth_bound)
        result: CapTightenResult = cap_and_tighten(tube, arc, depth_bound)
        worst = min(worst, result.margin)
        if result.margin < 0.0:
            violations += 1
        if not result.certified:
            flagged += 1
    return SuiteReport(
        "cap-margin",
        seed,
        samples,
        samples,
        violations,
        worst,
        notes={"flagged_uncertified": flagged},
    )


@dataclass(frozen=True, eq=False)
class ShorteningFixture:
    curve: HybridCurve
    tubes: dict[str, TubeShape]
    depth_bound: float
    evaluator: ChainEvaluator
    deep_strands: int
    diameters: dict[str, float]


def _feasible_tube(rng: np.random.Generator) -> tuple[TubeShape, float, float]:
    """Tube whose boundary diameter supports a workable depth bound."""
    for _ in range(64):
        tube = TubeShape(
            core_length=float(10.0 ** rng.uniform(-9.0, -7.5)),
            twist=float(GOLDEN + rng.uniform(-0.3, 0.3)),
            radius=float(rng.uniform(5.5, 6.5)),
        )
        diam = covering_radius(
            torus_lattice_at_radius(tube, tube.radius), 1e-9
        ).hi
        depth_bound = 8.0 * diam + 2.0 * LOG4 + 0.05
        if tube.radius > depth_bound + LOG4 + 0.15 and tube.radius - depth_bound > 0.4:
            return tube, depth_bound, diam
    raise InputError("could not sample a feasible tube")


def _strand(
    rng: np.random.Generator, tube: TubeShape, deep: bool, depth_bound: float
) -> np.ndarray:
    big_r = tube.radius
    if deep:
        r_min = float(rng.uniform(0.05, max(0.10, big_r - depth_bound - 0.2)))
    else:
        r_min = float(rng.uniform(big_r - depth_bound + 0.1, big_r - 0.3))
    radii = np.array([
        big_r,
        float(rng.uniform(r_min, big_r * 0.97)),
        r_min,
        float(rng.uniform(r_min, big_r * 0.97)),
        big_r,
    ])
    n = radii.shape[0]
    theta = np.cumsum(rng.uniform(-0.4, 0.4, size=n)) + rng.uniform(0.0, TWO_PI)
    winding = int(rng.integers(-2, 3))
    z0 = float(rng.uniform(0.0, 2.0)) * tube.core_length
    z_end = z0 + winding * tube.core_length + float(
        rng.uniform(-0.2, 0.2)
    ) * tube.core_length
    z = np.linspace(z0, z_end, n)
    z[1:-1] += rng.uniform(-0.1, 0.1, size=n - 2) * tube.core_length
    return np.column_stack([radii, theta, z])


def sample_shortening_fixture(rng: np.random.Generator) -> ShorteningFixture:
    """Hybrid curve with at least one strand deeper than the depth bound,
    built so the shortening hypotheses hold and the pairing is nonnegative."""
    n_tubes = int(rng.integers(1, 3))
    built = [_feasible_tube(rng) for _ in range(n_tubes)]
    depth_bound = max(b[1] for b in built)
    for tube, _, _ in built:
        if tube.radius <= depth_bound + LOG4 + 0.1:
            return sample_shortening_fixture(rng)
    tubes = {f"t{i}": b[0] for i, b in enumerate(built)}
    diameters = {f"t{i}": b[2] for i, b in enumerate(built)}

    strands: list[tuple[str, np.ndarray, bool]] = []
    deep_total = 0
    for tid, tube in tubes.items():
        n_strands = int(rng.integers(1, 4))
        deep_flags = [bool(rng.integers(0, 2)) for _ in range(n_strands)]
        if not any(deep_flags):
            deep_flags[0] = True
        for deep in deep_flags:
            strands.append((tid, _strand(rng, tube, deep, depth_bound), deep))
            deep_total += int(deep)
    rng.shuffle(strands)

    segments: list = []
    tag_rank = len(strands)
    for i, (tid, path, _) in enumerate(strands):
        tag = tuple(int(i == j) for j in range(tag_rank))
        segments.append(ThickSegment(f"h{i}", float(rng.uniform(1.0, 4.0)), tag))
        segments.append(TubeSegment(tid, path))
    curve = HybridCurve(tuple(segments))

    weights: dict[str, float] = {}
    for tid, tube in tubes.items():
        net = sum(
            s.z_displacement
            for s in curve.segments
            if isinstance(s, TubeSegment) and s.tube_id == tid
        )
        scaled = net / tube.core_length
        weights[tid] = 0.25 * tag_rank / ((1.0 + abs(scaled)) * tube.core_length)
    evaluator = ChainEvaluator(cls=tuple([1.0] * tag_rank), tube_z_weights=weights)
    return ShorteningFixture(
        curve=curve,
        tubes=tubes,
        depth_bound=depth_bound,
        evaluator=evaluator,
        deep_strands=deep_total,
        diameters=diameters,
    )


def check_shortening_fixture(fixture: ShorteningFixture) -> list[str]:
    """Run the shortening procedure on the fixture and return a list of
    violated properties (empty when everything holds)."""
    problems: list[str] = []
    curve = fixture.curve
    tubes = fixture.tubes
    result = shorten_deep_multicurve(
        curve, tubes, fixture.depth_bound, diameter_tol=1e-9
    )
    mc = result.multicurve
    ledger = result.ledger

    before = curve_length(curve, tubes)
    after = multicurve_length(mc, tubes)
    if not after < before:
        problems.append("length did not strictly decrease")
    if abs(ledger.length_before - before) > 1e-9 * (1.0 + before):
        problems.append("ledger before-length mismatch")
    if abs(ledger.length_after - after) > 1e-9 * (1.0 + after):
        problems.append("ledger after-length mismatch")

    labels_before = sorted(curve.thick_labels())
    labels_after = sorted(
        lbl for comp, _ in mc.components for lbl in comp.thick_labels()
    )
    if labels_before != labels_after:
        problems.append("thick trace changed")

    rho_before = fixture.evaluator.of_curve(curve)
    rho_after = fixture.evaluator.of_multicurve(mc)
    if abs(rho_before - rho_after) > 1e-6 * (1.0 + abs(rho_before)):
        problems.append("pairing changed")
    if rho_before < 0.0:
        problems.append("fixture pairing should be nonnegative")

    for rec in ledger.tubes:
        diam = fixture.diameters[rec.tube_id]
        for cap_len in rec.cap_lengths:
            if cap_len > diam + 1e-9:
                problems.append("cap longer than the boundary diameter")
        if rec.net_chain_added != 0:
            problems.append("cap bookkeeping did not net to zero")

    core_ids = set()
    for comp, _ in mc.components:
        seglist = comp.segments
        is_core = (
            len(seglist) == 1
            and isinstance(seglist[0], TubeSegment)
            and seglist[0].path.shape[0] == 2
            and float(seglist[0].path[:, 0].max()) == 0.0
        )
        if is_core:
            core_ids.add(id(comp))
            continue
        for seg in seglist:
            if isinstance(seg, TubeSegment):
                if tube_depth(tubes[seg.tube_id], seg.path) > fixture.depth_bound:
                    problems.append("surviving component deeper than the bound")

    k_before = k_functional(
        fixture.evaluator, _as_multicurve(curve), tubes
    )
    k_after = k_functional(fixture.evaluator, mc, tubes)
    if k_after < k_before - 1e-9 * (1.0 + abs(k_before)):
        problems.append("K functional decreased")
    return problems


def _as_multicurve(curve: HybridCurve):
    from .curves import MultiCurve

    return MultiCurve(((curve, 1),))


def run_shortening_suite(seed: int, samples: int) -> SuiteReport:
    rng = np.random.default_rng(seed)
    violations = 0
    checked = 0
    notes: dict[str, int] = {}
    for _ in range(samples):
        fixture = sample_shortening_fixture(rng)
        problems = check_shortening_fixture(fixture)
        checked += 1
        if problems:
            violations += 1
            for p in problems:
                notes[p] = notes.get(p, 0) + 1
    return SuiteReport(
        "shortening", seed, samples, checked, violations,
        0.0 if violations == 0 else -1.0, notes=notes,
    )


SUITES = {
    "projection": run_projection_suite,
    "cap-margin": run_cap_margin_suite,
    "shortening": run_shortening_suite,
}
