"""Certification of the core-lamination criterion for one filling.

The certified implication: under the declared assumption bundle (comparison
constant, deepness data, thresholds), if the stable lower bound from the
filled cores strictly exceeds three times the conditional thick upper bound
and the doubled-depth deepness conditions hold, then every leaf of the
length-ratio-maximizing lamination of the filled manifold is a filled core.
The single-depth route certifies the weaker conclusion that some leaf is a
core when the factor-one comparison holds.  The two routes use different
depth hypotheses and are never mixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import HypothesisError, InputError
from .homology import SurgeryClassDatum, is_compatible
from .lattice import CompleteSlope, FlatTorusLattice, total_normalized_length
from .norms import stable_lower_bound_from_cores, thick_stable_upper_bound
from .tube import (
    ELL_MIN,
    CoreLengthWindow,
    DeepnessCertificate,
    DeepnessVerdict,
    check_deepness,
    nz_core_length_window,
)

VERDICT_CERTIFIED = "certified-cores"
VERDICT_NOT = "not-certified"
VERDICT_HYPOTHESES = "hypotheses-failed"


@dataclass(frozen=True)
class AssumptionBundle:
    """Declared constants the certification is conditional on.

    comparison_constant: C in the thick upper bound C * ||rho||_Th.
    ell_threshold: L above which the deepness data is declared persistent.
    """

    comparison_constant: float
    ell_threshold: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.comparison_constant) and self.comparison_constant > 0.0):
            raise InputError("comparison constant must be a positive finite real")
        if not (math.isfinite(self.ell_threshold) and self.ell_threshold >= 0.0):
            raise InputError("ell threshold must be a nonnegative finite real")


@dataclass(frozen=True)
class CertificationReport:
    filling_id: str
    ell: float
    window: CoreLengthWindow | None
    stable_lower: float | None
    stable_lower_source: str
    thick_upper: float
    criterion_margin: float | None
    partial_margin: float | None
    deepness_full: DeepnessVerdict
    deepness_partial: DeepnessVerdict
    verdict: str
    reasons: tuple[str, ...]
    assumptions: dict

    def __post_init__(self) -> None:
        if self.verdict == VERDICT_CERTIFIED:
            ok = (
                self.criterion_margin is not None
                and self.criterion_margin > 0.0
                and self.deepness_full.status == "pass"
                and self.ell > max(ELL_MIN, float(self.assumptions.get("ell_threshold", 0.0)))
            )
            if not ok:
                raise InputError(
                    "certified-cores verdict without positive margin, passing deepness, "
                    "and ell above both thresholds"
                )


def certify_filling(
    filling_id: str,
    lattices: Sequence[FlatTorusLattice],
    slopes: CompleteSlope,
    datum: SurgeryClassDatum,
    inclusion,
    bundle: AssumptionBundle,
    deepness: DeepnessCertificate | None,
    empirical_lower: float | None = None,
) -> CertificationReport:
    """Evaluate the certification criterion for one filling.

    The stable lower bound comes from the core pairing when the class is
    zero-surgery; otherwise an empirical lower bound may be supplied (tagged
    as such) or the verdict degrades to not-certified.  deepness may be None
    when no certificate could be produced (for example the tube data derives
    from a window that is undefined at this slope); the deepness checks then
    fail and the verdict can never reach certified-cores.
    """
    if datum.cls.is_zero():
        raise InputError("certification requires a nontrivial class")
    if not is_compatible(datum.cls, inclusion, slopes):
        raise InputError(
            f"class is not compatible with the filling slopes of {filling_id!r}"
        )
    ell = total_normalized_length(lattices, slopes)
    reasons: list[str] = []
    hypotheses_ok = True
    if ell <= ELL_MIN:
        hypotheses_ok = False
        reasons.append(f"ell = {ell:.6g} <= {ELL_MIN} (window threshold)")
    if ell <= bundle.ell_threshold:
        hypotheses_ok = False
        reasons.append(
            f"ell = {ell:.6g} <= {bundle.ell_threshold} (declared persistence threshold)"
        )

    window = None
    stable_lower = None
    source = "none"
    if ell > ELL_MIN:
        window = nz_core_length_window(ell)
        if datum.kind == "zero-surgery":
            stable_lower = stable_lower_bound_from_cores(len(slopes), ell)
            source = "core-pairing"
    if stable_lower is None and empirical_lower is not None:
        stable_lower = empirical_lower
        source = "empirical"

    thick_upper = thick_stable_upper_bound(
        bundle.comparison_constant, datum.thurston_norm
    )
    criterion_margin = None
    partial_margin = None
    if stable_lower is not None:
        criterion_margin = stable_lower - 3.0 * thick_upper
        partial_margin = stable_lower - thick_upper

    if deepness is None:
        deep_full = DeepnessVerdict("fail", True, ())
        deep_partial = DeepnessVerdict("fail", False, ())
        reasons.append("no deepness certificate available for this filling")
    else:
        deep_full = check_deepness(deepness, doubled=True)
        deep_partial = check_deepness(deepness, doubled=False)

    if hypotheses_ok and criterion_margin is not None and criterion_margin > 0.0:
        if deep_full.status == "pass":
            verdict = VERDICT_CERTIFIED
        else:
            verdict = VERDICT_HYPOTHESES
            reasons.append(
                "doubled-depth deepness "
                + deep_full.status
                + ": "
                + ", ".join(deep_full.failed_names())
            )
    elif not hypotheses_ok:
        verdict = VERDICT_HYPOTHESES
    else:
        verdict = VERDICT_NOT
        if criterion_margin is None:
            reasons.append("no stable lower bound available for this class")
        else:
            reasons.append(
                f"criterion margin {criterion_margin:.6g} not positive"
            )

    assumptions = {
        "comparison_constant": bundle.comparison_constant,
        "ell_threshold": bundle.ell_threshold,
        "deepness_depth": None if deepness is None else deepness.depth,
        "deepness_clearance": None if deepness is None else deepness.core_clearance,
        "deepness_mu": None if deepness is None else deepness.mu,
        "tube_provenance": (
            () if deepness is None
            else tuple(rec.provenance for rec in deepness.tubes)
        ),
        "stable_lower_source": source,
    }
    return CertificationReport(
        filling_id=filling_id,
        ell=ell,
        window=window,
        stable_lower=stable_lower,
        stable_lower_source=source,
        thick_upper=thick_upper,
        criterion_margin=criterion_margin,
        partial_margin=partial_margin,
        deepness_full=deep_full,
        deepness_partial=deep_partial,
        verdict=verdict,
        reasons=tuple(reasons),
        assumptions=assumptions,
    )


def dichotomy_statement(report: CertificationReport) -> str:
    """Human-readable conclusion, routed strictly by matching hypotheses.

    Full conclusion needs the doubled-depth deepness and the factor-three
    margin; the partial conclusion needs single-depth deepness and the
    factor-one margin; the two are never combined.
    """
    if report.verdict == VERDICT_CERTIFIED:
        return (
            "every leaf of the stretch lamination is a filled core curve "
            "(conditional on the declared assumption bundle)"
        )
    ell_floor = max(ELL_MIN, float(report.assumptions.get("ell_threshold", 0.0)))
    if (
        report.partial_margin is not None
        and report.partial_margin > 0.0
        and report.deepness_partial.status == "pass"
        and report.ell > ell_floor
    ):
        return (
            "the stretch lamination contains a filled core curve "
            "(conditional on the declared assumption bundle)"
        )
    return "no conclusion certified for this filling"


@dataclass(frozen=True)
class FamilyRowInput:
    index: int
    ell: float
    thurston_norm: float


@dataclass(frozen=True)
class ThresholdRow:
    index: int
    ell: float
    stable_lower: float | None
    thick_upper: float
    margin: float | None
    ok: bool


@dataclass(frozen=True)
class ThresholdResult:
    """Least N with the margin criterion holding for every sampled index > N.

    threshold is None when the criterion fails at the top of the sampled
    range, i.e. no threshold is visible in the data.
    """

    threshold: int | None
    rows: tuple[ThresholdRow, ...]
    trailing_failure: int | None


def subquadratic_threshold(
    rows: Sequence[FamilyRowInput], n_cusps: int, bundle: AssumptionBundle
) -> ThresholdResult:
    """Scan a family for the index past which the factor-three criterion
    holds (stable lower bound from cores versus three times the conditional
    thick upper bound)."""
    if not rows:
        raise InputError("threshold scan needs at least one row")
    if sorted(r.index for r in rows) != [r.index for r in rows]:
        raise InputError("threshold scan rows must be sorted by index")
    out: list[ThresholdRow] = []
    for r in rows:
        upper = thick_stable_upper_bound(bundle.comparison_constant, r.thurston_norm)
        if r.ell > ELL_MIN:
            lower = stable_lower_bound_from_cores(n_cusps, r.ell)
            margin = lower - 3.0 * upper
            ok = margin > 0.0
        else:
            lower = None
            margin = None
            ok = False
        out.append(ThresholdRow(r.index, r.ell, lower, upper, margin, ok))
    if not out[-1].ok:
        return ThresholdResult(None, tuple(out), out[-1].index)
    threshold = rows[0].index - 1
    for row in out:
        if not row.ok:
            threshold = row.index
    return ThresholdResult(max(threshold, 0), tuple(out), None)
