"""One-parameter surgery families dual to a pair of classes.

A family spec holds two classes alpha, beta with dual curves a, b on each
cusp satisfying alpha(a) = beta(b) = 1 and alpha(b) = beta(a) = 0 pushed
into the manifold.  Member n carries the class n*alpha + beta with filling
slope a - n*b on every cusp; its Thurston-type norm is declared linear on
the nonnegative cone: n*||alpha|| + ||beta||.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from typing import Callable

from .certify import (
    AssumptionBundle,
    CertificationReport,
    FamilyRowInput,
    ThresholdResult,
    certify_filling,
    subquadratic_threshold,
)
from .errors import InputError, NonPrimitiveSlopeError, PropertyViolation
from .homology import (
    BoundaryInclusionMap,
    CohomologyClass,
    SurgeryClassDatum,
    evaluate,
    is_compatible,
)
from .lattice import CompleteSlope, FlatTorusLattice, Slope, total_normalized_length
from .tube import DeepnessCertificate


@dataclass(frozen=True)
class FamilySpec:
    """Dual pair (alpha, a), (beta, b) generating the family."""

    alpha: CohomologyClass
    beta: CohomologyClass
    a_curves: tuple[tuple[int, int], ...]
    b_curves: tuple[tuple[int, int], ...]
    alpha_norm: float
    beta_norm: float
    n_range: tuple[int, int]
    symmetric_cusps: bool = False

    def __post_init__(self) -> None:
        if self.alpha.rank != self.beta.rank:
            raise InputError("family classes must share a homology rank")
        if len(self.a_curves) != len(self.b_curves):
            raise InputError("family needs one a and one b curve per cusp")
        if len(self.a_curves) == 0:
            raise InputError("family needs at least one cusp")
        for norm, name in ((self.alpha_norm, "alpha"), (self.beta_norm, "beta")):
            if not (math.isfinite(norm) and norm >= 0.0):
                raise InputError(f"{name} norm must be a nonnegative finite real")
        lo, hi = self.n_range
        if not (isinstance(lo, int) and isinstance(hi, int)) or lo > hi:
            raise InputError("n_range must be an integer pair lo <= hi")
        if lo < 0:
            raise InputError(
                "n_range must be nonnegative: the declared norm linearity only "
                "covers the cone spanned by alpha and beta"
            )


def validate_duality(spec: FamilySpec, inc: BoundaryInclusionMap) -> None:
    """Check alpha(a) = beta(b) = 1 and alpha(b) = beta(a) = 0 on every cusp."""
    if len(spec.a_curves) != inc.cusps:
        raise InputError(
            f"family has {len(spec.a_curves)} cusps, inclusion has {inc.cusps}"
        )
    for i, (a, b) in enumerate(zip(spec.a_curves, spec.b_curves)):
        pairs = (
            ("alpha(a)", spec.alpha, a, 1),
            ("beta(b)", spec.beta, b, 1),
            ("alpha(b)", spec.alpha, b, 0),
            ("beta(a)", spec.beta, a, 0),
        )
        for name, cls, curve, want in pairs:
            got = evaluate(cls, inc, i, curve)
            if got != want:
                raise InputError(
                    f"duality fails on cusp {i}: {name} = {got}, expected {want}"
                )


def generate(
    spec: FamilySpec, inc: BoundaryInclusionMap, n: int
) -> tuple[SurgeryClassDatum, CompleteSlope]:
    """Member n of the family: class n*alpha + beta, slope a - n*b per cusp.

    Raises NonPrimitiveSlopeError when the slope coordinates on some cusp
    share a factor; compatibility of the generated pair is asserted and its
    failure is an internal inconsistency, not an input problem.
    """
    if not isinstance(n, int) or isinstance(n, bool):
        raise InputError("family parameter must be an integer")
    if not (spec.n_range[0] <= n <= spec.n_range[1]):
        raise InputError(
            f"family parameter {n} outside declared range {spec.n_range}"
        )
    cls = spec.alpha.scaled(n) + spec.beta
    slopes = []
    for i, (a, b) in enumerate(zip(spec.a_curves, spec.b_curves)):
        p = a[0] - n * b[0]
        q = a[1] - n * b[1]
        if p == 0 and q == 0:
            raise NonPrimitiveSlopeError(
                f"family member {n} has zero slope on cusp {i}", 0
            )
        g = math.gcd(abs(p), abs(q))
        if g != 1:
            raise NonPrimitiveSlopeError(
                f"family member {n} has non-primitive slope ({p}, {q}) on cusp {i}",
                g,
            )
        slopes.append(Slope(p, q))
    complete = tuple(slopes)
    if not is_compatible(cls, inc, complete):
        raise PropertyViolation(
            f"family member {n}: generated class does not annihilate its slope"
        )
    norm = n * spec.alpha_norm + spec.beta_norm
    return SurgeryClassDatum.from_class(cls, inc, norm), complete


@dataclass(frozen=True)
class FamilyTableRow:
    n: int
    report: CertificationReport


@dataclass(frozen=True)
class SkippedMember:
    n: int
    gcd: int
    reason: str


@dataclass(frozen=True)
class FamilyTable:
    rows: tuple[FamilyTableRow, ...]
    skipped: tuple[SkippedMember, ...]
    threshold: ThresholdResult
    annotation: str


DeepnessProvider = DeepnessCertificate | None | Callable[
    [float], "DeepnessCertificate | None"
]


def family_table(
    spec: FamilySpec,
    inc: BoundaryInclusionMap,
    lattices: Sequence[FlatTorusLattice],
    bundle: AssumptionBundle,
    deepness: DeepnessProvider,
) -> FamilyTable:
    """Certify every family member in range and locate the threshold index.

    deepness is either a fixed certificate or a callable taking the member's
    total normalized length (tube data derived from the slope differs per
    member).  Non-primitive members are skipped with their gcd recorded.  The
    symmetric-cusp annotation records the declared exchange symmetry (equal
    filled core lengths), which the certification itself never uses.
    """
    validate_duality(spec, inc)
    if len(lattices) != inc.cusps:
        raise InputError(
            f"family has {inc.cusps} cusps but {len(lattices)} cusp lattices"
        )
    rows: list[FamilyTableRow] = []
    skipped: list[SkippedMember] = []
    scan: list[FamilyRowInput] = []
    for n in range(spec.n_range[0], spec.n_range[1] + 1):
        try:
            datum, slopes = generate(spec, inc, n)
        except NonPrimitiveSlopeError as exc:
            skipped.append(SkippedMember(n, exc.gcd, str(exc)))
            continue
        if callable(deepness):
            ell = total_normalized_length(lattices, slopes)
            cert = deepness(ell)
        else:
            cert = deepness
        report = certify_filling(
            filling_id=f"family-n{n}",
            lattices=lattices,
            slopes=slopes,
            datum=datum,
            inclusion=inc,
            bundle=bundle,
            deepness=cert,
        )
        rows.append(FamilyTableRow(n, report))
        scan.append(FamilyRowInput(n, report.ell, datum.thurston_norm))
    if not scan:
        raise InputError("family range produced no certifiable members")
    threshold = subquadratic_threshold(scan, inc.cusps, bundle)
    annotation = (
        "symmetric cusps: the declared exchange symmetry forces equal filled "
        "core lengths"
        if spec.symmetric_cusps
        else ""
    )
    return FamilyTable(tuple(rows), tuple(skipped), threshold, annotation)
