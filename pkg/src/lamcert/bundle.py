"""Manifold bundle files and canonical JSON serialization.

A bundle file (schema "lamcert-v1", kind "manifold") declares everything a
certification run consumes: cusp shapes, homology inclusions, tube data,
deepness parameters, comparison constants, named classes, and optionally a
family spec.  Real numbers are stored as decimal strings so files round-trip
byte-identically; integers stay JSON integers.

Tube data comes in three per-cusp forms, tracked by provenance:
  explicit        a declared tube shape; the deepness record is derived from
                  it (interface radius, boundary diameter).
  derive-from-nz  core length from the filled-core window midpoint split
                  across cusps, declared twist, radius by policy; derived
                  records, honest and typically failing at moderate slopes.
  declared        the deepness record itself is the assumption.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

from .certify import AssumptionBundle, CertificationReport
from .errors import HypothesisError, InputError
from .family import FamilySpec, FamilyTable
from .homology import BoundaryInclusionMap, CohomologyClass, SurgeryClassDatum
from .lattice import CompleteSlope, FlatTorusLattice, Slope
from .tube import (
    DeepnessCertificate,
    DeepnessVerdict,
    TubeDeepnessRecord,
    TubeShape,
    covering_radius,
    meyerhoff_tube_radius,
    nz_core_length_window,
    thin_interface_radius,
    torus_lattice_at_radius,
)

SCHEMA = "lamcert-v1"

# Default synthetic twist for derive-from-nz tubes: the golden angle, far
# from the low-order rationals that make boundary lattices degenerate.
GOLDEN_TWIST = 2.0 * math.pi * (1.0 - 2.0 / (1.0 + math.sqrt(5.0)))


def fmt_real(x: float) -> str:
    return repr(float(x))


def parse_real(value: Any, where: str) -> float:
    if isinstance(value, bool):
        raise InputError(f"{where}: expected a real number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            raise InputError(f"{where}: cannot parse real number {value!r}") from None
    raise InputError(f"{where}: expected a real number, got {type(value).__name__}")


def _require(data: Mapping, key: str, where: str) -> Any:
    if key not in data:
        raise InputError(f"{where}: missing required field {key!r}")
    return data[key]


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{where}: expected an integer")
    return value


def jsonable(obj: Any) -> Any:
    """Recursively convert to JSON-dumpable data with floats as decimal
    strings (deterministic byte-for-byte serialization)."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return fmt_real(obj)
    if isinstance(obj, int):
        return obj
    if isinstance(obj, str):
        return obj
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    raise InputError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(data: Any) -> str:
    return json.dumps(jsonable(data), sort_keys=True, indent=2) + "\n"


@dataclass(frozen=True)
class CuspSpec:
    modulus: complex
    area: float

    @property
    def lattice(self) -> FlatTorusLattice:
        return FlatTorusLattice.from_modulus(self.modulus, self.area)


@dataclass(frozen=True)
class TubeSpec:
    mode: str
    shape: TubeShape | None = None
    twist: float | None = None
    radius_policy: tuple[str, float | None] | None = None
    declared: TubeDeepnessRecord | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("explicit", "derive-from-nz", "declared"):
            raise InputError(f"unknown tube mode {self.mode!r}")


@dataclass(frozen=True)
class DeepnessParams:
    depth: float
    clearance: float
    mu: float
    mu_below_margulis: bool | None
    mu_cap: float | None


@dataclass(frozen=True)
class NamedClass:
    cls: CohomologyClass
    thurston_norm: float


@dataclass(frozen=True, eq=False)
class ManifoldBundle:
    name: str
    cusps: tuple[CuspSpec, ...]
    inclusion: BoundaryInclusionMap
    tubes: tuple[TubeSpec, ...]
    deepness: DeepnessParams
    constants: AssumptionBundle
    classes: Mapping[str, NamedClass]
    family: FamilySpec | None
    provenance: Mapping[str, Any] | None

    @property
    def lattices(self) -> tuple[FlatTorusLattice, ...]:
        return tuple(c.lattice for c in self.cusps)

    def class_datum(self, name: str) -> SurgeryClassDatum:
        if name not in self.classes:
            raise InputError(f"bundle has no class named {name!r}")
        nc = self.classes[name]
        return SurgeryClassDatum.from_class(nc.cls, self.inclusion, nc.thurston_norm)

    def resolve_deepness(self, ell: float | None = None) -> DeepnessCertificate:
        """Materialize the deepness certificate, deriving records for the
        tube modes that carry geometry and passing declared records through.

        ell is required when any tube uses derive-from-nz.
        """
        records: list[TubeDeepnessRecord] = []
        for i, spec in enumerate(self.tubes):
            if spec.mode == "declared":
                records.append(spec.declared)
                continue
            if spec.mode == "explicit":
                shape = spec.shape
            else:
                if ell is None:
                    raise InputError(
                        f"tube {i} derives its core length from the slope; "
                        "an ell value is required"
                    )
                window = nz_core_length_window(ell)
                total_mid = 0.5 * (window.lo + window.hi)
                core = total_mid / len(self.cusps)
                policy, value = spec.radius_policy
                if policy == "fixed":
                    radius = value
                else:
                    radius = meyerhoff_tube_radius(core)
                shape = TubeShape(core, spec.twist, radius)
            r_mu = thin_interface_radius(shape, self.deepness.mu)
            cov = covering_radius(
                torus_lattice_at_radius(shape, shape.radius), 1e-9
            )
            records.append(TubeDeepnessRecord(
                radius=shape.radius,
                boundary_diameter=(cov.lo, cov.hi),
                dist_thick_to_max=shape.radius - r_mu,
                dist_thick_to_core=r_mu,
                provenance="derived",
                thin_empty=(r_mu == 0.0),
            ))
        return DeepnessCertificate(
            depth=self.deepness.depth,
            core_clearance=self.deepness.clearance,
            mu=self.deepness.mu,
            tubes=tuple(records),
            mu_below_margulis=self.deepness.mu_below_margulis,
            mu_cap=self.deepness.mu_cap,
        )

    def try_resolve_deepness(self, ell: float | None = None) -> DeepnessCertificate | None:
        """resolve_deepness, degrading to None when a derivation hypothesis
        fails (e.g. slope-derived core length with ell below the window)."""
        try:
            return self.resolve_deepness(ell)
        except HypothesisError:
            return None


def _load_tube(data: Mapping, where: str) -> TubeSpec:
    mode = _require(data, "mode", where)
    if mode == "explicit":
        return TubeSpec(
            mode=mode,
            shape=TubeShape(
                parse_real(_require(data, "core_length", where), f"{where}.core_length"),
                parse_real(_require(data, "twist", where), f"{where}.twist"),
                parse_real(_require(data, "radius", where), f"{where}.radius"),
            ),
        )
    if mode == "derive-from-nz":
        twist_raw = data.get("twist", "golden")
        twist = GOLDEN_TWIST if twist_raw == "golden" else parse_real(
            twist_raw, f"{where}.twist"
        )
        policy_raw = _require(data, "radius_policy", where)
        if policy_raw == "meyerhoff":
            policy = ("meyerhoff", None)
        elif isinstance(policy_raw, Mapping) and "fixed" in policy_raw:
            policy = ("fixed", parse_real(policy_raw["fixed"], f"{where}.radius_policy.fixed"))
        else:
            raise InputError(
                f"{where}.radius_policy must be \"meyerhoff\" or {{\"fixed\": value}}"
            )
        return TubeSpec(mode=mode, twist=twist, radius_policy=policy)
    if mode == "declared":
        diam = _require(data, "boundary_diameter", where)
        if not (isinstance(diam, Sequence) and len(diam) == 2):
            raise InputError(f"{where}.boundary_diameter must be a [lo, hi] pair")
        return TubeSpec(
            mode=mode,
            declared=TubeDeepnessRecord(
                radius=parse_real(_require(data, "radius", where), f"{where}.radius"),
                boundary_diameter=(
                    parse_real(diam[0], f"{where}.boundary_diameter[0]"),
                    parse_real(diam[1], f"{where}.boundary_diameter[1]"),
                ),
                dist_thick_to_max=parse_real(
                    _require(data, "dist_thick_to_max", where),
                    f"{where}.dist_thick_to_max",
                ),
                dist_thick_to_core=parse_real(
                    _require(data, "dist_thick_to_core", where),
                    f"{where}.dist_thick_to_core",
                ),
                provenance="declared",
                thin_empty=bool(data.get("thin_empty", False)),
            ),
        )
    raise InputError(f"{where}: unknown tube mode {mode!r}")


def _load_class_ref(
    value: Any, classes: Mapping[str, NamedClass], where: str
) -> CohomologyClass:
    if isinstance(value, str):
        if value not in classes:
            raise InputError(f"{where}: unknown class name {value!r}")
        return classes[value].cls
    if isinstance(value, Sequence):
        return CohomologyClass(tuple(_int(x, where) for x in value))
    raise InputError(f"{where}: expected a class name or coefficient list")


def load_manifold(source: Mapping | str | Path) -> ManifoldBundle:
    """Parse and validate a manifold bundle from a dict, path, or JSON text."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise InputError(f"cannot read bundle file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"bundle file is not valid JSON: {exc}") from None
    else:
        data = source
    if not isinstance(data, Mapping):
        raise InputError("bundle must be a JSON object")
    if data.get("schema") != SCHEMA:
        raise InputError(
            f"bundle schema must be {SCHEMA!r}, got {data.get('schema')!r}"
        )
    if data.get("kind") != "manifold":
        raise InputError(f"bundle kind must be 'manifold', got {data.get('kind')!r}")
    name = _require(data, "name", "bundle")
    if not isinstance(name, str) or not name:
        raise InputError("bundle.name must be a nonempty string")

    cusps_raw = _require(data, "cusps", "bundle")
    if not isinstance(cusps_raw, Sequence) or not cusps_raw:
        raise InputError("bundle.cusps must be a nonempty list")
    cusps = []
    for i, c in enumerate(cusps_raw):
        where = f"cusps[{i}]"
        mod = _require(c, "modulus", where)
        if not (isinstance(mod, Sequence) and len(mod) == 2):
            raise InputError(f"{where}.modulus must be a [re, im] pair")
        tau = complex(
            parse_real(mod[0], f"{where}.modulus[0]"),
            parse_real(mod[1], f"{where}.modulus[1]"),
        )
        area = parse_real(_require(c, "area", where), f"{where}.area")
        spec = CuspSpec(tau, area)
        spec.lattice  # validates modulus and area ranges
        cusps.append(spec)

    hom = _require(data, "homology", "bundle")
    rank = _int(_require(hom, "rank", "homology"), "homology.rank")
    inc_raw = _require(hom, "inclusions", "homology")
    if not isinstance(inc_raw, Sequence) or len(inc_raw) != len(cusps):
        raise InputError("homology.inclusions must list one entry per cusp")
    matrices = []
    for i, entry in enumerate(inc_raw):
        where = f"homology.inclusions[{i}]"
        mu = _require(entry, "mu", where)
        lam = _require(entry, "lambda", where)
        if len(mu) != rank or len(lam) != rank:
            raise InputError(f"{where}: image vectors must have length {rank}")
        matrices.append(tuple(
            (_int(m, where), _int(l, where)) for m, l in zip(mu, lam)
        ))
    inclusion = BoundaryInclusionMap(tuple(matrices))

    tubes_raw = _require(data, "tubes", "bundle")
    if not isinstance(tubes_raw, Sequence) or len(tubes_raw) != len(cusps):
        raise InputError("bundle.tubes must list one entry per cusp")
    tubes = tuple(_load_tube(t, f"tubes[{i}]") for i, t in enumerate(tubes_raw))

    deep_raw = _require(data, "deepness", "bundle")
    deepness = DeepnessParams(
        depth=parse_real(_require(deep_raw, "depth", "deepness"), "deepness.depth"),
        clearance=parse_real(
            _require(deep_raw, "clearance", "deepness"), "deepness.clearance"
        ),
        mu=parse_real(_require(deep_raw, "mu", "deepness"), "deepness.mu"),
        mu_below_margulis=deep_raw.get("mu_below_margulis"),
        mu_cap=(
            parse_real(deep_raw["mu_cap"], "deepness.mu_cap")
            if "mu_cap" in deep_raw
            else None
        ),
    )
    if deepness.mu_below_margulis is not None and not isinstance(
        deepness.mu_below_margulis, bool
    ):
        raise InputError("deepness.mu_below_margulis must be a boolean")

    const_raw = _require(data, "constants", "bundle")
    constants = AssumptionBundle(
        comparison_constant=parse_real(
            _require(const_raw, "comparison_constant", "constants"),
            "constants.comparison_constant",
        ),
        ell_threshold=parse_real(
            _require(const_raw, "ell_threshold", "constants"),
            "constants.ell_threshold",
        ),
    )

    classes: dict[str, NamedClass] = {}
    for i, entry in enumerate(data.get("classes", [])):
        where = f"classes[{i}]"
        cname = _require(entry, "name", where)
        coeffs = _require(entry, "coeffs", where)
        if len(coeffs) != rank:
            raise InputError(f"{where}: coeffs must have length {rank}")
        classes[cname] = NamedClass(
            CohomologyClass(tuple(_int(x, where) for x in coeffs)),
            parse_real(
                _require(entry, "thurston_norm", where), f"{where}.thurston_norm"
            ),
        )

    family = None
    if "family" in data:
        fam = data["family"]
        where = "family"
        n_range_raw = _require(fam, "n_range", where)
        family = FamilySpec(
            alpha=_load_class_ref(_require(fam, "alpha", where), classes, f"{where}.alpha"),
            beta=_load_class_ref(_require(fam, "beta", where), classes, f"{where}.beta"),
            a_curves=tuple(
                (_int(p, where), _int(q, where))
                for p, q in _require(fam, "a_curves", where)
            ),
            b_curves=tuple(
                (_int(p, where), _int(q, where))
                for p, q in _require(fam, "b_curves", where)
            ),
            alpha_norm=parse_real(
                _require(fam, "alpha_norm", where), f"{where}.alpha_norm"
            ),
            beta_norm=parse_real(
                _require(fam, "beta_norm", where), f"{where}.beta_norm"
            ),
            n_range=(
                _int(n_range_raw[0], where),
                _int(n_range_raw[1], where),
            ),
            symmetric_cusps=bool(fam.get("symmetric_cusps", False)),
        )

    provenance = data.get("provenance")
    if provenance is not None and not isinstance(provenance, Mapping):
        raise InputError("bundle.provenance must be an object")

    return ManifoldBundle(
        name=name,
        cusps=tuple(cusps),
        inclusion=inclusion,
        tubes=tubes,
        deepness=deepness,
        constants=constants,
        classes=classes,
        family=family,
        provenance=provenance,
    )


def parse_complete_slope(text: str, n_cusps: int) -> CompleteSlope:
    """Parse "p,q;p,q;..." into one slope per cusp."""
    parts = [p for p in text.split(";") if p.strip()]
    if len(parts) != n_cusps:
        raise InputError(
            f"slope spec {text!r} has {len(parts)} entries for {n_cusps} cusps"
        )
    out = []
    for part in parts:
        bits = part.split(",")
        if len(bits) != 2:
            raise InputError(f"slope entry {part!r} must be 'p,q'")
        try:
            p, q = int(bits[0]), int(bits[1])
        except ValueError:
            raise InputError(f"slope entry {part!r} must be integer 'p,q'") from None
        out.append(Slope(p, q))
    return tuple(out)


def verdict_to_dict(verdict: DeepnessVerdict) -> dict:
    return {
        "status": verdict.status,
        "doubled": verdict.doubled,
        "checks": [
            {
                "name": c.name,
                "tube": c.tube,
                "margin": [c.margin[0], c.margin[1]],
                "status": c.status,
            }
            for c in verdict.checks
        ],
    }


def report_to_dict(report: CertificationReport) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "certification-report",
        "filling": report.filling_id,
        "ell": report.ell,
        "window": (
            None if report.window is None else [report.window.lo, report.window.hi]
        ),
        "stable_lower": report.stable_lower,
        "stable_lower_source": report.stable_lower_source,
        "thick_upper": report.thick_upper,
        "criterion_margin": report.criterion_margin,
        "partial_margin": report.partial_margin,
        "deepness_full": verdict_to_dict(report.deepness_full),
        "deepness_partial": verdict_to_dict(report.deepness_partial),
        "verdict": report.verdict,
        "reasons": list(report.reasons),
        "assumptions": dict(report.assumptions),
    }


def family_table_to_dict(table: FamilyTable) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "family-table",
        "rows": [
            {"n": row.n, "report": report_to_dict(row.report)} for row in table.rows
        ],
        "skipped": [
            {"n": s.n, "gcd": s.gcd, "reason": s.reason} for s in table.skipped
        ],
        "threshold": {
            "value": table.threshold.threshold,
            "trailing_failure": table.threshold.trailing_failure,
            "rows": [
                {
                    "index": r.index,
                    "ell": r.ell,
                    "stable_lower": r.stable_lower,
                    "thick_upper": r.thick_upper,
                    "margin": r.margin,
                    "ok": r.ok,
                }
                for r in table.threshold.rows
            ],
        },
        "annotation": table.annotation,
    }
