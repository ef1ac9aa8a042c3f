"""Build manifold bundle files from census answers.

The output follows the bundle file contract of the certification tool
(schema "lamcert-v1", kind "manifold"): reals serialized as decimal
strings, keys sorted, two-space indent, trailing newline.  That file format
is the only coupling between the two tools.

Cusp shapes, areas and the linking matrix come from the backend.  Tube,
deepness and comparison-constant data are declared by hand (ConeData); the
exporter computes none of it.  Core geodesic lengths of requested fillings
are recorded in the provenance block, one entry per filling, with failures
(non-geometric solutions, unrecorded fillings) reported per entry instead
of aborting the export.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from . import __version__
from .backend import DATASET_SCHEMA, Filling, ManifoldFacts, filling_key
from .errors import ExportError, FillingError

BUNDLE_SCHEMA = "lamcert-v1"

LOG4 = math.log(4.0)


def fmt_real(x: float) -> str:
    return repr(float(x))


def jsonable(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return fmt_real(obj)
    if isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    raise ExportError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(data: Any) -> str:
    return json.dumps(jsonable(data), sort_keys=True, indent=2) + "\n"


def _validate_slope(p: int, q: int) -> tuple[int, int]:
    for x in (p, q):
        if isinstance(x, bool) or not isinstance(x, int):
            raise ExportError("filling slope coordinates must be integers")
    if p == 0 and q == 0:
        raise ExportError("filling slope must be nonzero")
    if math.gcd(abs(p), abs(q)) != 1:
        raise ExportError(f"filling slope ({p}, {q}) is not primitive")
    return (p, q)


def parse_filling(text: str) -> Filling:
    """Parse "p,q;p,q;..." into one primitive slope per cusp."""
    parts = [p for p in text.split(";") if p.strip()]
    if not parts:
        raise ExportError(f"empty filling spec {text!r}")
    out = []
    for part in parts:
        bits = part.split(",")
        if len(bits) != 2:
            raise ExportError(f"filling entry {part.strip()!r} must be 'p,q'")
        try:
            p, q = int(bits[0]), int(bits[1])
        except ValueError:
            raise ExportError(
                f"filling entry {part.strip()!r} must be integer 'p,q'"
            ) from None
        out.append(_validate_slope(p, q))
    return tuple(out)


@dataclass(frozen=True)
class ExportRequest:
    name: str
    fillings: tuple[Filling, ...] = ()
    out: Path | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.name, str) or not self.name:
            raise ExportError("census name must be a nonempty string")
        for filling in self.fillings:
            for p, q in filling:
                _validate_slope(p, q)


@dataclass(frozen=True)
class ConeData:
    """Manually declared tube, deepness and constant data, copied verbatim.

    The defaults are neutral placeholders; a consumer certifying against
    the bundle is expected to override them with values it can actually
    stand behind.
    """

    depth: float = 2.0 * LOG4
    clearance: float = LOG4
    mu: float = 0.1
    comparison_constant: float = 1.0
    ell_threshold: float = 7.823
    twist: float | None = None  # None -> the bundle's "golden" default
    tube_radius: float | None = None  # None -> meyerhoff radius policy


def _check_request(request: ExportRequest, facts: ManifoldFacts) -> None:
    for filling in request.fillings:
        if len(filling) != facts.n_cusps:
            raise ExportError(
                f"filling {filling_key(filling)!r} has {len(filling)} slopes "
                f"for {facts.n_cusps} cusps"
            )


def _check_linking(facts: ManifoldFacts) -> None:
    m = facts.linking_matrix
    n = facts.n_cusps
    if len(m) != n or any(len(row) != n for row in m):
        raise ExportError("linking matrix must be cusps x cusps")
    for i in range(n):
        if m[i][i] != 0:
            raise ExportError("linking matrix must have zero diagonal")
        for j in range(i):
            if m[i][j] != m[j][i]:
                raise ExportError("linking matrix must be symmetric")


def _sample_fillings(
    request: ExportRequest, backend
) -> tuple[list[dict], list[str]]:
    entries: list[dict] = []
    warnings: list[str] = []
    for filling in request.fillings:
        key = filling_key(filling)
        entry: dict[str, Any] = {"slopes": [[p, q] for p, q in filling]}
        try:
            cores = backend.filled_cores(request.name, filling)
            entry["core_lengths"] = [
                [z.real, z.imag] for z in cores.core_lengths
            ]
            entry["solution_type"] = cores.solution_type
        except FillingError as exc:
            entry["error"] = str(exc)
            warnings.append(f"filling {key}: {exc}")
        entries.append(entry)
    return entries, warnings


def build_bundle(
    facts: ManifoldFacts,
    cone: ConeData,
    filling_entries: list[dict],
    backend_desc: Mapping,
) -> dict:
    """Assemble the bundle dict; floats stay floats until serialization."""
    _check_linking(facts)
    n = facts.n_cusps
    inclusions = []
    for i in range(n):
        # meridian basis of first homology: meridian i is the i-th unit
        # vector, the Seifert-framed longitude maps to its linking row
        inclusions.append({
            "mu": [1 if j == i else 0 for j in range(n)],
            "lambda": list(facts.linking_matrix[i]),
        })
    tube: dict[str, Any] = {
        "mode": "derive-from-nz",
        "twist": "golden" if cone.twist is None else cone.twist,
        "radius_policy": (
            "meyerhoff" if cone.tube_radius is None
            else {"fixed": cone.tube_radius}
        ),
    }
    return {
        "schema": BUNDLE_SCHEMA,
        "kind": "manifold",
        "name": facts.name,
        "cusps": [
            {"modulus": [c.shape.real, c.shape.imag], "area": c.area}
            for c in facts.cusps
        ],
        "homology": {"rank": n, "inclusions": inclusions},
        "tubes": [dict(tube) for _ in range(n)],
        "deepness": {
            "depth": cone.depth,
            "clearance": cone.clearance,
            "mu": cone.mu,
        },
        "constants": {
            "comparison_constant": cone.comparison_constant,
            "ell_threshold": cone.ell_threshold,
        },
        "provenance": {
            "exporter": {"tool": "census-export", "version": __version__},
            "backend": dict(backend_desc),
            "census_name": facts.name,
            "solution_type": facts.solution_type,
            "peripheral_basis": {
                "convention": (
                    "(mu, lambda) = census meridian and Seifert-framed "
                    "longitude of each component; filling (p, q) kills "
                    "p*mu + q*lambda"
                ),
                "modulus": (
                    "kernel cusp shape, the complex conjugate of the "
                    "longitude/meridian translation ratio; slope lengths "
                    "are invariant under the conjugation"
                ),
            },
            "homology_basis": (
                "meridians; longitude images are linking matrix rows"
            ),
            "cone_data": "manual; not computed from the census",
            "fillings": filling_entries,
        },
    }


def export(
    request: ExportRequest, backend, cone: ConeData = ConeData()
) -> tuple[dict, list[str]]:
    """Query the backend, build the bundle, optionally write it.

    Returns the bundle dict plus one warning string per filling that could
    not be sampled.
    """
    facts = backend.facts(request.name)
    _check_request(request, facts)
    entries, warnings = _sample_fillings(request, backend)
    bundle = build_bundle(facts, cone, entries, backend.describe())
    if request.out is not None:
        request.out.write_text(dumps_canonical(bundle))
    return bundle, warnings


def record_dataset(request: ExportRequest, backend) -> tuple[dict, list[str]]:
    """Freeze the backend's answers in the recorded-dataset format.

    Later exports and tests can then replay them without the census.
    """
    facts = backend.facts(request.name)
    _check_request(request, facts)
    _check_linking(facts)
    fillings: dict[str, dict] = {}
    warnings: list[str] = []
    for filling in request.fillings:
        key = filling_key(filling)
        try:
            cores = backend.filled_cores(request.name, filling)
            fillings[key] = {
                "core_lengths": [[z.real, z.imag] for z in cores.core_lengths],
                "solution_type": cores.solution_type,
            }
        except FillingError as exc:
            fillings[key] = {"error": str(exc)}
            warnings.append(f"filling {key}: {exc}")
    dataset = {
        "schema": DATASET_SCHEMA,
        "source": {"recorded_with": backend.describe()},
        "manifolds": {
            facts.name: {
                "cusps": [
                    {"shape": [c.shape.real, c.shape.imag], "area": c.area}
                    for c in facts.cusps
                ],
                "linking_matrix": [list(row) for row in facts.linking_matrix],
                "solution_type": facts.solution_type,
                "fillings": fillings,
            }
        },
    }
    if request.out is not None:
        request.out.write_text(dumps_canonical(dataset))
    return dataset, warnings
