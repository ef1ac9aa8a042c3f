"""Census backends: where manifold facts come from.

Two implementations share one duck-typed interface:

  SnappyBackend    queries a live SnapPy installation (census databases,
                   hyperbolic structures, filled core geodesics).
  RecordedBackend  replays a dataset file previously written by the
                   ``record`` subcommand, so exports and tests run without
                   SnapPy installed.

A backend answers three things: ``describe()`` (a provenance fragment),
``facts(name)`` (cusp shapes, areas, linking matrix of the unfilled
exterior), and ``filled_cores(name, slopes)`` (complex core geodesic
lengths of one filling).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .errors import ExportError, FillingError, UnknownManifoldError

DATASET_SCHEMA = "census-export-recorded-v1"

Filling = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class CuspData:
    shape: complex
    area: float


@dataclass(frozen=True)
class ManifoldFacts:
    """Unfilled exterior as reported by the census.

    Per-cusp shape and area, integer linking matrix of the link components,
    and the shape solution type (exports refuse anything but a geometric
    solution).
    """

    name: str
    cusps: tuple[CuspData, ...]
    linking_matrix: tuple[tuple[int, ...], ...]
    solution_type: str

    @property
    def n_cusps(self) -> int:
        return len(self.cusps)


@dataclass(frozen=True)
class FilledCores:
    slopes: Filling
    core_lengths: tuple[complex, ...]
    solution_type: str


def filling_key(slopes: Filling) -> str:
    return ";".join(f"{p},{q}" for p, q in slopes)


def _parse_float(value: Any, where: str) -> float:
    # datasets written by `record` store reals as decimal strings; hand-built
    # ones may use plain JSON numbers
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ExportError(f"{where}: expected a real number")
    try:
        return float(value)
    except ValueError:
        raise ExportError(f"{where}: cannot parse real number {value!r}") from None


def _parse_pair(value: Any, where: str) -> complex:
    if not (isinstance(value, list) and len(value) == 2):
        raise ExportError(f"{where}: expected a [re, im] pair")
    return complex(_parse_float(value[0], where), _parse_float(value[1], where))


class RecordedBackend:
    """Replays a recorded dataset file.

    Missing manifolds and missing fillings raise; a recorded per-filling
    "error" entry re-raises the recorded message, so replays fail the same
    way the original session did.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        try:
            data = json.loads(self.path.read_text())
        except OSError as exc:
            raise ExportError(f"cannot read dataset file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ExportError(f"dataset file is not valid JSON: {exc}") from None
        if not isinstance(data, Mapping) or data.get("schema") != DATASET_SCHEMA:
            raise ExportError(
                f"dataset schema must be {DATASET_SCHEMA!r}, "
                f"got {data.get('schema') if isinstance(data, Mapping) else data!r}"
            )
        self.source = dict(data.get("source", {}))
        self._manifolds = data.get("manifolds", {})

    def describe(self) -> dict:
        return {"tool": "recorded", "path": str(self.path), "source": self.source}

    def _entry(self, name: str) -> Mapping:
        if name not in self._manifolds:
            raise UnknownManifoldError(f"dataset has no manifold named {name!r}")
        return self._manifolds[name]

    def facts(self, name: str) -> ManifoldFacts:
        entry = self._entry(name)
        where = f"manifolds[{name!r}]"
        cusps = tuple(
            CuspData(
                shape=_parse_pair(c.get("shape"), f"{where}.cusps[{i}].shape"),
                area=_parse_float(c.get("area"), f"{where}.cusps[{i}].area"),
            )
            for i, c in enumerate(entry.get("cusps", []))
        )
        if not cusps:
            raise ExportError(f"{where}: no cusp records")
        linking = tuple(
            tuple(int(x) for x in row) for row in entry.get("linking_matrix", [])
        )
        if len(linking) != len(cusps) or any(len(r) != len(cusps) for r in linking):
            raise ExportError(f"{where}: linking matrix must be cusps x cusps")
        return ManifoldFacts(
            name=name,
            cusps=cusps,
            linking_matrix=linking,
            solution_type=str(entry.get("solution_type", "")),
        )

    def filled_cores(self, name: str, slopes: Filling) -> FilledCores:
        entry = self._entry(name)
        key = filling_key(slopes)
        fillings = entry.get("fillings", {})
        if key not in fillings:
            raise FillingError(f"filling {key!r} is not recorded for {name!r}")
        rec = fillings[key]
        if "error" in rec:
            raise FillingError(str(rec["error"]))
        where = f"manifolds[{name!r}].fillings[{key!r}]"
        cores = tuple(
            _parse_pair(v, f"{where}.core_lengths[{i}]")
            for i, v in enumerate(rec.get("core_lengths", []))
        )
        if len(cores) != len(slopes):
            raise ExportError(f"{where}: expected one core length per cusp")
        return FilledCores(
            slopes=slopes,
            core_lengths=cores,
            solution_type=str(rec.get("solution_type", "")),
        )


def synthetic_dataset_path() -> Path:
    """Bundled hand-built dataset, clearly labeled synthetic in its source block.

    Exercises every code path without a census; never a substitute for real
    census data.
    """
    return Path(resources.files("census_export").joinpath("data/synthetic-w2.json"))


def resolve_backend(spec: str):
    """Backend from a CLI spec.

    "snappy" means the live census; anything else is read as a recorded
    dataset path.
    """
    if spec == "snappy":
        from .snappy_backend import SnappyBackend

        return SnappyBackend()
    return RecordedBackend(spec)
