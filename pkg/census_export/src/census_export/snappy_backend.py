"""Live census backend on top of SnapPy.

Import of snappy is deferred to construction so the rest of the package
works without it.  Conventions this adapter relies on:

  - cusp_info("shape") reports the SnapPea kernel cusp shape, the complex
    conjugate of (longitude translation) / (meridian translation).  Slope
    lengths are invariant under that conjugation, so the shape is exported
    as the bundle modulus unchanged.
  - dehn_fill((p, q)) kills p*meridian + q*longitude, matching the slope
    coordinates in the bundle schema.
  - the longitude of each link component is Seifert framed (zero linking
    with its own component), so in the meridian basis of first homology the
    longitude images are the rows of the linking matrix.

The meridian-basis model is validated against the census: the exterior's
first homology must be free of rank equal to the cusp count.
"""

from __future__ import annotations

from .backend import CuspData, FilledCores, Filling, ManifoldFacts
from .errors import (
    BackendUnavailableError,
    ExportError,
    FillingError,
    UnknownManifoldError,
)

GEOMETRIC = "all tetrahedra positively oriented"


class SnappyBackend:
    def __init__(self):
        try:
            import snappy
        except ImportError:
            raise BackendUnavailableError(
                "snappy is not installed; pass --backend DATASET.json to use "
                "a recorded dataset"
            ) from None
        self._snappy = snappy

    def describe(self) -> dict:
        return {"tool": "snappy", "version": str(self._snappy.__version__)}

    def _manifold(self, name: str):
        try:
            return self._snappy.Manifold(name)
        except (OSError, ValueError) as exc:
            raise UnknownManifoldError(
                f"census has no manifold named {name!r}: {exc}"
            ) from None

    def facts(self, name: str) -> ManifoldFacts:
        m = self._manifold(name)
        solution = str(m.solution_type())
        if solution != GEOMETRIC:
            raise ExportError(
                f"{name!r} has no geometric solution ({solution}); "
                "cannot export cusp shapes"
            )
        divisors = list(m.homology().elementary_divisors())
        if divisors != [0] * m.num_cusps():
            raise ExportError(
                f"{name!r}: first homology is not free on the meridians "
                f"(elementary divisors {divisors}); not a link exterior "
                "this exporter can model"
            )
        shapes = [complex(z) for z in m.cusp_info("shape")]
        areas = [float(a) for a in m.cusp_areas(policy="unbiased")]
        try:
            linking = self._snappy.Link(name).linking_matrix()
        except Exception as exc:
            raise ExportError(
                f"cannot recover a link diagram for {name!r} "
                f"(needed for the linking matrix): {exc}"
            ) from None
        return ManifoldFacts(
            name=name,
            cusps=tuple(
                CuspData(shape=z, area=a) for z, a in zip(shapes, areas)
            ),
            linking_matrix=tuple(tuple(int(x) for x in row) for row in linking),
            solution_type=solution,
        )

    def filled_cores(self, name: str, slopes: Filling) -> FilledCores:
        m = self._manifold(name)
        if len(slopes) != m.num_cusps():
            raise ExportError(
                f"filling has {len(slopes)} slopes for {m.num_cusps()} cusps"
            )
        m.dehn_fill(list(slopes))
        solution = str(m.solution_type())
        if solution != GEOMETRIC:
            raise FillingError(f"non-geometric solution: {solution}")
        cores = [complex(z) for z in m.cusp_info("core_length")]
        return FilledCores(
            slopes=slopes,
            core_lengths=tuple(cores),
            solution_type=solution,
        )
