"""Integer homology bookkeeping for the cusped manifold.

First homology of the ambient manifold is taken with a fixed free basis of
rank b (torsion plays no role in any functional we evaluate, so classes are
plain integer covectors of length b).  Each cusp torus maps in by an integer
matrix whose two columns are the images of that cusp's meridian and
longitude.  Everything here is exact integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import InputError
from .lattice import CompleteSlope, Slope

IntMatrix = tuple[tuple[int, ...], ...]


def _as_int_matrix(rows: Sequence[Sequence[int]], what: str) -> IntMatrix:
    out = []
    width = None
    for r in rows:
        rr = tuple(r)
        if width is None:
            width = len(rr)
        elif len(rr) != width:
            raise InputError(f"{what}: ragged rows")
        for x in rr:
            if not isinstance(x, int) or isinstance(x, bool):
                raise InputError(f"{what}: entries must be integers")
        out.append(rr)
    return tuple(out)


@dataclass(frozen=True)
class CohomologyClass:
    """Integer covector on the rank-b free part of first homology."""

    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.coeffs) == 0:
            raise InputError("cohomology class needs at least one coefficient")
        for c in self.coeffs:
            if not isinstance(c, int) or isinstance(c, bool):
                raise InputError("cohomology class coefficients must be integers")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def rank(self) -> int:
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __add__(self, other: "CohomologyClass") -> "CohomologyClass":
        if self.rank != other.rank:
            raise InputError("cannot add classes of different rank")
        return CohomologyClass(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "CohomologyClass":
        return CohomologyClass(tuple(-a for a in self.coeffs))

    def scaled(self, k: int) -> "CohomologyClass":
        if not isinstance(k, int) or isinstance(k, bool):
            raise InputError("scale factor must be an integer")
        return CohomologyClass(tuple(k * a for a in self.coeffs))


@dataclass(frozen=True)
class BoundaryInclusionMap:
    """Images of each cusp's (meridian, longitude) in the rank-b homology basis.

    Per cusp a b x 2 integer matrix: column 0 is the meridian image, column 1
    the longitude image.
    """

    matrices: tuple[IntMatrix, ...]

    def __post_init__(self) -> None:
        if len(self.matrices) == 0:
            raise InputError("inclusion map needs at least one cusp")
        mats = tuple(_as_int_matrix(m, f"cusp {i} inclusion") for i, m in enumerate(self.matrices))
        rank = len(mats[0])
        for i, m in enumerate(mats):
            if len(m) != rank:
                raise InputError(
                    f"cusp {i} inclusion has {len(m)} rows, expected {rank}"
                )
            if rank == 0:
                raise InputError("inclusion matrices must have at least one row")
            for r in m:
                if len(r) != 2:
                    raise InputError(
                        f"cusp {i} inclusion must have exactly two columns (meridian, longitude)"
                    )
        object.__setattr__(self, "matrices", mats)

    @property
    def cusps(self) -> int:
        return len(self.matrices)

    @property
    def rank(self) -> int:
        return len(self.matrices[0])

    def image(self, cusp: int, p: int, q: int) -> tuple[int, ...]:
        """Image of p*meridian + q*longitude of the given cusp."""
        m = self._matrix(cusp)
        return tuple(row[0] * p + row[1] * q for row in m)

    def _matrix(self, cusp: int) -> IntMatrix:
        if not (0 <= cusp < self.cusps):
            raise InputError(f"cusp index {cusp} out of range [0, {self.cusps})")
        return self.matrices[cusp]


def evaluate(
    cls: CohomologyClass, inc: BoundaryInclusionMap, cusp: int, curve: tuple[int, int]
) -> int:
    """Pair the class with p*meridian + q*longitude pushed into the manifold."""
    if cls.rank != inc.rank:
        raise InputError(
            f"class rank {cls.rank} does not match inclusion rank {inc.rank}"
        )
    p, q = curve
    img = inc.image(cusp, p, q)
    return sum(c * x for c, x in zip(cls.coeffs, img))


def is_compatible(
    cls: CohomologyClass, inc: BoundaryInclusionMap, slopes: CompleteSlope
) -> bool:
    """True when the class annihilates every filling slope, i.e. survives filling."""
    if len(slopes) != inc.cusps:
        raise InputError(
            f"complete slope has {len(slopes)} entries for {inc.cusps} cusps"
        )
    return all(
        evaluate(cls, inc, i, (s.p, s.q)) == 0 for i, s in enumerate(slopes)
    )


@dataclass(frozen=True)
class BoundarySlopeRecord:
    """Restriction of a class to one cusp, as a slope-coordinate pair.

    The pair (x, y) satisfies x*q - y*p = evaluate(cls, inc, cusp, (p, q)) for
    every curve (p, q); it need not be primitive or nonzero.
    """

    pair: tuple[int, int]
    gcd: int
    primitive: bool

    @property
    def is_zero(self) -> bool:
        return self.pair == (0, 0)


def boundary_slope_of_class(
    cls: CohomologyClass, inc: BoundaryInclusionMap
) -> tuple[BoundarySlopeRecord, ...]:
    """Per-cusp boundary pairs (rho(longitude), -rho(meridian))."""
    out = []
    for i in range(inc.cusps):
        x = evaluate(cls, inc, i, (0, 1))
        y = -evaluate(cls, inc, i, (1, 0))
        g = math.gcd(abs(x), abs(y))
        out.append(BoundarySlopeRecord((x, y), g, g == 1))
    return tuple(out)


@dataclass(frozen=True)
class SurgeryClassDatum:
    """A class together with its derived boundary data and norm.

    kind is "zero-surgery" when every boundary restriction is a primitive
    nonzero slope (the class is dual to a fibered-like family of slopes), and
    "general" otherwise.
    """

    cls: CohomologyClass
    thurston_norm: float
    boundary: tuple[BoundarySlopeRecord, ...] = field(default=())
    kind: str = "general"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.thurston_norm) and self.thurston_norm >= 0.0):
            raise InputError("thurston norm must be a nonnegative finite real")
        if self.kind not in ("zero-surgery", "general"):
            raise InputError(f"unknown surgery class kind {self.kind!r}")
        if self.kind == "zero-surgery" and not all(
            r.primitive and not r.is_zero for r in self.boundary
        ):
            raise InputError(
                "zero-surgery datum requires primitive nonzero boundary on every cusp"
            )

    @classmethod
    def from_class(
        cls_, cls: CohomologyClass, inc: BoundaryInclusionMap, thurston_norm: float
    ) -> "SurgeryClassDatum":
        boundary = boundary_slope_of_class(cls, inc)
        zero_surgery = all(r.primitive and not r.is_zero for r in boundary)
        return cls_(
            cls=cls,
            thurston_norm=thurston_norm,
            boundary=boundary,
            kind="zero-surgery" if zero_surgery else "general",
        )


def pairing_with_cores(datum: SurgeryClassDatum) -> int:
    """Total pairing of a zero-surgery class with the filled core curves.

    For a zero-surgery class each core pairs to +-1 with the class after
    filling along the dual slope, so the total is the cusp count.
    """
    if datum.kind != "zero-surgery":
        raise InputError(
            "pairing with cores is only defined for zero-surgery classes"
        )
    return len(datum.boundary)


def boundary_pairing(record: BoundarySlopeRecord, curve: tuple[int, int]) -> int:
    """Intersection-number pairing <(x, y), (p, q)> = x q - y p."""
    x, y = record.pair
    p, q = curve
    return x * q - y * p


def smith_normal_form(
    m: Sequence[Sequence[int]],
) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form over Z: returns (U, D, V) with U m V = D.

    U and V are unimodular; D is diagonal with nonnegative entries each
    dividing the next.  Exact integer arithmetic throughout.
    """
    a = [list(map(int, row)) for row in _as_int_matrix(m, "smith normal form input")]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    if rows == 0 or cols == 0:
        raise InputError("smith normal form needs a nonempty matrix")
    u = [[int(i == j) for j in range(rows)] for i in range(rows)]
    v = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def row_op(i: int, j: int, k: int) -> None:
        # row_i += k * row_j, on a and u
        for t in range(cols):
            a[i][t] += k * a[j][t]
        for t in range(rows):
            u[i][t] += k * u[j][t]

    def col_op(i: int, j: int, k: int) -> None:
        # col_i += k * col_j, on a and v
        for t in range(rows):
            a[t][i] += k * a[t][j]
        for t in range(cols):
            v[t][i] += k * v[t][j]

    def row_swap(i: int, j: int) -> None:
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def col_swap(i: int, j: int) -> None:
        for t in range(rows):
            a[t][i], a[t][j] = a[t][j], a[t][i]
        for t in range(cols):
            v[t][i], v[t][j] = v[t][j], v[t][i]

    def row_negate(i: int) -> None:
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    for k in range(min(rows, cols)):
        while True:
            pivot = None
            best = None
            for i in range(k, rows):
                for j in range(k, cols):
                    x = a[i][j]
                    if x != 0 and (best is None or abs(x) < best):
                        best = abs(x)
                        pivot = (i, j)
            if pivot is None:
                break
            pi, pj = pivot
            row_swap(k, pi)
            col_swap(k, pj)
            dirty = False
            for i in range(k + 1, rows):
                if a[i][k] != 0:
                    quot = a[i][k] // a[k][k]
                    row_op(i, k, -quot)
                    if a[i][k] != 0:
                        dirty = True
            for j in range(k + 1, cols):
                if a[k][j] != 0:
                    quot = a[k][j] // a[k][k]
                    col_op(j, k, -quot)
                    if a[k][j] != 0:
                        dirty = True
            if dirty:
                continue
            # pivot must divide every remaining entry for the divisibility chain
            stray = None
            for i in range(k + 1, rows):
                for j in range(k + 1, cols):
                    if a[i][j] % a[k][k] != 0:
                        stray = i
                        break
                if stray is not None:
                    break
            if stray is None:
                break
            row_op(k, stray, 1)
        if k < min(rows, cols) and a[k][k] < 0:
            row_negate(k)

    return (
        tuple(tuple(r) for r in u),
        tuple(tuple(r) for r in a),
        tuple(tuple(r) for r in v),
    )
