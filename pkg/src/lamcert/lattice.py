"""Flat torus lattices, slopes, and their length functionals.

A cusp cross-section is a flat torus R^2 / Lambda.  We carry the lattice as
an ordered basis (first vector = meridian direction, second = longitude) so
that integer slope coordinates (p, q) always refer to p*v1 + q*v2.  All
geometric quantities (lengths, normalized lengths, covering radii) are basis
independent; the basis order only fixes coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

Vec2 = tuple[float, float]

# Relative determinant floor below which a basis is treated as degenerate.
_DEGENERACY_RTOL = 1e-12


def _norm(v: Vec2) -> float:
    return math.hypot(v[0], v[1])


def _dot(u: Vec2, v: Vec2) -> float:
    return u[0] * v[0] + u[1] * v[1]


@dataclass(frozen=True)
class FlatTorusLattice:
    """Rank-2 lattice in the euclidean plane, given by an ordered basis."""

    v1: Vec2
    v2: Vec2

    def __post_init__(self) -> None:
        for name, v in (("v1", self.v1), ("v2", self.v2)):
            if len(v) != 2 or not all(math.isfinite(x) for x in v):
                raise InputError(f"lattice basis vector {name} must be a finite 2-vector")
        det = self.v1[0] * self.v2[1] - self.v1[1] * self.v2[0]
        scale = _norm(self.v1) * _norm(self.v2)
        if scale == 0.0 or abs(det) <= _DEGENERACY_RTOL * scale:
            raise InputError("lattice basis is degenerate (zero or near-parallel vectors)")

    @property
    def det(self) -> float:
        return self.v1[0] * self.v2[1] - self.v1[1] * self.v2[0]

    @property
    def area(self) -> float:
        """Area of the fundamental torus."""
        return abs(self.det)

    def vector(self, p: int, q: int) -> Vec2:
        return (p * self.v1[0] + q * self.v2[0], p * self.v1[1] + q * self.v2[1])

    @classmethod
    def from_modulus(cls, tau: complex, area: float) -> "FlatTorusLattice":
        """Build the unique basis with v1 along the positive x-axis realizing
        modulus tau = v2/v1 (as complex numbers) and the given torus area."""
        if not (math.isfinite(area) and area > 0.0):
            raise InputError("cusp area must be a positive finite real")
        if not (math.isfinite(tau.real) and math.isfinite(tau.imag)) or tau.imag <= 0.0:
            raise InputError("cusp modulus must have positive imaginary part")
        s = math.sqrt(area / tau.imag)
        return cls((s, 0.0), (s * tau.real, s * tau.imag))


@dataclass(frozen=True)
class Slope:
    """Primitive integer homology class on one cusp torus."""

    p: int
    q: int

    def __post_init__(self) -> None:
        if not (isinstance(self.p, int) and isinstance(self.q, int)):
            raise InputError("slope coordinates must be integers")
        if self.p == 0 and self.q == 0:
            raise InputError("slope must be nonzero")
        if math.gcd(abs(self.p), abs(self.q)) != 1:
            raise InputError(f"slope ({self.p}, {self.q}) is not primitive")


# One slope per cusp, in cusp order.
CompleteSlope = tuple[Slope, ...]


def complete_slope(pairs: Iterable[tuple[int, int]]) -> CompleteSlope:
    return tuple(Slope(p, q) for p, q in pairs)


def slope_length(lattice: FlatTorusLattice, slope: Slope) -> float:
    """Euclidean length of the geodesic representative of the slope."""
    return _norm(lattice.vector(slope.p, slope.q))


def normalized_length(lattice: FlatTorusLattice, slope: Slope) -> float:
    """Length divided by the square root of the torus area (scale invariant)."""
    return slope_length(lattice, slope) / math.sqrt(lattice.area)


def total_normalized_length(
    lattices: Sequence[FlatTorusLattice], slopes: CompleteSlope
) -> float:
    """Harmonic-type combination (sum of ell_i^-2)^(-1/2) over all cusps.

    Always at most the smallest single normalized length; equal to it for one
    cusp.
    """
    if len(lattices) == 0:
        raise InputError("total normalized length needs at least one cusp")
    if len(lattices) != len(slopes):
        raise InputError(
            f"cusp count mismatch: {len(lattices)} lattices, {len(slopes)} slopes"
        )
    acc = 0.0
    for lat, s in zip(lattices, slopes):
        ell = normalized_length(lat, s)
        acc += 1.0 / (ell * ell)
    return 1.0 / math.sqrt(acc)


def lagrange_reduce(lattice: FlatTorusLattice) -> tuple[Vec2, Vec2, tuple[tuple[int, int], tuple[int, int]]]:
    """Lagrange-reduced basis (u shortest, |dot(u,w)| <= |u|^2 / 2) plus the
    integer transform T with rows expressing (u, w) in the original basis."""
    u, w = lattice.v1, lattice.v2
    # rows of T: coordinates of u, w in terms of (v1, v2)
    tu, tw = (1, 0), (0, 1)
    for _ in range(64):
        if _norm(u) > _norm(w):
            u, w = w, u
            tu, tw = tw, tu
        m = round(_dot(u, w) / _dot(u, u))
        if m == 0:
            break
        w = (w[0] - m * u[0], w[1] - m * u[1])
        tw = (tw[0] - m * tu[0], tw[1] - m * tu[1])
    else:  # pragma: no cover - loop converges in O(log) steps
        raise InputError("lattice reduction failed to converge")
    return u, w, (tu, tw)


def shortest_vector(lattice: FlatTorusLattice) -> tuple[Slope, float]:
    """Shortest nonzero lattice vector as a primitive slope plus its length.

    Among all minimal-length vectors (ties at relative tolerance 1e-12) the
    lexicographically greatest coordinate pair (p, q) is returned, so the
    result is deterministic and its negative is never preferred.
    """
    u, w, (tu, tw) = lagrange_reduce(lattice)
    best: list[tuple[int, int]] = []
    best_len = math.inf
    for a in range(-2, 3):
        for b in range(-2, 3):
            if a == 0 and b == 0:
                continue
            length = _norm((a * u[0] + b * w[0], a * u[1] + b * w[1]))
            if length < best_len * (1.0 - 1e-12):
                best = [(a, b)]
                best_len = length
            elif length <= best_len * (1.0 + 1e-12):
                best.append((a, b))
                best_len = min(best_len, length)
    candidates = []
    for a, b in best:
        p = a * tu[0] + b * tw[0]
        q = a * tu[1] + b * tw[1]
        g = math.gcd(abs(p), abs(q))
        # a shortest vector is automatically primitive; g > 1 would mean a
        # strictly shorter multiple exists, contradicting minimality
        if g != 1:  # pragma: no cover
            raise InputError("internal: shortest vector not primitive")
        candidates.append((p, q))
    p, q = max(candidates)
    return Slope(p, q), _norm(lattice.vector(p, q))


@dataclass(frozen=True)
class CoveringRadiusInterval:
    """Certified enclosure of the covering radius (max distance to the lattice)."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.lo <= self.hi):
            raise InputError("covering radius interval must satisfy 0 <= lo <= hi")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def __contains__(self, value: float) -> bool:
        return self.lo <= value <= self.hi


def covering_radius(
    lattice: FlatTorusLattice, tol: float = 1e-9, method: str = "voronoi"
) -> CoveringRadiusInterval:
    """Covering radius of the lattice, enclosed to within tol.

    method "voronoi": exact circumradius of the Delaunay triangle of a reduced
    obtuse basis, |u| |w| |u+w| / (2 area); rounding error is far below any
    reasonable tol, so the returned interval is [value - tol, value + tol].
    method "grid": dense sampling of the fundamental domain, slower, used for
    cross-checks.
    """
    if not (math.isfinite(tol) and tol > 0.0):
        raise InputError("tol must be a positive finite real")
    if method == "voronoi":
        u, w, _ = lagrange_reduce(lattice)
        if _dot(u, w) > 0.0:
            w = (-w[0], -w[1])
        # (u, w, -(u+w)) is an obtuse superbase: the Delaunay triangle
        # (0, u, u+w) is non-obtuse, so its circumradius is the covering radius
        s = (u[0] + w[0], u[1] + w[1])
        value = _norm(u) * _norm(w) * _norm(s) / (2.0 * lattice.area)
        return CoveringRadiusInterval(max(value - tol, 0.0), value + tol)
    if method == "grid":
        value = _covering_radius_grid(lattice, tol)
        return CoveringRadiusInterval(max(value - tol, 0.0), value + tol)
    raise InputError(f"unknown covering radius method {method!r}")


def _covering_radius_grid(lattice: FlatTorusLattice, tol: float) -> float:
    """Max-over-grid estimate with sampling error folded into tol.

    Samples the fundamental parallelogram of the reduced basis; each sample's
    distance to the lattice is exact (min over the 9 nearest translates), and
    the sampling gap is bounded by the sample cell's circumradius, so the grid
    is refined until that bound is below tol/2 and the estimate is returned
    with the bound added.
    """
    u, w, _ = lagrange_reduce(lattice)
    if _dot(u, w) > 0.0:
        w = (-w[0], -w[1])
    s = (u[0] + w[0], u[1] + w[1])
    circ = _norm(u) * _norm(w) * _norm(s) / (2.0 * lattice.area)
    n = max(8, int(math.ceil(2.0 * circ / tol)))
    ts = (np.arange(n) + 0.5) / n
    uu = np.asarray(u)
    ww = np.asarray(w)
    pts = ts[:, None, None] * uu[None, None, :] + ts[None, :, None] * ww[None, None, :]
    pts = pts.reshape(-1, 2)
    d2 = np.full(pts.shape[0], np.inf)
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            off = pts - (i * uu + j * ww)
            d2 = np.minimum(d2, np.einsum("ij,ij->i", off, off))
    return float(np.sqrt(d2.max())) + circ / n
