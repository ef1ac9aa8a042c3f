"""Solid tube model: Fermi coordinates, boundary lattices, projections,
length quadrature, thin interfaces, and deepness certificates.

Coordinates (r, theta, z) around the core geodesic carry the metric

    dr^2 + sinh(r)^2 dtheta^2 + cosh(r)^2 dz^2

with identifications theta ~ theta + 2 pi and (theta, z) ~ (theta + twist,
z + core_length).  Paths are coordinate-linear polylines in the universal
cover of the (theta, z) directions; their lengths are computed by adaptive
Gauss-Legendre quadrature to a relative tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import HypothesisError, InputError
from .lattice import CoveringRadiusInterval, FlatTorusLattice, covering_radius

TWO_PI = 2.0 * math.pi
LOG4 = math.log(4.0)

# Normalized-length window constants for filled core lengths: for total
# normalized slope length ell > ELL_MIN the core length multiplied by the
# number of cusps lies strictly between 2 pi / (ell^2 + WINDOW_LO_SHIFT) and
# 2 pi / (ell^2 - WINDOW_HI_SHIFT).
ELL_MIN = 7.823
WINDOW_LO_SHIFT = 16.17
WINDOW_HI_SHIFT = 28.78


@dataclass(frozen=True)
class TubeShape:
    """Embedded tube around a closed geodesic core.

    core_length: translation length of the core (epsilon), > 0.
    twist: rotation angle of the core holonomy, stored modulo 2 pi.
    radius: embedding radius of the tube, > 0.
    """

    core_length: float
    twist: float
    radius: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.core_length) and self.core_length > 0.0):
            raise InputError("tube core length must be a positive finite real")
        if not math.isfinite(self.twist):
            raise InputError("tube twist must be finite")
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise InputError("tube radius must be a positive finite real")
        object.__setattr__(self, "twist", self.twist % TWO_PI)

    @property
    def boundary_area(self) -> float:
        return math.pi * self.core_length * math.sinh(2.0 * self.radius)


def torus_lattice_at_radius(tube: TubeShape, r: float) -> FlatTorusLattice:
    """Intrinsic flat lattice of the radius-r torus inside the tube.

    First basis vector is the meridian (2 pi sinh r, 0); the second is the
    longitudinal screw step (twist * sinh r, core_length * cosh r).
    """
    if not (0.0 < r <= tube.radius):
        raise InputError(f"radius {r} outside (0, {tube.radius}]")
    return FlatTorusLattice(
        (TWO_PI * math.sinh(r), 0.0),
        (tube.twist * math.sinh(r), tube.core_length * math.cosh(r)),
    )


def projection_factor_bound(r: float, big_r: float) -> float:
    """Upper bound e^-r + e^(r - R) on the length ratio when a curve on the
    radius-R torus is radially projected to the radius-r torus."""
    if not (0.0 < r < big_r):
        raise InputError("projection requires 0 < r < R")
    return math.exp(-r) + math.exp(r - big_r)


def projection_factor_exact(r: float, big_r: float) -> float:
    """Exact ratio cosh r / cosh R for the longitudinal direction; radial
    projection contracts every tangent vector by at least this much and at
    most sinh r / sinh R in the meridian direction."""
    if not (0.0 < r < big_r):
        raise InputError("projection requires 0 < r < R")
    return math.cosh(r) / math.cosh(big_r)


def outward_expansion_bounds(r: float, big_r: float) -> tuple[float, float]:
    """Per-segment length ratio interval [cosh R / cosh r, sinh R / sinh r]
    when a constant-radius path at radius r is pushed out to radius R."""
    if not (0.0 < r < big_r):
        raise InputError("expansion requires 0 < r < R")
    return (
        math.cosh(big_r) / math.cosh(r),
        math.sinh(big_r) / math.sinh(r),
    )


def as_path(vertices: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
    """Validate and normalize a polyline to a float array of shape (n, 3)."""
    arr = np.asarray(vertices, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] < 1:
        raise InputError("path must be an (n, 3) array of (r, theta, z) vertices")
    if not np.all(np.isfinite(arr)):
        raise InputError("path vertices must be finite")
    if np.any(arr[:, 0] < 0.0):
        raise InputError("path radii must be nonnegative")
    return arr


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _gl_estimates(
    a: np.ndarray, b: np.ndarray, t0: np.ndarray, t1: np.ndarray
) -> np.ndarray:
    """Gauss-Legendre 16-point length estimates of sub-intervals [t0, t1] of
    the coordinate-linear segments a -> b (all arrays batched on axis 0)."""
    mid = 0.5 * (t0 + t1)
    half = 0.5 * (t1 - t0)
    t = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    d = b - a
    r = a[:, 0][:, None] + t * d[:, 0][:, None]
    f = np.sqrt(
        d[:, 0][:, None] ** 2
        + np.sinh(r) ** 2 * d[:, 1][:, None] ** 2
        + np.cosh(r) ** 2 * d[:, 2][:, None] ** 2
    )
    return half * (f @ _GL_WEIGHTS)


def path_length(path: np.ndarray, epsrel: float = 1e-9) -> float:
    """Length of a coordinate-linear polyline under the tube metric.

    Adaptive bisection of each segment until the Gauss-Legendre estimate is
    stable to the requested relative tolerance (distributed over segments
    proportionally to parameter width).
    """
    arr = as_path(path)
    if not (math.isfinite(epsrel) and epsrel > 0.0):
        raise InputError("epsrel must be a positive finite real")
    if arr.shape[0] < 2:
        return 0.0
    a = arr[:-1]
    b = arr[1:]
    m = a.shape[0]
    t0 = np.zeros(m)
    t1 = np.ones(m)
    est = _gl_estimates(a, b, t0, t1)
    scale = float(est.sum()) + 1e-300
    budget = epsrel * scale / m
    total = 0.0
    for _ in range(48):
        if t0.size == 0:
            break
        tm = 0.5 * (t0 + t1)
        left = _gl_estimates(a, b, t0, tm)
        right = _gl_estimates(a, b, tm, t1)
        both = left + right
        done = np.abs(both - est) <= budget * (t1 - t0)
        total += float(both[done].sum())
        keep = ~done
        a = np.concatenate([a[keep], a[keep]])
        b = np.concatenate([b[keep], b[keep]])
        t0 = np.concatenate([t0[keep], tm[keep]])
        t1 = np.concatenate([tm[keep], t1[keep]])
        est = np.concatenate([left[keep], right[keep]])
    else:  # pragma: no cover - 48 bisections exhausts double precision
        total += float(est.sum())
        return total
    if t0.size:
        total += float(est.sum())
    return total


def min_radius(path: np.ndarray) -> float:
    return float(as_path(path)[:, 0].min())


def tube_depth(tube: TubeShape, path: np.ndarray) -> float:
    """Maximal penetration depth radius - min r of the path."""
    arr = as_path(path)
    if np.any(arr[:, 0] > tube.radius * (1.0 + 1e-12) + 1e-12):
        raise InputError("path leaves the tube (r > radius)")
    return tube.radius - min_radius(arr)


def project_path(tube: TubeShape, path: np.ndarray, r: float) -> np.ndarray:
    """Radial projection of a path onto the radius-r torus (theta, z kept)."""
    if not (0.0 < r <= tube.radius):
        raise InputError(f"target radius {r} outside (0, {tube.radius}]")
    arr = as_path(path).copy()
    arr[:, 0] = r
    return arr


def core_translation_distance(tube: TubeShape, k: int, r: float) -> float:
    """Displacement distance of the k-th core holonomy power at radius r."""
    if not isinstance(k, int) or isinstance(k, bool):
        raise InputError("holonomy power must be an integer")
    if not (0.0 <= r <= tube.radius):
        raise InputError(f"radius {r} outside [0, {tube.radius}]")
    ch = math.cosh(r) ** 2 * math.cosh(k * tube.core_length)
    ch -= math.sinh(r) ** 2 * math.cos(k * tube.twist)
    return math.acosh(max(ch, 1.0))


def _min_displacement(tube: TubeShape, r: float, mu: float) -> float:
    """min over k >= 1 of the k-step displacement distance at radius r,
    truncated to the powers that could possibly be below mu."""
    eps = tube.core_length
    # the k-th displacement is at least k*eps, so powers past mu/eps cannot be
    # mu-thin, and powers past d_1/eps cannot beat the first power
    d1 = core_translation_distance(tube, 1, r)
    kmax = int(math.ceil(min(mu, d1) / eps)) + 1
    sh2 = math.sinh(r) ** 2
    ch2 = math.cosh(r) ** 2
    best = d1
    for start in range(2, kmax + 1, 1_000_000):
        ks = np.arange(start, min(start + 1_000_000, kmax + 1))
        vals = ch2 * np.cosh(ks * eps) - sh2 * np.cos(ks * tube.twist)
        best = min(best, float(np.arccosh(np.maximum(vals, 1.0)).min()))
    return best


def thin_interface_radius(tube: TubeShape, mu: float) -> float:
    """Radius where the shortest geodesic loop length crosses mu.

    Returns 0 when no point of the tube is mu-thin and the full radius when
    even the boundary is mu-thin.  The displacement distance is increasing in
    r for every holonomy power, so bisection applies.
    """
    if not (math.isfinite(mu) and mu > 0.0):
        raise InputError("mu must be a positive finite real")
    if tube.core_length >= mu:
        return 0.0
    if tube.core_length > 0.0 and mu / tube.core_length > 5e7:
        raise InputError(
            "core length too small relative to mu for interface computation"
        )
    if _min_displacement(tube, tube.radius, mu) < mu:
        return tube.radius
    lo, hi = 0.0, tube.radius
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _min_displacement(tube, mid, mu) < mu:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class CoreLengthWindow:
    lo: float
    hi: float


def nz_core_length_window(ell: float) -> CoreLengthWindow:
    """Two-sided window for (cusp count) * (total filled core length) in
    terms of the total normalized slope length ell.

    Only valid for ell > 7.823; below that the window is vacuous and the
    request is rejected as a hypothesis failure.
    """
    if not math.isfinite(ell):
        raise InputError("ell must be finite")
    if ell <= ELL_MIN:
        raise HypothesisError(
            f"total normalized length {ell} <= {ELL_MIN}: core length window undefined"
        )
    return CoreLengthWindow(
        TWO_PI / (ell * ell + WINDOW_LO_SHIFT),
        TWO_PI / (ell * ell - WINDOW_HI_SHIFT),
    )


def meyerhoff_tube_radius(core_length: float) -> float:
    """Classical lower bound (Meyerhoff) for the embedded tube radius around
    a short geodesic: sinh^2 r = (1/2)(sqrt(1 - 2k)/k - 1) with
    k = cosh(sqrt(4 pi L / sqrt 3)) - 1.

    Literature-sourced estimate, not certified by this package; only valid on
    the domain k < 1/2 (short cores).  Opt in via the bundle radius policy.
    """
    if not (math.isfinite(core_length) and core_length > 0.0):
        raise InputError("core length must be a positive finite real")
    k = math.cosh(math.sqrt(4.0 * math.pi * core_length / math.sqrt(3.0))) - 1.0
    if k >= 0.5:
        raise InputError(
            f"core length {core_length} outside the estimate's domain (k >= 1/2)"
        )
    sh2 = 0.5 * (math.sqrt(1.0 - 2.0 * k) / k - 1.0)
    if sh2 <= 0.0:
        raise InputError(
            f"core length {core_length} gives no positive tube radius"
        )
    return math.asinh(math.sqrt(sh2))


@dataclass(frozen=True)
class TubeDeepnessRecord:
    """Per-tube geometric data feeding the deepness conditions.

    boundary_diameter is a certified interval for the diameter of the
    maximal tube's boundary torus.  dist_thick_to_max is the distance from
    the thin-interface torus to the maximal tube boundary, dist_thick_to_core
    from the interface to the core.  thin_empty marks tubes whose core is not
    mu-thin at all, making the interface conditions vacuous.
    """

    radius: float
    boundary_diameter: tuple[float, float]
    dist_thick_to_max: float
    dist_thick_to_core: float
    provenance: str
    thin_empty: bool = False

    def __post_init__(self) -> None:
        lo, hi = self.boundary_diameter
        if not (0.0 <= lo <= hi) or not math.isfinite(lo):
            raise InputError("boundary diameter interval must satisfy 0 <= lo <= hi")
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise InputError("tube radius must be a positive finite real")
        if self.provenance not in ("declared", "derived"):
            raise InputError(f"unknown tube record provenance {self.provenance!r}")


@dataclass(frozen=True)
class DeepnessCertificate:
    """Assumption bundle for depth-D, clearance-t deepness at scale mu."""

    depth: float
    core_clearance: float
    mu: float
    tubes: tuple[TubeDeepnessRecord, ...]
    mu_below_margulis: bool | None = None
    mu_cap: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.depth) and self.depth > 0.0):
            raise InputError("deepness depth must be a positive finite real")
        if not (math.isfinite(self.core_clearance) and self.core_clearance > 0.0):
            raise InputError("core clearance must be a positive finite real")
        if not (math.isfinite(self.mu) and self.mu > 0.0):
            raise InputError("mu must be a positive finite real")
        if len(self.tubes) == 0:
            raise InputError("deepness certificate needs at least one tube record")


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    tube: int | None
    margin: tuple[float, float]
    status: str


@dataclass(frozen=True)
class DeepnessVerdict:
    status: str
    doubled: bool
    checks: tuple[ConditionCheck, ...]

    def failed_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if c.status != "pass")


def _check(
    name: str, tube: int | None, lo: float, hi: float, strict: bool
) -> ConditionCheck:
    if strict:
        status = "pass" if lo > 0.0 else ("fail" if hi <= 0.0 else "indeterminate")
    else:
        status = "pass" if lo >= 0.0 else ("fail" if hi < 0.0 else "indeterminate")
    return ConditionCheck(name, tube, (lo, hi), status)


def check_deepness(cert: DeepnessCertificate, doubled: bool) -> DeepnessVerdict:
    """Verify the deepness conditions against a certificate.

    doubled=False checks depth-D deepness (the single-tube dichotomy route);
    doubled=True checks depth-2D deepness (the all-leaves route).  The
    diameter domination condition uses the undoubled D on both routes.
    """
    d = cert.depth
    eff = 2.0 * d if doubled else d
    checks: list[ConditionCheck] = [
        _check("depth-at-least-2log4", None, d - 2.0 * LOG4, d - 2.0 * LOG4, False),
        _check(
            "clearance-at-least-log4",
            None,
            cert.core_clearance - LOG4,
            cert.core_clearance - LOG4,
            False,
        ),
    ]
    if cert.mu_below_margulis is not None:
        v = 1.0 if cert.mu_below_margulis else -1.0
        checks.append(ConditionCheck(
            "mu-below-margulis", None, (v, v), "pass" if cert.mu_below_margulis else "fail"
        ))
    if cert.mu_cap is not None:
        m = cert.mu_cap - cert.mu
        checks.append(_check("mu-below-cap", None, m, m, True))
    for i, rec in enumerate(cert.tubes):
        dlo, dhi = rec.boundary_diameter
        checks.append(_check(
            "depth-dominates-diameter",
            i,
            d - 8.0 * dhi - 2.0 * LOG4,
            d - 8.0 * dlo - 2.0 * LOG4,
            False,
        ))
        m = rec.radius - (eff + LOG4)
        checks.append(_check("radius-exceeds-depth", i, m, m, True))
        if rec.thin_empty:
            checks.append(ConditionCheck(
                "thick-to-max", i, (math.inf, math.inf), "pass"
            ))
            checks.append(ConditionCheck(
                "thick-to-core", i, (math.inf, math.inf), "pass"
            ))
        else:
            m = rec.dist_thick_to_max - eff
            checks.append(_check("thick-to-max", i, m, m, False))
            m = rec.dist_thick_to_core - cert.core_clearance
            checks.append(_check("thick-to-core", i, m, m, False))
    statuses = {c.status for c in checks}
    if "fail" in statuses:
        status = "fail"
    elif "indeterminate" in statuses:
        status = "indeterminate"
    else:
        status = "pass"
    return DeepnessVerdict(status, doubled, tuple(checks))


def build_deepness_certificate(
    tubes: Sequence[TubeShape],
    depth: float,
    core_clearance: float,
    mu: float,
    diameter_tol: float = 1e-9,
    mu_below_margulis: bool | None = None,
    mu_cap: float | None = None,
) -> DeepnessCertificate:
    """Derive a certificate from explicit tube shapes.

    The interface radius comes from the shortest-loop bisection, the boundary
    diameter from the exact covering radius of the boundary lattice.  This is
    the honest route: with realistic tube shapes the conditions typically
    fail unless the filling slopes are extremely long.
    """
    records = []
    for tube in tubes:
        r_mu = thin_interface_radius(tube, mu)
        cov: CoveringRadiusInterval = covering_radius(
            torus_lattice_at_radius(tube, tube.radius), diameter_tol
        )
        records.append(TubeDeepnessRecord(
            radius=tube.radius,
            boundary_diameter=(cov.lo, cov.hi),
            dist_thick_to_max=tube.radius - r_mu,
            dist_thick_to_core=r_mu,
            provenance="derived",
            thin_empty=(r_mu == 0.0),
        ))
    return DeepnessCertificate(
        depth=depth,
        core_clearance=core_clearance,
        mu=mu,
        tubes=tuple(records),
        mu_below_margulis=mu_below_margulis,
        mu_cap=mu_cap,
    )
