"""Hybrid curves, geodesic tightening inside tubes, and the deep-strand
shortening procedure.

A hybrid curve is a closed cyclic sequence of thick segments (abstract, with
a declared length and homology tag) and tube segments (explicit polylines in
one tube's Fermi coordinates).  Tube segment endpoints are expected on the
tube boundary r = radius; coordinates are unwrapped, i.e. theta and z live in
the universal cover and closing a loop may end at a deck translate of the
start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import HypothesisError, InputError, PropertyViolation
from .lattice import covering_radius, lagrange_reduce
from .tube import (
    LOG4,
    TWO_PI,
    TubeShape,
    as_path,
    min_radius,
    path_length,
    torus_lattice_at_radius,
    tube_depth,
)


@dataclass(frozen=True)
class ThickSegment:
    """Arc in the thick part, carried abstractly.

    homology_tag is the vector of pairings of a fixed covector basis with the
    chain this arc closes up to (used by ChainEvaluator); it travels with the
    segment unchanged through every operation.
    """

    label: str
    length: float
    homology_tag: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not (math.isfinite(self.length) and self.length >= 0.0):
            raise InputError("thick segment length must be a nonnegative finite real")
        object.__setattr__(self, "homology_tag", tuple(int(x) for x in self.homology_tag))


@dataclass(frozen=True, eq=False)
class TubeSegment:
    """Polyline inside one tube, vertices (r, theta, z) unwrapped."""

    tube_id: str
    path: np.ndarray

    def __post_init__(self) -> None:
        arr = as_path(self.path)
        if arr.shape[0] < 2:
            raise InputError("tube segment needs at least two vertices")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "path", arr)

    @property
    def z_displacement(self) -> float:
        return float(self.path[-1, 2] - self.path[0, 2])


Segment = ThickSegment | TubeSegment


@dataclass(frozen=True, eq=False)
class HybridCurve:
    """Closed curve alternating thick and tube segments (cyclically)."""

    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        if len(self.segments) == 0:
            raise InputError("hybrid curve needs at least one segment")
        for s in self.segments:
            if not isinstance(s, (ThickSegment, TubeSegment)):
                raise InputError(f"unsupported segment type {type(s).__name__}")

    def tube_segments(self) -> list[tuple[int, TubeSegment]]:
        return [
            (i, s) for i, s in enumerate(self.segments) if isinstance(s, TubeSegment)
        ]

    def thick_labels(self) -> tuple[str, ...]:
        return tuple(
            s.label for s in self.segments if isinstance(s, ThickSegment)
        )


@dataclass(frozen=True, eq=False)
class MultiCurve:
    """Formal integer combination of hybrid curves; may be empty (zero chain)."""

    components: tuple[tuple[HybridCurve, int], ...] = ()

    def __post_init__(self) -> None:
        for curve, w in self.components:
            if not isinstance(curve, HybridCurve):
                raise InputError("multicurve components must be hybrid curves")
            if not isinstance(w, int) or isinstance(w, bool) or w == 0:
                raise InputError("multicurve weights must be nonzero integers")


def _tube_for(tubes: Mapping[str, TubeShape], tube_id: str) -> TubeShape:
    try:
        return tubes[tube_id]
    except KeyError:
        raise InputError(f"unknown tube id {tube_id!r}") from None


def validate_curve(
    curve: HybridCurve, tubes: Mapping[str, TubeShape], atol: float = 1e-9
) -> None:
    """Check every tube segment stays inside its tube with endpoints on the
    boundary torus."""
    for i, seg in curve.tube_segments():
        tube = _tube_for(tubes, seg.tube_id)
        scale = atol * (1.0 + tube.radius)
        if np.any(seg.path[:, 0] > tube.radius + scale):
            raise InputError(f"segment {i} leaves tube {seg.tube_id!r}")
        for end in (seg.path[0, 0], seg.path[-1, 0]):
            if abs(end - tube.radius) > scale:
                raise InputError(
                    f"segment {i} endpoint not on the boundary of tube {seg.tube_id!r}"
                )


def curve_length(
    curve: HybridCurve, tubes: Mapping[str, TubeShape], epsrel: float = 1e-9
) -> float:
    total = 0.0
    for seg in curve.segments:
        if isinstance(seg, ThickSegment):
            total += seg.length
        else:
            _tube_for(tubes, seg.tube_id)
            total += path_length(seg.path, epsrel)
    return total


def _clip_above(path: np.ndarray, r_min: float) -> list[np.ndarray]:
    """Sub-polylines of the path lying at radius >= r_min, with crossing
    points interpolated linearly in coordinates."""
    if r_min <= 0.0:
        return [path]
    pieces: list[list[np.ndarray]] = []
    current: list[np.ndarray] = []
    for i in range(path.shape[0] - 1):
        a, b = path[i], path[i + 1]
        ra, rb = a[0], b[0]
        if ra >= r_min:
            if not current:
                current = [a]
            if rb >= r_min:
                current.append(b)
            else:
                t = (ra - r_min) / (ra - rb)
                current.append(a + t * (b - a))
                pieces.append(current)
                current = []
        else:
            if rb >= r_min:
                t = (r_min - ra) / (rb - ra)
                current = [a + t * (b - a), b]
    if current:
        pieces.append(current)
    return [np.vstack(p) for p in pieces if len(p) >= 2]


def thick_length(
    curve: HybridCurve,
    tubes: Mapping[str, TubeShape],
    interfaces: Mapping[str, float],
    epsrel: float = 1e-9,
) -> float:
    """Length of the curve with each tube segment clipped to the region at or
    outside that tube's thin-interface radius."""
    total = 0.0
    for seg in curve.segments:
        if isinstance(seg, ThickSegment):
            total += seg.length
            continue
        _tube_for(tubes, seg.tube_id)
        r_if = interfaces.get(seg.tube_id, 0.0)
        for piece in _clip_above(np.asarray(seg.path), float(r_if)):
            total += path_length(piece, epsrel)
    return total


def multicurve_length(
    mc: MultiCurve,
    tubes: Mapping[str, TubeShape],
    epsrel: float = 1e-9,
    interfaces: Mapping[str, float] | None = None,
) -> float:
    total = 0.0
    for curve, w in mc.components:
        if interfaces is None:
            total += abs(w) * curve_length(curve, tubes, epsrel)
        else:
            total += abs(w) * thick_length(curve, tubes, interfaces, epsrel)
    return total


@dataclass(frozen=True)
class ChainEvaluator:
    """Linear functional on hybrid chains.

    Thick segments contribute the dot product of cls with their homology tag;
    tube segments contribute z_weight[tube] times their unwrapped z
    displacement.  Both are additive and flip sign under orientation
    reversal, so caps inserted once forward and once reversed cancel exactly.
    """

    cls: tuple[float, ...]
    tube_z_weights: Mapping[str, float] = field(default_factory=dict)

    def of_curve(self, curve: HybridCurve) -> float:
        total = 0.0
        for seg in curve.segments:
            if isinstance(seg, ThickSegment):
                if len(seg.homology_tag) != len(self.cls):
                    raise InputError(
                        "thick segment tag rank does not match evaluator class"
                    )
                total += sum(c * t for c, t in zip(self.cls, seg.homology_tag))
            else:
                total += self.tube_z_weights.get(seg.tube_id, 0.0) * seg.z_displacement
        return total

    def of_multicurve(self, mc: MultiCurve) -> float:
        return sum(w * self.of_curve(c) for c, w in mc.components)

    def __call__(self, curve: HybridCurve) -> float:
        return self.of_curve(curve)


def k_functional(
    rho: Callable[[HybridCurve], float],
    mc: MultiCurve,
    tubes: Mapping[str, TubeShape],
    thick: bool = False,
    interfaces: Mapping[str, float] | None = None,
    epsrel: float = 1e-9,
) -> float:
    """Pairing-per-unit-length functional rho(g) / len(g).

    The zero chain maps to 0.  A zero-length chain with nonzero pairing is
    rejected: no length can witness its ratio.
    """
    if not mc.components:
        return 0.0
    value = sum(w * rho(curve) for curve, w in mc.components)
    if thick:
        if interfaces is None:
            raise InputError("thick K functional needs interface radii")
        length = multicurve_length(mc, tubes, epsrel, interfaces)
    else:
        length = multicurve_length(mc, tubes, epsrel)
    if length == 0.0:
        if value == 0.0:
            return 0.0
        raise InputError("zero-length chain with nonzero pairing has no K value")
    return value / length


def core_path(tube: TubeShape, winding: int) -> np.ndarray:
    """The core geodesic traversed winding times, as a polyline."""
    if not isinstance(winding, int) or isinstance(winding, bool):
        raise InputError("winding must be an integer")
    if winding == 0:
        return np.array([[0.0, 0.0, 0.0]])
    return np.array([[0.0, 0.0, 0.0], [0.0, 0.0, winding * tube.core_length]])


@dataclass
class TightenResult:
    path: np.ndarray
    length: float
    converged: bool
    iterations: int
    message: str


_GLN, _GLW = np.polynomial.legendre.leggauss(16)


def _resample(path: np.ndarray, n: int) -> np.ndarray:
    """Resample to n+1 vertices, approximately uniform in metric arclength."""
    from .tube import _gl_estimates

    a, b = path[:-1], path[1:]
    m = a.shape[0]
    seg = np.maximum(_gl_estimates(a, b, np.zeros(m), np.ones(m)), 1e-300)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, cum[-1], n + 1)
    idx = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, len(seg) - 1)
    t = (targets - cum[idx]) / seg[idx]
    t = np.clip(t, 0.0, 1.0)
    out = a[idx] + t[:, None] * (b[idx] - a[idx])
    out[0] = path[0]
    out[-1] = path[-1]
    return out


def _length_and_grad(x: np.ndarray) -> tuple[float, np.ndarray]:
    """Total polyline length and its gradient with respect to all vertices,
    with a fixed 16-point Gauss-Legendre rule per segment."""
    a, b = x[:-1], x[1:]
    d = b - a
    nodes = 0.5 * (_GLN + 1.0)
    wts = 0.5 * _GLW
    r = a[:, 0][:, None] + nodes[None, :] * d[:, 0][:, None]
    sh, ch = np.sinh(r), np.cosh(r)
    dr = d[:, 0][:, None]
    dth = d[:, 1][:, None]
    dz = d[:, 2][:, None]
    f = np.sqrt(dr**2 + sh**2 * dth**2 + ch**2 * dz**2)
    length = float((f @ wts).sum())
    inv = np.where(f > 0.0, 1.0 / np.maximum(f, 1e-300), 0.0)
    shch = sh * ch * (dth**2 + dz**2)
    g_r0 = ((-dr + shch * (1.0 - nodes[None, :])) * inv) @ wts
    g_r1 = ((dr + shch * nodes[None, :]) * inv) @ wts
    g_th = ((sh**2 * dth) * inv) @ wts
    g_z = ((ch**2 * dz) * inv) @ wts
    grad = np.zeros_like(x)
    grad[:-1, 0] += g_r0
    grad[1:, 0] += g_r1
    grad[:-1, 1] -= g_th
    grad[1:, 1] += g_th
    grad[:-1, 2] -= g_z
    grad[1:, 2] += g_z
    return length, grad


def tighten_in_tube(
    tube: TubeShape,
    path: np.ndarray,
    constraint: str = "fixed-endpoints",
    max_vertices: int = 2048,
    epsrel: float = 1e-9,
) -> TightenResult:
    """Shorten a path inside the tube.

    "fixed-endpoints": bound-constrained quasi-Newton descent on interior
    vertices (r kept inside [0, radius]), with arclength resampling and
    refinement rounds until the length stabilizes.

    "free-class": the path must close up to a deck translation; the result is
    the core traversed the corresponding winding number of times, which is the
    exact minimizer in that free homotopy class (length |k| * core_length, a
    point when k = 0).
    """
    arr = as_path(path)
    if np.any(arr[:, 0] > tube.radius * (1.0 + 1e-9) + 1e-12):
        raise InputError("path leaves the tube")
    if constraint == "free-class":
        start, end = arr[0], arr[-1]
        if abs(end[0] - start[0]) > 1e-9 * (1.0 + tube.radius):
            raise InputError("free-class path does not close up to a deck translation")
        dth = end[1] - start[1]
        dz = end[2] - start[2]
        k = dz / tube.core_length
        kk = round(k)
        if abs(k - kk) > 1e-6:
            raise InputError("free-class path does not close up to a deck translation")
        wrap = (dth - kk * tube.twist) / TWO_PI
        if abs(wrap - round(wrap)) > 1e-6:
            raise InputError("free-class path does not close up to a deck translation")
        out = core_path(tube, kk)
        return TightenResult(out, abs(kk) * tube.core_length, True, 0, "exact core")
    if constraint != "fixed-endpoints":
        raise InputError(f"unknown tightening constraint {constraint!r}")
    if arr.shape[0] < 2:
        raise InputError("fixed-endpoint tightening needs at least two vertices")

    current = arr
    prev_len = path_length(current, epsrel)
    n = 64
    iterations = 0
    converged = False
    message = ""
    while True:
        current = _resample(current, n)
        m = current.shape[0]
        interior = slice(1, m - 1)

        def objective(flat: np.ndarray) -> tuple[float, np.ndarray]:
            pts = current.copy()
            pts[interior] = flat.reshape(-1, 3)
            val, grad = _length_and_grad(pts)
            return val, grad[interior].ravel()

        bounds = [(0.0, tube.radius), (None, None), (None, None)] * (m - 2)
        res = minimize(
            objective,
            current[interior].ravel(),
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": 2000, "ftol": 1e-15, "gtol": 1e-12},
        )
        current = current.copy()
        current[interior] = res.x.reshape(-1, 3)
        iterations += int(res.nit)
        new_len = path_length(current, epsrel)
        stabilized = abs(prev_len - new_len) <= max(1e-10, 1e-8 * new_len)
        prev_len = new_len
        if stabilized or n >= max_vertices:
            # refinement delta below tolerance or resolution budget spent;
            # converged reports whether the final solve itself was stationary
            converged = bool(res.success)
            message = str(res.message)
            break
        n *= 2
    return TightenResult(current, prev_len, converged, iterations, message)


@dataclass(frozen=True)
class CapChoice:
    """Minimal geodesic on the boundary torus joining two boundary points.

    dtheta and dz are the full coordinate displacement including the chosen
    deck translation; winding is the longitudinal deck component (it becomes
    the loop's core winding when the cap closes an arc).
    """

    dtheta: float
    dz: float
    winding: int
    length: float


def minimal_cap(
    tube: TubeShape, frm: tuple[float, float], to: tuple[float, float]
) -> CapChoice:
    """Shortest boundary-torus path from (theta, z) point frm to point to,
    minimizing over deck translations.

    The displacement in boundary-weighted coordinates is a closest-vector
    problem over the boundary lattice, solved by rounding in a reduced basis
    with a +-2 window (exact in rank 2); ties break toward small windings.
    """
    sh = math.sinh(tube.radius)
    ch = math.cosh(tube.radius)
    eps = tube.core_length
    dth0 = to[0] - frm[0]
    dz0 = to[1] - frm[1]
    p = np.array([dth0 * sh, dz0 * ch])
    lat = torus_lattice_at_radius(tube, tube.radius)
    u, w, (tu, tw) = lagrange_reduce(lat)
    basis = np.array([[u[0], w[0]], [u[1], w[1]]])
    c = np.linalg.solve(basis, p)
    base_a, base_b = int(round(c[0])), int(round(c[1]))
    candidates = []
    for da in range(-2, 3):
        for db in range(-2, 3):
            a = base_a + da
            b = base_b + db
            vec = p - (a * np.asarray(u) + b * np.asarray(w))
            m = -(a * tu[0] + b * tw[0])
            j = -(a * tu[1] + b * tw[1])
            candidates.append((float(np.hypot(vec[0], vec[1])), j, m))
    best_len = min(c0 for c0, _, _ in candidates)
    pool = [
        c for c in candidates if c[0] <= best_len + 1e-12 * (1.0 + best_len)
    ]
    pool.sort(key=lambda c: (abs(c[1]), c[1], abs(c[2]), c[2]))
    length, j, m = pool[0]
    return CapChoice(
        dtheta=dth0 + TWO_PI * m + tube.twist * j,
        dz=dz0 + eps * j,
        winding=j,
        length=length,
    )


@dataclass(frozen=True)
class CapTightenResult:
    """Outcome of closing a boundary-to-boundary arc with its minimal cap and
    tightening in the free class.

    margin = closed length - core length - depth_bound/4 - cap length/2; the
    certified flag records whether the hypotheses guaranteeing margin >= 0
    held (2log4 <= depth_bound, radius >= depth_bound + log4, arc deeper than
    depth_bound).  The margin is computed either way.
    """

    sigma_path: np.ndarray
    sigma_length: float
    cap_length: float
    winding: int
    core_length: float
    margin: float
    certified: bool
    notes: tuple[str, ...]


def cap_and_tighten(
    tube: TubeShape, arc: np.ndarray, depth_bound: float, epsrel: float = 1e-9
) -> CapTightenResult:
    arr = as_path(arc)
    if arr.shape[0] < 2:
        raise InputError("arc needs at least two vertices")
    scale = 1e-9 * (1.0 + tube.radius)
    if abs(arr[0, 0] - tube.radius) > scale or abs(arr[-1, 0] - tube.radius) > scale:
        raise InputError("arc endpoints must lie on the tube boundary")
    depth = tube_depth(tube, arr)
    cap = minimal_cap(
        tube, (arr[-1, 1], arr[-1, 2]), (arr[0, 1], arr[0, 2])
    )
    closing = arr[-1] + np.array([0.0, cap.dtheta, cap.dz])
    sigma = np.vstack([arr, closing])
    sigma_length = path_length(arr, epsrel) + cap.length
    core_len = abs(cap.winding) * tube.core_length
    margin = sigma_length - core_len - depth_bound / 4.0 - cap.length / 2.0
    notes = []
    if depth_bound < 2.0 * LOG4 - 1e-12:
        notes.append("inequality not guaranteed: depth bound below 2 log 4")
    if tube.radius < depth_bound + LOG4 - 1e-12:
        notes.append("inequality not guaranteed: radius below depth bound + log 4")
    if depth <= depth_bound:
        notes.append("inequality not guaranteed: arc not deeper than depth bound")
    return CapTightenResult(
        sigma_path=sigma,
        sigma_length=sigma_length,
        cap_length=cap.length,
        winding=cap.winding,
        core_length=core_len,
        margin=margin,
        certified=not notes,
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class LoopRecord:
    tube_id: str
    strand_count: int
    winding: int
    sigma_length: float
    core_length: float


@dataclass(frozen=True)
class TubeCutRecord:
    tube_id: str
    strands_cut: int
    crossings: int
    cap_lengths: tuple[float, ...]
    net_chain_added: int
    trivial_loops_dropped: int


@dataclass(frozen=True)
class ShorteningLedger:
    tubes: tuple[TubeCutRecord, ...]
    loops: tuple[LoopRecord, ...]
    length_before: float
    length_after: float

    @property
    def savings(self) -> float:
        return self.length_before - self.length_after


@dataclass(frozen=True, eq=False)
class ShorteningResult:
    multicurve: MultiCurve
    ledger: ShorteningLedger


def _deck_shift(
    tube: TubeShape, have: np.ndarray, want: np.ndarray
) -> np.ndarray:
    """Deck translation delta with want + delta == have (theta, z), asserted
    to be an actual lattice element."""
    dth = have[1] - want[1]
    dz = have[2] - want[2]
    j = dz / tube.core_length
    jj = round(j)
    if abs(j - jj) > 1e-6:
        raise PropertyViolation("cap endpoint does not match a deck translate")
    m = (dth - jj * tube.twist) / TWO_PI
    mm = round(m)
    if abs(m - mm) > 1e-6:
        raise PropertyViolation("cap endpoint does not match a deck translate")
    return np.array([0.0, dth, dz])


def shorten_deep_multicurve(
    curve: HybridCurve,
    tubes: Mapping[str, TubeShape],
    depth_bound: float,
    diameter_tol: float = 1e-9,
    epsrel: float = 1e-9,
) -> ShorteningResult:
    """Replace strands deeper than depth_bound by homologous shorter pieces.

    Every strand of depth > depth_bound is cut at the tube boundary; cut ends
    are paired greedily by minimal boundary caps; the resulting in-tube loops
    are tightened to core powers (trivial loops dropped) while the exterior
    components reuse each cap reversed, so the total added chain is zero and
    the homology class and thick trace are unchanged.  The total length
    strictly decreases; violation of that raises PropertyViolation.

    Hypotheses checked per cut tube: depth_bound >= 2 log 4, depth_bound >=
    8 * boundary diameter + 2 log 4, radius > depth_bound + log 4.
    """
    validate_curve(curve, tubes)
    if not (math.isfinite(depth_bound) and depth_bound > 0.0):
        raise InputError("depth bound must be a positive finite real")
    n_seg = len(curve.segments)
    depths: dict[int, float] = {}
    by_tube: dict[str, list[int]] = {}
    for i, seg in curve.tube_segments():
        tube = _tube_for(tubes, seg.tube_id)
        depths[i] = tube_depth(tube, seg.path)
        by_tube.setdefault(seg.tube_id, []).append(i)

    cut_tubes = {
        tid: idxs
        for tid, idxs in by_tube.items()
        if any(depths[i] > depth_bound for i in idxs)
    }
    length_before = curve_length(curve, tubes, epsrel)
    if not cut_tubes:
        return ShorteningResult(
            MultiCurve(((curve, 1),)),
            ShorteningLedger((), (), length_before, length_before),
        )

    if depth_bound < 2.0 * LOG4:
        raise HypothesisError("depth bound below 2 log 4")
    for tid in cut_tubes:
        tube = tubes[tid]
        cov = covering_radius(
            torus_lattice_at_radius(tube, tube.radius), diameter_tol
        )
        if depth_bound < 8.0 * cov.hi + 2.0 * LOG4:
            raise HypothesisError(
                f"tube {tid!r}: depth bound below 8 * diameter + 2 log 4"
            )
        if tube.radius <= depth_bound + LOG4:
            raise HypothesisError(
                f"tube {tid!r}: radius not above depth bound + log 4"
            )

    cut_ids = sorted(
        i for tid, idxs in cut_tubes.items() for i in idxs if depths[i] > depth_bound
    )
    cut_set = set(cut_ids)

    # Greedy minimal-cap pairing per tube: exit of strand i -> entry of pi(i).
    pi: dict[int, int] = {}
    caps: dict[int, CapChoice] = {}
    tube_caps: dict[str, list[CapChoice]] = {}
    for tid in sorted(cut_tubes):
        tube = tubes[tid]
        members = [i for i in cut_tubes[tid] if i in cut_set]
        exits = set(members)
        entries = set(members)
        pair_caps = {
            (i, j): minimal_cap(
                tube,
                (curve.segments[i].path[-1, 1], curve.segments[i].path[-1, 2]),
                (curve.segments[j].path[0, 1], curve.segments[j].path[0, 2]),
            )
            for i in members
            for j in members
        }
        while exits:
            (i, j), cap = min(
                (
                    ((i, j), c)
                    for (i, j), c in pair_caps.items()
                    if i in exits and j in entries
                ),
                key=lambda kv: (kv[1].length, kv[0]),
            )
            pi[i] = j
            caps[i] = cap
            tube_caps.setdefault(tid, []).append(cap)
            exits.remove(i)
            entries.remove(j)
    inv_pi = {j: i for i, j in pi.items()}

    # Interior loops: cycles of pi, concatenated with deck-shift bookkeeping.
    loops: list[LoopRecord] = []
    interior: list[tuple[HybridCurve, int]] = []
    trivial_dropped: dict[str, int] = {}
    seen: set[int] = set()
    for start in cut_ids:
        if start in seen:
            continue
        tid = curve.segments[start].tube_id
        tube = tubes[tid]
        pieces = [np.asarray(curve.segments[start].path)]
        seen.add(start)
        strand_count = 1
        i = start
        while True:
            cap = caps[i]
            j = pi[i]
            landing = pieces[-1][-1] + np.array([0.0, cap.dtheta, cap.dz])
            if j == start:
                pieces.append(landing[None, :])
                break
            shift = _deck_shift(tube, landing, curve.segments[j].path[0])
            pieces.append(np.asarray(curve.segments[j].path) + shift[None, :])
            seen.add(j)
            strand_count += 1
            i = j
        loop_path = np.vstack(pieces)
        dz_total = loop_path[-1, 2] - loop_path[0, 2]
        w = dz_total / tube.core_length
        winding = round(w)
        if abs(w - winding) > 1e-6:
            raise PropertyViolation("interior loop does not close to a core class")
        sigma_len = path_length(loop_path, epsrel)
        core_len = abs(winding) * tube.core_length
        loops.append(LoopRecord(tid, strand_count, winding, sigma_len, core_len))
        if winding == 0:
            trivial_dropped[tid] = trivial_dropped.get(tid, 0) + 1
        else:
            interior.append(
                (HybridCurve((TubeSegment(tid, core_path(tube, winding)),)), 1)
            )

    # Exterior components: original traversal with each cut strand replaced
    # by the reversed cap into the strand whose cap lands at its entry.
    exterior: list[tuple[HybridCurve, int]] = []
    visited: set[int] = set()
    for start in range(n_seg):
        if start in cut_set or start in visited:
            continue
        comp: list[Segment] = []
        k = start
        while True:
            comp.append(curve.segments[k])
            visited.add(k)
            m = (k + 1) % n_seg
            while m in cut_set:
                j = inv_pi[m]
                seg_m = curve.segments[m]
                tube = tubes[seg_m.tube_id]
                cap = caps[j]
                a = seg_m.path[0]
                rev_end = a - np.array([0.0, cap.dtheta, cap.dz])
                comp.append(
                    TubeSegment(seg_m.tube_id, np.vstack([a, rev_end]))
                )
                m = (j + 1) % n_seg
            if m == start:
                break
            k = m
        exterior.append((HybridCurve(tuple(comp)), 1))

    mc = MultiCurve(tuple(exterior + interior))
    length_after = multicurve_length(mc, tubes, epsrel)
    if not length_after < length_before:
        raise PropertyViolation(
            f"shortening failed to decrease length ({length_before} -> {length_after})"
        )
    tube_records = tuple(
        TubeCutRecord(
            tube_id=tid,
            strands_cut=len([i for i in cut_tubes[tid] if i in cut_set]),
            crossings=2 * len([i for i in cut_tubes[tid] if i in cut_set]),
            cap_lengths=tuple(c.length for c in tube_caps.get(tid, [])),
            net_chain_added=0,
            trivial_loops_dropped=trivial_dropped.get(tid, 0),
        )
        for tid in sorted(cut_tubes)
    )
    return ShorteningResult(
        mc,
        ShorteningLedger(tube_records, tuple(loops), length_before, length_after),
    )
