"""Stable-norm bounds for surviving cohomology classes.

Two sides are combined downstream: a lower bound on the full stable norm of
a zero-surgery class (from the pairing with the short filled cores divided by
the window on their total length), and an upper confidence bound on the
thick-part stable norm (declared comparison constant times the Thurston-type
norm of the class in the unfilled manifold).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import HypothesisError, InputError
from .tube import ELL_MIN, TWO_PI, WINDOW_HI_SHIFT


@dataclass(frozen=True)
class NormEstimate:
    """Enclosure [lower, upper] of a stable norm with optional witnesses.

    witnesses are (identifier, value) pairs of chains realizing lower-bound
    candidates; each witness value must lie inside the enclosure.
    """

    lower: float
    upper: float
    witnesses: tuple[tuple[str, float], ...] = ()
    method: str = ""

    def __post_init__(self) -> None:
        if not (self.lower <= self.upper):
            raise InputError("norm estimate requires lower <= upper")
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise InputError("norm estimate bounds must not be NaN")
        for name, value in self.witnesses:
            if not (self.lower <= value <= self.upper):
                raise InputError(
                    f"witness {name!r} value {value} outside [{self.lower}, {self.upper}]"
                )


def stable_lower_bound_from_cores(n_cusps: int, ell: float) -> float:
    """(n / 2 pi) (ell^2 - 28.78): lower bound for the stable norm of a
    zero-surgery class pairing once with each of n filled cores, valid for
    total normalized slope length ell > 7.823."""
    if not isinstance(n_cusps, int) or isinstance(n_cusps, bool) or n_cusps < 1:
        raise InputError("cusp count must be a positive integer")
    if not math.isfinite(ell):
        raise InputError("ell must be finite")
    if ell <= ELL_MIN:
        raise HypothesisError(
            f"total normalized length {ell} <= {ELL_MIN}: core bound undefined"
        )
    return (n_cusps / TWO_PI) * (ell * ell - WINDOW_HI_SHIFT)


def thick_stable_upper_bound(comparison_constant: float, thurston_norm: float) -> float:
    """Conditional upper bound C * ||rho||_Th for the thick-part stable norm.

    The comparison constant is a declared assumption of the certification,
    never derived here; callers must record it in the assumption bundle.
    """
    if not (math.isfinite(comparison_constant) and comparison_constant > 0.0):
        raise InputError("comparison constant must be a positive finite real")
    if not (math.isfinite(thurston_norm) and thurston_norm >= 0.0):
        raise InputError("thurston norm must be a nonnegative finite real")
    return comparison_constant * thurston_norm


def empirical_norm_estimate(
    values: dict[str, float], method: str = "empirical-family-sup"
) -> NormEstimate:
    """Lower estimate from sampled K values: the max is a certified lower
    bound (each sample is a witness chain), the upper bound stays infinite."""
    if not values:
        raise InputError("empirical estimate needs at least one sampled value")
    for name, v in values.items():
        if not math.isfinite(v):
            raise InputError(f"sampled value {name!r} must be finite")
    best = max(values.items(), key=lambda kv: (kv[1], kv[0]))
    return NormEstimate(
        lower=best[1],
        upper=math.inf,
        witnesses=(best,),
        method=method,
    )
