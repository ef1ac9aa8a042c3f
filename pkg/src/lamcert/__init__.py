"""Certified norm bounds and core-curve certification for Dehn-filling
families of cusped hyperbolic 3-manifolds.

The package turns a declared assumption bundle (cusp shapes, homology
inclusions, tube data, comparison constants) plus a filling slope into a
machine-checked verdict about the length-ratio-maximizing lamination of the
filled manifold: either every leaf is certified to be a filled core curve,
or the report says exactly which hypothesis or margin failed.
"""

from .certify import (
    AssumptionBundle,
    CertificationReport,
    certify_filling,
    dichotomy_statement,
    subquadratic_threshold,
)
from .curves import (
    ChainEvaluator,
    HybridCurve,
    MultiCurve,
    ThickSegment,
    TubeSegment,
    cap_and_tighten,
    curve_length,
    k_functional,
    minimal_cap,
    multicurve_length,
    shorten_deep_multicurve,
    thick_length,
    tighten_in_tube,
)
from .errors import (
    HypothesisError,
    InputError,
    LamcertError,
    NonPrimitiveSlopeError,
    PropertyViolation,
)
from .family import FamilySpec, family_table, generate
from .homology import (
    BoundaryInclusionMap,
    CohomologyClass,
    SurgeryClassDatum,
    boundary_slope_of_class,
    evaluate,
    is_compatible,
    pairing_with_cores,
    smith_normal_form,
)
from .lattice import (
    CompleteSlope,
    FlatTorusLattice,
    Slope,
    covering_radius,
    normalized_length,
    shortest_vector,
    slope_length,
    total_normalized_length,
)
from .norms import (
    NormEstimate,
    empirical_norm_estimate,
    stable_lower_bound_from_cores,
    thick_stable_upper_bound,
)
from .tube import (
    DeepnessCertificate,
    TubeShape,
    check_deepness,
    meyerhoff_tube_radius,
    nz_core_length_window,
    path_length,
    projection_factor_bound,
    thin_interface_radius,
    torus_lattice_at_radius,
    tube_depth,
)
from .bundle import ManifoldBundle, load_manifold

__version__ = "0.1.0"
