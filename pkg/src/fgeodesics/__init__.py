"""Closed geodesics of Zermelo (Katok) metrics on odd spheres, their Morse indices,
and the exact loop-space bookkeeping behind the second-closed-geodesic argument."""

from ._version import __version__
from .dynamics import (
    ClosedGeodesicRecord,
    GeodesicState,
    SearchResult,
    Trajectory,
    exact_flow,
    exact_katok_geodesic,
    find_closed_geodesics,
    great_circle_record,
    integrate_geodesic,
    iterate_geodesic,
    katok_closed_geodesics,
    state_from_covector,
    state_from_velocity,
)
from .errors import (
    BoundaryAmbiguous,
    DegenerateMetric,
    FGError,
    IntegrationFailure,
    InternalInconsistency,
    InvalidInput,
    InvalidMetric,
    NumericalFailure,
)
from .morse import (
    IndexResult,
    IndexSequence,
    LinearizedReturnData,
    bott_checks,
    closed_geodesic_index,
    count_conjugate_points,
    gamma_invariant,
    katok_index_formula,
    linearized_return_data,
    round_index,
)
from .report import ANCHORS, Check, VerificationReport
from .sphere import (
    GreatCircle,
    KillingField,
    SpherePoint,
    TangentVector,
    great_circle_curve,
    killing_a_invariant,
    killing_field,
    killing_flow,
    killing_sup_norm,
)
from .topology import (
    BettiTable,
    DiagramWitness,
    MorseData,
    Space,
    betti_free_loop,
    betti_quotient,
    betti_table,
    contradiction_witness,
    forced_index_sequence,
    homology_grassmannian,
    homology_unit_tangent,
    level_projection_multiplier,
    local_betti,
    morse_inequalities,
    projection_multiplier,
    smallest_admissible_prime,
    transfer_multiplier,
    verify_theorem_skeleton,
)
from .zermelo import MetricInvariants, ZermeloMetric, distortion, dual_norm, finsler_norm, katok_metric, reversibility

__all__ = [
    "__version__",
    "ClosedGeodesicRecord",
    "GeodesicState",
    "SearchResult",
    "Trajectory",
    "exact_flow",
    "exact_katok_geodesic",
    "find_closed_geodesics",
    "great_circle_record",
    "integrate_geodesic",
    "iterate_geodesic",
    "katok_closed_geodesics",
    "state_from_covector",
    "state_from_velocity",
    "BoundaryAmbiguous",
    "DegenerateMetric",
    "FGError",
    "IntegrationFailure",
    "InternalInconsistency",
    "InvalidInput",
    "InvalidMetric",
    "NumericalFailure",
    "IndexResult",
    "IndexSequence",
    "LinearizedReturnData",
    "bott_checks",
    "closed_geodesic_index",
    "count_conjugate_points",
    "gamma_invariant",
    "katok_index_formula",
    "linearized_return_data",
    "round_index",
    "ANCHORS",
    "Check",
    "VerificationReport",
    "GreatCircle",
    "KillingField",
    "SpherePoint",
    "TangentVector",
    "great_circle_curve",
    "killing_a_invariant",
    "killing_field",
    "killing_flow",
    "killing_sup_norm",
    "BettiTable",
    "DiagramWitness",
    "MorseData",
    "Space",
    "betti_free_loop",
    "betti_quotient",
    "betti_table",
    "contradiction_witness",
    "forced_index_sequence",
    "homology_grassmannian",
    "homology_unit_tangent",
    "level_projection_multiplier",
    "local_betti",
    "morse_inequalities",
    "projection_multiplier",
    "smallest_admissible_prime",
    "transfer_multiplier",
    "verify_theorem_skeleton",
    "MetricInvariants",
    "ZermeloMetric",
    "distortion",
    "dual_norm",
    "finsler_norm",
    "katok_metric",
    "reversibility",
]
