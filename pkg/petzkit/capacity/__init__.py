from .convex_roof import (
    EntanglementBreakingReport,
    GapIdentityReport,
    constrained_holevo,
    eb_equality_diagnostic,
    gap_identity_check,
    snap_to_fixed_points,
)
from .energy import (
    EnergyConstrainedCapacities,
    energy_constrained_capacities,
    entanglement_assisted,
)
from .holevo import holevo_capacity
from .output_entropy import (
    CovarianceReport,
    commutant_dimension,
    covariance_relation_check,
    min_output_entropy,
)
from .result import (
    DEFAULT_OPTIONS,
    CapacityOptions,
    CapacityResult,
    EnergyConstraint,
)

__all__ = [
    "DEFAULT_OPTIONS",
    "CapacityOptions",
    "CapacityResult",
    "CovarianceReport",
    "EnergyConstrainedCapacities",
    "EnergyConstraint",
    "EntanglementBreakingReport",
    "GapIdentityReport",
    "commutant_dimension",
    "constrained_holevo",
    "covariance_relation_check",
    "eb_equality_diagnostic",
    "energy_constrained_capacities",
    "entanglement_assisted",
    "gap_identity_check",
    "holevo_capacity",
    "min_output_entropy",
    "snap_to_fixed_points",
]
