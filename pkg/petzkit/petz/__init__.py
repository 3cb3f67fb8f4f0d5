from .construction import (
    PseudoDiagonalCertificate,
    RankBoundedKraus,
    pure_case_reconstruction,
    rank_bounded_complement,
)
from .recovery import (
    RecoveryReport,
    fixed_point_projection,
    petz_recovery,
    restrict_to_average_support,
    reversibility_audit,
)
from .witness import max_entangled_overlap, peb_upper_certificate, schmidt_witness

__all__ = [
    "PseudoDiagonalCertificate",
    "RankBoundedKraus",
    "RecoveryReport",
    "fixed_point_projection",
    "max_entangled_overlap",
    "peb_upper_certificate",
    "petz_recovery",
    "pure_case_reconstruction",
    "rank_bounded_complement",
    "restrict_to_average_support",
    "reversibility_audit",
    "schmidt_witness",
]
