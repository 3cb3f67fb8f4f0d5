from .choi import (
    ChoiMatrix,
    choi_distance,
    choi_of_operators,
    from_choi,
    minimal_kraus,
    to_choi,
)
from .ensemble import Ensemble
from .equivalence import IsometricEquivalence, isometric_equivalence, transfer_reverse
from .kraus import KrausChannel, apply, dual_apply, kraus_ranks
from .library import (
    CHANNEL_BUILDERS,
    dephasing,
    depolarizing,
    identity,
    measure_prepare,
    named_channel,
    partial_trace_channel,
    replacement,
    trine,
    trine_vectors,
    unitary,
    weyl_operators,
)
from .overcomplete import pseudo_diagonal, rekraus
from .stinespring import StinespringIsometry, complementary, stinespring

__all__ = [
    "CHANNEL_BUILDERS",
    "ChoiMatrix",
    "Ensemble",
    "IsometricEquivalence",
    "KrausChannel",
    "StinespringIsometry",
    "apply",
    "choi_distance",
    "choi_of_operators",
    "complementary",
    "dephasing",
    "depolarizing",
    "dual_apply",
    "from_choi",
    "identity",
    "isometric_equivalence",
    "kraus_ranks",
    "measure_prepare",
    "minimal_kraus",
    "named_channel",
    "partial_trace_channel",
    "pseudo_diagonal",
    "rekraus",
    "replacement",
    "stinespring",
    "to_choi",
    "transfer_reverse",
    "trine",
    "trine_vectors",
    "unitary",
    "weyl_operators",
]
