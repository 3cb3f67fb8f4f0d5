from .channels import Ensemble, KrausChannel
from .config import DEFAULT_TOLERANCES, Tolerances
from .entropy import EntropyValue
from .matcore import DensityMatrix, HermitianOperator, PureStateVector

__all__ = [
    "DEFAULT_TOLERANCES",
    "DensityMatrix",
    "Ensemble",
    "EntropyValue",
    "HermitianOperator",
    "KrausChannel",
    "PureStateVector",
    "Tolerances",
]
__version__ = "0.1.0"
