from __future__ import annotations

from typing import Literal, TypeAlias

import numpy as np

# Dense complex matrices are plain numpy arrays of shape (rows, cols).
ComplexMatrix: TypeAlias = np.ndarray

# Bipartite dimensions (dA, dB). Subsystem A varies slowest in every tensor
# product, i.e. index (a, b) of A⊗B lives at a * dB + b.
Dims: TypeAlias = tuple[int, int]

# Which factor of a bipartite operator to keep.
Subsystem: TypeAlias = Literal["A", "B"]
