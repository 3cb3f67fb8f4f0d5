from __future__ import annotations

from typing import TYPE_CHECKING, Iterator, Sequence

import numpy as np

from ..exceptions import DimensionMismatchError, ValidationError
from ..matcore import DensityMatrix, eig_hermitian, numerical_rank

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from .kraus import KrausChannel


class Ensemble:
    """A finite ensemble ``{π_i, ρ_i}`` of states.

    Finitely supported probability measures on the state space are
    represented the same way.

    Args:
        items:
            Pairs ``(probability, state)``. Probabilities must be positive
            and sum to one within ``1e-12``.
    """

    __slots__ = ("_probabilities", "_states")

    def __init__(self, items: Sequence[tuple[float, DensityMatrix]]) -> None:
        if len(items) == 0:
            raise ValidationError("An ensemble needs at least one state")
        probabilities = np.array([float(p) for p, _ in items])
        states = tuple(state for _, state in items)
        if np.any(probabilities <= 0) or not np.all(np.isfinite(probabilities)):
            raise ValidationError(
                f"Ensemble probabilities must be positive, got {probabilities.tolist()}"
            )
        total = float(np.sum(probabilities))
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(
                f"Ensemble probabilities sum to {total!r}, not 1",
                residual=abs(total - 1.0),
            )
        dims = {state.dim for state in states}
        if len(dims) != 1:
            raise DimensionMismatchError(
                f"Ensemble states have different dimensions {sorted(dims)}"
            )
        probabilities.setflags(write=False)
        self._probabilities = probabilities
        self._states = states

    @classmethod
    def from_weights(
        cls, weights: ArrayLike, states: Sequence[DensityMatrix | ArrayLike]
    ) -> Ensemble:
        """Build an ensemble from nonnegative weights, normalizing them.

        Entries with zero weight are dropped.
        """
        w = np.asarray(weights, dtype=np.float64)
        if len(w) != len(states):
            raise ValidationError(
                f"Got {len(w)} weights for {len(states)} states"
            )
        if np.any(w < 0) or not np.any(w > 0):
            raise ValidationError("Weights must be nonnegative and not all zero")
        w = w / np.sum(w)
        items = [
            (float(p), s if isinstance(s, DensityMatrix) else DensityMatrix(s))
            for p, s in zip(w, states)
            if p > 0
        ]
        return cls(items)

    @classmethod
    def from_vectors(
        cls, weights: ArrayLike, vectors: Sequence[ArrayLike]
    ) -> Ensemble:
        """Ensemble of pure states given by (not necessarily normalized) vectors."""
        states = [
            DensityMatrix.from_vector(np.asarray(v) / np.linalg.norm(v))
            for v in vectors
        ]
        return cls.from_weights(weights, states)

    @property
    def probabilities(self) -> np.ndarray:
        return self._probabilities

    @property
    def states(self) -> tuple[DensityMatrix, ...]:
        return self._states

    @property
    def dim(self) -> int:
        return self._states[0].dim

    def __len__(self) -> int:
        return len(self._states)

    def __iter__(self) -> Iterator[tuple[float, DensityMatrix]]:
        return iter(zip(self._probabilities.tolist(), self._states))

    def average(self) -> DensityMatrix:
        """The average state ``ρ̄ = Σ_i π_i ρ_i``."""
        stacked = np.stack([state.matrix for state in self._states])
        return DensityMatrix(np.einsum("i,iab->ab", self._probabilities, stacked))

    def map(self, channel: KrausChannel) -> Ensemble:
        """The image ensemble ``{π_i, Φ(ρ_i)}``."""
        return Ensemble([(p, channel.apply(state)) for p, state in self])

    def restrict(self, isometry: ArrayLike) -> Ensemble:
        """Compress every state with ``P†ρ_iP``.

        ``P`` is an isometry onto a subspace containing all supports.
        """
        p = np.asarray(isometry)
        states = []
        for state in self._states:
            compressed = p.conj().T @ state.matrix @ p
            states.append(DensityMatrix(compressed / np.real(np.trace(compressed))))
        return Ensemble(list(zip(self._probabilities.tolist(), states)))

    def ranks(self, tol: float = 1e-8) -> list[int]:
        """Numerical rank of every state."""
        return [numerical_rank(state.matrix, tol) for state in self._states]

    def is_pure(self, tol: float = 1e-8) -> bool:
        return all(rank <= 1 for rank in self.ranks(tol))

    def pure_vectors(self) -> list[np.ndarray]:
        """Top eigenvector of every state (its vector when the state is pure)."""
        return [eig_hermitian(state)[1][:, -1] for state in self._states]

    def __repr__(self) -> str:
        return f"Ensemble({len(self)} states, dim={self.dim})"
