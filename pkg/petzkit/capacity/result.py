from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Union

import numpy as np

from ..channels import Ensemble
from ..config import DEFAULT_TOLERANCES
from ..exceptions import ValidationError
from ..matcore import DensityMatrix, HermitianOperator, eig_hermitian

if TYPE_CHECKING:
    from ..entropy import EntropyValue

Maximizer = Union[Ensemble, DensityMatrix]


@dataclass(frozen=True)
class CapacityOptions:
    """Settings shared by the capacity optimizers.

    Args:
        tol:
            Convergence threshold on the certified gap (Blahut-Arimoto) or on
            the change of the objective between iterations (other optimizers).
        restarts:
            Number of independently seeded restarts.
        max_iterations:
            Iteration cap per restart.
        seed:
            Root seed; restart ``i`` draws from the ``i``-th spawned child.
        n_workers:
            Restarts run on a thread pool of this size when above one.
        prune:
            Ensemble weights below this value are dropped.
    """

    tol: float = 1e-8
    restarts: int = 16
    max_iterations: int = 1000
    seed: int = 0
    n_workers: int = 1
    prune: float = 1e-12

    def __post_init__(self) -> None:
        if self.restarts < 1:
            raise ValueError(f"restarts must be positive, got {self.restarts}")
        if self.max_iterations < 1:
            raise ValueError(
                f"max_iterations must be positive, got {self.max_iterations}"
            )
        if self.n_workers < 1:
            raise ValueError(f"n_workers must be positive, got {self.n_workers}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")


DEFAULT_OPTIONS = CapacityOptions()


@dataclass(frozen=True)
class CapacityResult:
    """Outcome of a capacity optimization.

    Attributes:
        value:
            The optimal value found, in bits.
        argmax:
            The ensemble or state attaining ``value``.
        iterations:
            Iterations used by the winning restart.
        restarts:
            Number of restarts run.
        converged:
            Whether the winning restart met its convergence criterion.
        history:
            Best value over the restarts run so far, one entry per restart.
    """

    value: EntropyValue
    argmax: Maximizer
    iterations: int
    restarts: int
    converged: bool
    history: tuple[float, ...]

    def as_dict(self) -> dict[str, Any]:
        return {
            "value": self.value.value,
            "iterations": self.iterations,
            "restarts": self.restarts,
            "converged": self.converged,
            "history": list(self.history),
        }


class EnergyConstraint:
    """The constraint ``Tr Hρ ≤ h`` on input states.

    Args:
        hamiltonian:
            Positive semidefinite ``H``.
        bound:
            Nonnegative ``h``.
    """

    __slots__ = ("bound", "hamiltonian")

    def __init__(self, hamiltonian: HermitianOperator, bound: float) -> None:
        eigenvalues, _ = eig_hermitian(hamiltonian)
        clamp = DEFAULT_TOLERANCES.psd_clamp * max(1.0, float(np.max(eigenvalues)))
        if eigenvalues[0] < -clamp:
            raise ValidationError(
                f"Hamiltonian must be positive semidefinite, smallest eigenvalue "
                f"{eigenvalues[0]:.3e}"
            )
        if bound < 0:
            raise ValidationError(f"Energy bound must be nonnegative, got {bound!r}")
        self.hamiltonian = hamiltonian
        self.bound = float(bound)

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    def energy(self, rho: DensityMatrix) -> float:
        """``Tr Hρ``."""
        return float(np.real(np.trace(self.hamiltonian.matrix @ rho.matrix)))

    def ground_energy(self) -> float:
        return float(eig_hermitian(self.hamiltonian)[0][0])

    def __repr__(self) -> str:
        return f"EnergyConstraint(dim={self.dim}, bound={self.bound})"
