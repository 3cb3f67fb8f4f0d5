from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Sequence

import numpy as np
import scipy.linalg

from ..channels import KrausChannel, choi_distance, unitary
from ..entropy import EntropyValue, entropy_of_matrix
from ..exceptions import CovarianceError, DimensionMismatchError
from ..matcore import DensityMatrix, eig_hermitian, log2m_floor
from ..sampling import random_pure_state
from ._restarts import RestartOutcome, run_restarts, select_best
from .holevo import LOG_FLOOR, holevo_capacity
from .result import DEFAULT_OPTIONS, CapacityOptions, CapacityResult

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

logger = logging.getLogger(__name__)

COVARIANCE_TOL = 1e-8


def _output_entropy(channel: KrausChannel, psi: np.ndarray) -> float:
    return entropy_of_matrix(channel.apply_matrix(np.outer(psi, psi.conj())))


def _seesaw(
    channel: KrausChannel, psi: np.ndarray, opts: CapacityOptions
) -> tuple[np.ndarray, float, int, bool]:
    # H∘Φ is concave: the bottom eigenvector of its gradient -Φ*(log₂Φ(ψ))
    # never increases the output entropy
    value = _output_entropy(channel, psi)
    for iteration in range(1, opts.max_iterations + 1):
        output = channel.apply_matrix(np.outer(psi, psi.conj()))
        gradient = channel.dual_apply_matrix(log2m_floor(output, LOG_FLOOR))
        candidate = eig_hermitian((gradient + gradient.conj().T) / 2)[1][:, -1]
        candidate_value = _output_entropy(channel, candidate)
        if candidate_value < value:
            improvement = value - candidate_value
            psi, value = candidate, candidate_value
            if improvement > opts.tol:
                continue
        return psi, value, iteration, True
    return psi, value, opts.max_iterations, False


def min_output_entropy(
    channel: KrausChannel, opts: CapacityOptions = DEFAULT_OPTIONS
) -> CapacityResult:
    """Minimal output entropy ``H_min(Φ) = min_ρ H(Φ(ρ))``.

    ``H∘Φ`` is concave, so the minimum is attained at a pure input. Each
    restart runs a seesaw from a random pure state; the first restart also
    starts from every computational basis vector.
    """
    d = channel.dim_in

    def task(index: int, rng: np.random.Generator) -> RestartOutcome:
        starts = [random_pure_state(d, rng)]
        if index == 0:
            starts.extend(np.eye(d, dtype=np.complex128))
        runs = [_seesaw(channel, start, opts) for start in starts]
        psi, value, iterations, converged = min(runs, key=lambda run: run[1])
        return RestartOutcome(value, iterations, converged, psi)

    logger.info("Minimal output entropy of %r with %d restarts", channel, opts.restarts)
    outcomes = run_restarts(task, opts)
    best, history = select_best(outcomes, maximize=False)
    winner = outcomes[best]
    argmax = DensityMatrix.from_vector(winner.payload)  # type: ignore[arg-type]
    value = entropy_of_matrix(channel.apply_matrix(argmax.matrix))
    logger.info("Minimal output entropy %.9f (restart %d)", value, best)
    return CapacityResult(
        value=EntropyValue.finite(max(value, 0.0)),
        argmax=argmax,
        iterations=winner.iterations,
        restarts=len(outcomes),
        converged=winner.converged,
        history=history,
    )


@dataclass(frozen=True)
class CovarianceReport:
    """Check of ``C̄(Φ) = log₂ d - H_min(Φ)`` for an irreducibly covariant channel.

    Attributes:
        holevo:
            Result of :func:`~petzkit.capacity.holevo_capacity`.
        min_output:
            Result of :func:`min_output_entropy`.
        dim:
            Input dimension ``d``.
        residual:
            ``|C̄(Φ) - (log₂ d - H_min(Φ))|``.
    """

    holevo: CapacityResult
    min_output: CapacityResult
    dim: int
    residual: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "holevo_capacity": self.holevo.value.value,
            "min_output_entropy": self.min_output.value.value,
            "log_dim": math.log2(self.dim),
            "residual": self.residual,
            "converged": self.holevo.converged and self.min_output.converged,
        }


def commutant_dimension(unitaries: Sequence[ArrayLike], tol: float = 1e-8) -> int:
    """Dimension of ``{X : XU = UX for all U}``."""
    mats = [np.asarray(u, dtype=np.complex128) for u in unitaries]
    identity = np.eye(mats[0].shape[0])
    # row-major vec: vec(UX) = (U ⊗ I) vec X, vec(XU) = (I ⊗ Uᵀ) vec X
    equations = np.concatenate(
        [np.kron(u, identity) - np.kron(identity, u.T) for u in mats]
    )
    return int(scipy.linalg.null_space(equations, rcond=tol).shape[1])


def covariance_relation_check(
    channel: KrausChannel,
    group_unitaries: Sequence[ArrayLike],
    opts: CapacityOptions = DEFAULT_OPTIONS,
) -> CovarianceReport:
    """Verify the covariance identity ``C̄(Φ) = log₂ d - H_min(Φ)``.

    Args:
        channel:
            A channel with equal input and output dimension.
        group_unitaries:
            Unitaries ``U`` with ``Φ(UρU†) = UΦ(ρ)U†``, acting irreducibly.
        opts:
            Optimizer settings for both sides of the identity.

    Raises:
        CovarianceError: if a unitary does not commute with the channel (the
            error carries its index) or the unitaries act reducibly.
    """
    if channel.dim_in != channel.dim_out:
        raise DimensionMismatchError(
            f"Covariance needs equal dimensions, got {channel.dim_in} -> "
            f"{channel.dim_out}"
        )
    if not group_unitaries:
        raise CovarianceError("At least one unitary is needed")
    for index, u in enumerate(group_unitaries):
        rotation = unitary(u)
        distance = choi_distance(channel.compose(rotation), rotation.compose(channel))
        if distance > COVARIANCE_TOL:
            raise CovarianceError(
                f"Channel is not covariant under unitary {index} "
                f"(Choi distance {distance:.3e})",
                index=index,
            )
    dimension = commutant_dimension(group_unitaries, COVARIANCE_TOL)
    if dimension != 1:
        raise CovarianceError(
            f"Unitaries act reducibly: their commutant has dimension {dimension}"
        )

    holevo = holevo_capacity(channel, opts)
    min_output = min_output_entropy(channel, opts)
    d = channel.dim_in
    residual = abs(float(holevo.value) - (math.log2(d) - float(min_output.value)))
    logger.info("Covariance identity residual %.3e", residual)
    return CovarianceReport(holevo, min_output, d, residual)
