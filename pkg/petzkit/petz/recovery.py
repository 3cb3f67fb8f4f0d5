from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np
import scipy.linalg

from ..channels import Ensemble, KrausChannel
from ..config import DEFAULT_TOLERANCES, Tolerances
from ..entropy import EntropyValue, holevo, holevo_image
from ..matcore import (
    DensityMatrix,
    eig_hermitian,
    inv_sqrtm_psd,
    sqrtm_psd,
    support_basis,
    trace_norm,
)

if TYPE_CHECKING:
    from .._types import ComplexMatrix

logger = logging.getLogger(__name__)


def petz_recovery(
    channel: KrausChannel,
    sigma: DensityMatrix,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> KrausChannel:
    """Petz recovery channel of ``channel`` at the state ``sigma``.

    ``Θ_σ(X) = σ^{1/2} Φ*(Φ(σ)^{-1/2} X Φ(σ)^{-1/2}) σ^{1/2}``, with the inverse
    square root taken on the support of ``Φ(σ)``. Inputs off that support are
    sent to ``σ`` itself, so ``Θ_σ`` is trace preserving everywhere and
    ``Θ_σ(Φ(σ)) = σ`` holds exactly.

    Args:
        channel:
            The channel ``Φ``.
        sigma:
            The reference state ``σ``.
        tolerances:
            ``support`` defines the support of ``Φ(σ)``.
    """
    image = channel.apply_matrix(sigma.matrix)
    root = sqrtm_psd(sigma.matrix)
    inverse_root = inv_sqrtm_psd(image, tolerances.support)
    # R_k = σ^{1/2} V_k† Φ(σ)^{-1/2}
    ops = [root @ v.conj().T @ inverse_root for v in channel.kraus_ops]

    eigenvalues, eigenvectors = eig_hermitian(image)
    scale = float(np.max(eigenvalues))
    kernel = eigenvectors[:, eigenvalues <= tolerances.support * scale]
    if kernel.shape[1]:
        s_values, s_vectors = eig_hermitian(sigma)
        weighted = s_vectors[:, s_values > 0] * np.sqrt(s_values[s_values > 0])
        ops.extend(np.outer(e, f.conj()) for f in kernel.T for e in weighted.T)
    return KrausChannel.from_approximate(
        ops, tolerance=tolerances.construction_fail, tolerances=tolerances
    )


@dataclass(frozen=True)
class RecoveryReport:
    """Numerical verdict on the equality case of Holevo-quantity monotonicity.

    Attributes:
        chi_in:
            Holevo quantity of the ensemble.
        chi_out:
            Holevo quantity of the image ensemble.
        gap:
            ``chi_in - chi_out``.
        per_state_residuals:
            ``‖Θ_ρ̄(Φ(ρ_i)) - ρ_i‖₁`` with ``Θ_ρ̄`` the Petz recovery channel
            at the average state.
        reversible:
            Whether every residual is at most ``tolerances.reversible``.
        support_rank:
            Rank of the average state.
        dim:
            Dimension of the input space.
    """

    chi_in: EntropyValue
    chi_out: EntropyValue
    gap: float
    per_state_residuals: tuple[float, ...]
    reversible: bool
    support_rank: int
    dim: int

    @property
    def max_residual(self) -> float:
        return max(self.per_state_residuals)

    @property
    def restricted(self) -> bool:
        """Whether the audit ran on the support of a rank-deficient average."""
        return self.support_rank < self.dim

    def as_dict(self) -> dict[str, Any]:
        data = dataclasses.asdict(self)
        data["chi_in"] = self.chi_in.value
        data["chi_out"] = self.chi_out.value
        data["per_state_residuals"] = list(self.per_state_residuals)
        data["max_residual"] = self.max_residual
        data["restricted"] = self.restricted
        return data


def restrict_to_average_support(
    channel: KrausChannel,
    ens: Ensemble,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[KrausChannel, Ensemble, ComplexMatrix | None]:
    """Restrict a channel and an ensemble to the support of the average state.

    Returns:
        The restricted channel, the restricted ensemble and the isometry ``P``
        onto the support, or the inputs unchanged and ``None`` if the average
        has full rank.
    """
    basis = support_basis(ens.average().matrix, tolerances.support)
    if basis.shape[1] == ens.dim:
        return channel, ens, None
    logger.warning(
        "Average state has rank %d < %d; restricting to its support",
        basis.shape[1],
        ens.dim,
    )
    return channel.restrict(basis), ens.restrict(basis), basis


def reversibility_audit(
    channel: KrausChannel,
    ens: Ensemble,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> RecoveryReport:
    """Decide whether ``channel`` preserves the Holevo quantity of ``ens``.

    The channel is reversible on the ensemble exactly when the Petz recovery
    channel at the average state recovers every member. A rank-deficient
    average is handled by restricting everything to its support.

    Args:
        channel:
            The channel ``Φ``.
        ens:
            The ensemble ``{π_i, ρ_i}``.
        tolerances:
            ``reversible`` is the trace-norm threshold of the verdict.
    """
    restricted_channel, restricted_ens, _ = restrict_to_average_support(
        channel, ens, tolerances
    )
    chi_in = holevo(restricted_ens)
    chi_out = holevo_image(restricted_channel, restricted_ens)
    average = restricted_ens.average()
    recovery = petz_recovery(restricted_channel, average, tolerances)

    residuals = []
    for state in restricted_ens.states:
        recovered = recovery.apply_matrix(restricted_channel.apply_matrix(state.matrix))
        residuals.append(trace_norm(recovered - state.matrix))
    reversible = max(residuals) <= tolerances.reversible
    gap = float(chi_in) - float(chi_out)
    logger.info(
        "Reversibility audit: chi_in=%.6f chi_out=%.6f gap=%.3e "
        "max residual=%.3e (%s)",
        float(chi_in),
        float(chi_out),
        gap,
        max(residuals),
        "reversible" if reversible else "not reversible",
    )
    return RecoveryReport(
        chi_in=chi_in,
        chi_out=chi_out,
        gap=gap,
        per_state_residuals=tuple(residuals),
        reversible=reversible,
        support_rank=average.dim,
        dim=ens.dim,
    )


def fixed_point_projection(channel: KrausChannel, tol: float = 1e-9) -> ComplexMatrix:
    """Projection onto the fixed points of a channel ``T`` with equal in/out dims.

    Returns the Liouville matrix (acting on row-major vectorized operators) of
    the spectral projection ``E = R (L†R)^{-1} L†`` onto the eigenvalue ``1``
    of ``T``, built from right and left null spaces of ``T - id``.
    """
    if channel.dim_in != channel.dim_out:
        raise ValueError(
            f"Fixed points need equal dimensions, got {channel.dim_in} -> "
            f"{channel.dim_out}"
        )
    shifted = channel.liouville() - np.eye(channel.dim_in**2)
    right = scipy.linalg.null_space(shifted, rcond=tol)
    left = scipy.linalg.null_space(shifted.conj().T, rcond=tol)
    if right.shape[1] != left.shape[1] or right.shape[1] == 0:
        raise ValueError(
            f"Fixed-point space is not well conditioned: {right.shape[1]} right "
            f"and {left.shape[1]} left eigenvectors"
        )
    return right @ np.linalg.solve(left.conj().T @ right, left.conj().T)
