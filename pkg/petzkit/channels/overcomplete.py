"""Channels built from overcomplete systems of vectors.

A family ``{ψ_i}`` is overcomplete when ``Σ_i |ψ_i⟩⟨ψ_i| = I``.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Sequence

import numpy as np

from ..config import DEFAULT_TOLERANCES, Tolerances
from ..exceptions import DimensionMismatchError, ValidationError
from ..matcore import eig_hermitian
from .kraus import KrausChannel

if TYPE_CHECKING:
    from numpy.typing import ArrayLike


def as_system(vectors: Sequence[ArrayLike] | np.ndarray) -> np.ndarray:
    """Stack vectors as the rows of a complex array."""
    system = np.array([np.asarray(v).reshape(-1) for v in vectors], dtype=np.complex128)
    if system.ndim != 2 or system.shape[0] == 0:
        raise ValidationError("An overcomplete system needs at least one vector")
    return system


def overcompleteness_residual(system: np.ndarray) -> float:
    """``max|Σ_i |ψ_i⟩⟨ψ_i| - I|`` for vectors stored as rows."""
    frame = system.T @ system.conj()
    return float(np.max(np.abs(frame - np.eye(system.shape[1]))))


def _check_overcomplete(system: np.ndarray, tol: float) -> None:
    residual = overcompleteness_residual(system)
    if residual > tol:
        raise ValidationError(
            f"System is not overcomplete: ‖Σ|ψ⟩⟨ψ| - I‖_max = {residual:.3e}",
            residual=residual,
        )


def rekraus(
    channel: KrausChannel,
    system: Sequence[ArrayLike] | np.ndarray,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> KrausChannel:
    """Re-express a channel through an overcomplete system of the environment.

    Args:
        channel:
            Channel with Kraus operators ``V_k``.
        system:
            Vectors ``ψ_i`` in the ``n_kraus``-dimensional environment with
            ``Σ_i |ψ_i⟩⟨ψ_i| = I``.
        tolerances:
            ``completeness`` bounds the overcompleteness residual.

    Returns:
        The same map with Kraus operators ``W_i = Σ_k ⟨ψ_i|k⟩ V_k``.
    """
    vectors = as_system(system)
    if vectors.shape[1] != channel.n_kraus:
        raise DimensionMismatchError(
            f"System vectors of dimension {vectors.shape[1]} do not match the "
            f"{channel.n_kraus} Kraus operators"
        )
    _check_overcomplete(vectors, tolerances.completeness)
    ops = np.einsum("ik,kab->iab", vectors.conj(), channel.kraus_ops)
    return KrausChannel.from_approximate(
        ops, tolerance=10 * tolerances.completeness, tolerances=tolerances
    )


def pseudo_diagonal(
    gram: ArrayLike,
    system: Sequence[ArrayLike] | np.ndarray,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> KrausChannel:
    """The channel ``Φ(ρ) = Σ_ij c_ij ⟨ψ_i|ρ|ψ_j⟩ |i⟩⟨j|``.

    Args:
        gram:
            PSD matrix ``c`` with unit diagonal (a Gram matrix of unit vectors).
        system:
            Overcomplete system ``{ψ_i}`` of the input space, one per row of
            ``c``.
        tolerances:
            ``support`` bounds the unit-diagonal and positivity checks,
            ``completeness`` the overcompleteness residual.
    """
    c = np.asarray(gram, dtype=np.complex128)
    vectors = as_system(system)
    n = vectors.shape[0]
    if c.shape != (n, n):
        raise DimensionMismatchError(
            f"Gram matrix of shape {c.shape} does not match {n} system vectors"
        )
    diagonal_error = float(np.max(np.abs(np.diag(c) - 1.0)))
    if diagonal_error > tolerances.support:
        raise ValidationError(
            f"Gram matrix does not have unit diagonal: deviation {diagonal_error:.3e}",
            residual=diagonal_error,
        )
    eigenvalues, eigenvectors = eig_hermitian((c + c.conj().T) / 2)
    if eigenvalues[0] < -tolerances.support:
        raise ValidationError(
            f"Gram matrix is not positive: smallest eigenvalue {eigenvalues[0]:.3e}",
            residual=float(-eigenvalues[0]),
        )
    _check_overcomplete(vectors, tolerances.completeness)

    keep = eigenvalues > tolerances.support * max(1.0, float(eigenvalues[-1]))
    # K_m = Σ_i √λ_m e_m[i] |i⟩⟨ψ_i|
    factors = eigenvectors[:, keep] * np.sqrt(eigenvalues[keep])
    ops = np.einsum("im,ia->mia", factors, vectors.conj())
    return KrausChannel.from_approximate(
        ops, tolerance=10 * tolerances.completeness, tolerances=tolerances
    )
