from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import scipy.linalg

from ..config import DEFAULT_TOLERANCES, Tolerances
from ..exceptions import DimensionMismatchError, ValidationError
from ..matcore import DensityMatrix, eig_hermitian, support_basis
from .choi import choi_of_operators
from .kraus import KrausChannel

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from .._types import ComplexMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IsometricEquivalence:
    """Outcome of an isometric equivalence test between ``Φ`` and ``Φ′``.

    Attributes:
        partial_isometry:
            ``W`` with ``Φ′ = WΦ(·)W†`` and ``Φ = W†Φ′(·)W``, or ``None`` if
            no such ``W`` was found within tolerance.
        forward_residual:
            Choi distance between ``Φ′`` and ``WΦ(·)W†`` for the best
            candidate ``W`` (a spectral lower bound when no candidate exists).
        backward_residual:
            Choi distance between ``Φ`` and ``W†Φ′(·)W``.
    """

    partial_isometry: ComplexMatrix | None
    forward_residual: float
    backward_residual: float

    @property
    def equivalent(self) -> bool:
        return self.partial_isometry is not None

    @property
    def residual(self) -> float:
        return max(self.forward_residual, self.backward_residual)


def _spectral_residual(first: KrausChannel, second: KrausChannel) -> float:
    # the nonzero Choi spectrum is invariant under output partial isometries
    a = np.sort(eig_hermitian(choi_of_operators(first.kraus_ops))[0])[::-1]
    b = np.sort(eig_hermitian(choi_of_operators(second.kraus_ops))[0])[::-1]
    size = max(a.size, b.size)
    a = np.pad(a, (0, size - a.size))
    b = np.pad(b, (0, size - b.size))
    return float(np.linalg.norm(a - b))


def _compressed_images(channel: KrausChannel, basis: np.ndarray) -> np.ndarray:
    """``P† Φ(|i⟩⟨j|) P`` for all ``i, j``, shape ``(d, d, s, s)``."""
    ops = channel.kraus_ops
    images = np.einsum("kai,kbj->ijab", ops, ops.conj())
    return np.einsum("ax,ijab,by->ijxy", basis.conj(), images, basis)


def isometric_equivalence(
    first: KrausChannel,
    second: KrausChannel,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    seed: int = 0,
) -> IsometricEquivalence:
    """Search for a partial isometry relating the outputs of two channels.

    Both channels are compressed to the supports ``S``, ``S′`` of their images
    of the maximally mixed state. An invertible ``T`` with
    ``T X_ij = X′_ij T`` for all compressed images ``X_ij`` of matrix units is
    taken from the null space of the intertwining equations; its polar part
    ``U`` gives ``W = P′ U P†``. Both directions are then verified in Choi
    distance against ``tolerances.equivalence``.

    Args:
        first:
            The channel ``Φ``.
        second:
            The channel ``Φ′``.
        tolerances:
            ``support`` defines the output supports, ``equivalence`` is the
            accepted Choi distance.
        seed:
            Seed for the random combination of intertwiners.
    """
    if first.dim_in != second.dim_in:
        raise DimensionMismatchError(
            f"Channels have different input dimensions {first.dim_in} and "
            f"{second.dim_in}"
        )
    d = first.dim_in
    mixed = DensityMatrix.maximally_mixed(d)
    basis = support_basis(first.apply_matrix(mixed.matrix), tolerances.support)
    basis_other = support_basis(second.apply_matrix(mixed.matrix), tolerances.support)
    s, s_other = basis.shape[1], basis_other.shape[1]
    if s != s_other:
        residual = _spectral_residual(first, second)
        logger.info(
            "Output supports have dimensions %d and %d; channels are not "
            "isometrically equivalent (spectral residual %.3e)",
            s,
            s_other,
            residual,
        )
        return IsometricEquivalence(None, residual, residual)

    x = _compressed_images(first, basis).reshape(d * d, s, s)
    y = _compressed_images(second, basis_other).reshape(d * d, s, s)
    identity = np.eye(s)
    # row-major vec: vec(T X) = (I ⊗ Xᵀ) vec T, vec(Y T) = (Y ⊗ I) vec T
    equations = np.concatenate(
        [np.kron(identity, xi.T) - np.kron(yi, identity) for xi, yi in zip(x, y)]
    )
    _, singular_values, vh = np.linalg.svd(equations)
    scale = max(1.0, float(singular_values[0]))
    null = vh[singular_values <= 1e-9 * scale].conj()
    if null.shape[0] == 0:
        null = vh[-1:].conj()
    rng = np.random.default_rng(seed)
    coefficients = rng.standard_normal(null.shape[0]) + 1j * rng.standard_normal(
        null.shape[0]
    )
    t = (coefficients @ null).reshape(s, s)
    u, _ = scipy.linalg.polar(t)
    w = basis_other @ u @ basis.conj().T

    forward = float(
        np.linalg.norm(
            choi_of_operators(w @ first.kraus_ops)
            - choi_of_operators(second.kraus_ops)
        )
    )
    backward = float(
        np.linalg.norm(
            choi_of_operators(w.conj().T @ second.kraus_ops)
            - choi_of_operators(first.kraus_ops)
        )
    )
    equivalent = max(forward, backward) <= tolerances.equivalence
    logger.debug(
        "Isometric equivalence residuals %.3e / %.3e (%s)",
        forward,
        backward,
        "equivalent" if equivalent else "not equivalent",
    )
    return IsometricEquivalence(w if equivalent else None, forward, backward)


def transfer_reverse(
    reverse: KrausChannel,
    partial_isometry: ArrayLike,
    sigma: DensityMatrix,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> KrausChannel:
    """Carry a reverse channel of ``Φ`` over to ``Φ′ = WΦ(·)W†``.

    Returns ``Ψ∘Θ`` with ``Θ(X) = W†XW + σ Tr[(I - WW†)X]``, which reverses
    ``Φ′`` on every set of states ``Ψ`` reverses ``Φ`` on.

    Args:
        reverse:
            The channel ``Ψ`` from the output of ``Φ`` back to its input.
        partial_isometry:
            ``W`` from the output of ``Φ`` to the output of ``Φ′``.
        sigma:
            State on the output of ``Φ`` that absorbs the complement of the
            range of ``W``.
        tolerances:
            ``completeness`` bounds ``max|WW†W - W|``.
    """
    w = np.asarray(partial_isometry, dtype=np.complex128)
    residual = float(np.max(np.abs(w @ w.conj().T @ w - w)))
    if residual > tolerances.completeness:
        raise ValidationError(
            f"W is not a partial isometry: ‖WW†W - W‖_max = {residual:.3e}",
            residual=residual,
        )
    if w.shape[1] != reverse.dim_in or sigma.dim != reverse.dim_in:
        raise DimensionMismatchError(
            f"W of shape {w.shape} and σ of dimension {sigma.dim} do not match a "
            f"reverse channel with input dimension {reverse.dim_in}"
        )
    eigenvalues, eigenvectors = eig_hermitian(sigma)
    weighted = eigenvectors[:, eigenvalues > 0] * np.sqrt(eigenvalues[eigenvalues > 0])
    complement = scipy.linalg.null_space(w.conj().T)
    ops = [w.conj().T]
    for f in complement.T:
        ops.extend(np.outer(e, f.conj()) for e in weighted.T)
    theta = KrausChannel.from_approximate(
        ops, tolerance=10 * tolerances.completeness, tolerances=tolerances
    )
    return reverse.compose(theta)
