"""Entropic functionals, in bits.

Relative entropies are infinite exactly when the support condition fails;
that outcome is a value (:meth:`EntropyValue.infinite`), not an error.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .channels import Ensemble, complementary
from .config import DEFAULT_TOLERANCES, Tolerances
from .exceptions import DimensionMismatchError, NumericalError, SupportError
from .matcore import (
    DensityMatrix,
    eig_hermitian,
    log2m,
    partial_trace,
    purify,
    support_projector,
    tensor,
)

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from ._types import Dims
    from .channels import KrausChannel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EntropyValue:
    """An entropic quantity in bits, possibly ``+∞``.

    Attributes:
        value:
            The finite value, or ``None`` for ``+∞``.
    """

    value: float | None

    @classmethod
    def finite(cls, value: float) -> EntropyValue:
        return cls(float(value))

    @classmethod
    def infinite(cls) -> EntropyValue:
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def __float__(self) -> float:
        return math.inf if self.value is None else self.value

    def __str__(self) -> str:
        return "inf" if self.value is None else f"{self.value:.6f}"


def entropy_of_spectrum(eigenvalues: ArrayLike) -> float:
    """``-Σ λ log₂ λ`` over the positive entries."""
    lam = np.asarray(eigenvalues, dtype=np.float64)
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log2(lam))) + 0.0


def entropy_of_matrix(matrix: ArrayLike) -> float:
    """Von Neumann entropy of a PSD matrix, without validation."""
    return entropy_of_spectrum(eig_hermitian(matrix)[0])


def vn_entropy(rho: DensityMatrix) -> EntropyValue:
    """Von Neumann entropy ``H(ρ) = -Tr ρ log₂ ρ``."""
    return EntropyValue.finite(max(entropy_of_matrix(rho.matrix), 0.0))


def _supported(rho: np.ndarray, sigma: np.ndarray, tol: float) -> bool:
    outside = np.eye(sigma.shape[0]) - support_projector(sigma, tol)
    compressed = outside @ rho @ outside
    return float(np.max(eig_hermitian(compressed)[0])) <= tol


def relative_entropy_of_matrices(rho: ArrayLike, sigma: ArrayLike) -> float:
    """``Tr ρ (log₂ρ - log₂σ)`` with logarithms taken on supports.

    The caller is responsible for ``supp ρ ⊆ supp σ``.
    """
    r = np.asarray(rho)
    value = np.real(np.trace(r @ (log2m(r) - log2m(sigma))))
    return float(value)


def rel_entropy(
    rho: DensityMatrix,
    sigma: DensityMatrix,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> EntropyValue:
    """Relative entropy ``H(ρ‖σ)``.

    ``+∞`` when ``ρ`` has weight above ``tolerances.support`` on a direction
    where ``σ`` is below ``tolerances.support · λ_max(σ)``.
    """
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(
            f"Cannot compare states of dimension {rho.dim} and {sigma.dim}"
        )
    sigma_values, sigma_vectors = eig_hermitian(sigma)
    if not _supported(rho.matrix, sigma.matrix, tolerances.support):
        return EntropyValue.infinite()
    scale = float(np.max(sigma_values))
    keep = sigma_values > tolerances.support * scale
    log_sigma = (sigma_vectors[:, keep] * np.log2(sigma_values[keep])) @ sigma_vectors[
        :, keep
    ].conj().T
    value = np.real(np.trace(rho.matrix @ (log2m(rho.matrix) - log_sigma)))
    return EntropyValue.finite(max(float(value), 0.0))


def holevo_terms(probabilities: np.ndarray, states: np.ndarray) -> tuple[float, float]:
    """Both forms of the Holevo quantity for stacked state matrices.

    Returns:
        ``(Σ_i π_i H(ρ_i‖ρ̄), H(ρ̄) - Σ_i π_i H(ρ_i))``.
    """
    average = np.einsum("i,iab->ab", probabilities, states)
    log_average = log2m(average)
    relative = 0.0
    entropies = 0.0
    for p, state in zip(probabilities, states):
        h = entropy_of_matrix(state)
        entropies += p * h
        relative += p * (-h - float(np.real(np.trace(state @ log_average))))
    return relative, entropy_of_matrix(average) - entropies


def holevo(ens: Ensemble, tol: float = 1e-9) -> EntropyValue:
    """Holevo quantity ``χ = Σ_i π_i H(ρ_i‖ρ̄)``.

    The entropy-difference form ``H(ρ̄) - Σ_i π_i H(ρ_i)`` is evaluated as
    well; the two must agree within ``tol``.

    Raises:
        NumericalError: if the two forms disagree.
    """
    states = np.stack([state.matrix for state in ens.states])
    relative, difference = holevo_terms(ens.probabilities, states)
    if abs(relative - difference) > tol:
        raise NumericalError(
            f"Holevo quantity forms disagree: {relative!r} vs {difference!r}"
        )
    return EntropyValue.finite(max(relative, 0.0))


def holevo_image(channel: KrausChannel, ens: Ensemble) -> EntropyValue:
    """Holevo quantity of the image ensemble ``{π_i, Φ(ρ_i)}``."""
    if ens.dim != channel.dim_in:
        raise DimensionMismatchError(
            f"Ensemble of dimension {ens.dim} does not match channel input "
            f"dimension {channel.dim_in}"
        )
    return holevo(ens.map(channel))


def cond_entropy(rho_ab: DensityMatrix, dims: Dims) -> EntropyValue:
    """Conditional entropy ``H(A|B) = H(ρ_AB) - H(ρ_B)``."""
    if rho_ab.dim != dims[0] * dims[1]:
        raise DimensionMismatchError(
            f"State of dimension {rho_ab.dim} does not live on {dims[0]}x{dims[1]}"
        )
    marginal = partial_trace(rho_ab, dims, keep="B")
    return EntropyValue.finite(
        entropy_of_matrix(rho_ab.matrix) - entropy_of_matrix(marginal)
    )


def _check_channel_input(channel: KrausChannel, rho: DensityMatrix) -> None:
    if rho.dim != channel.dim_in:
        raise DimensionMismatchError(
            f"State of dimension {rho.dim} does not match channel input "
            f"dimension {channel.dim_in}"
        )


def mutual_info_terms(
    channel: KrausChannel, complement: KrausChannel, rho: ArrayLike
) -> tuple[float, float, float]:
    """``(H(ρ), H(Φ(ρ)), H(Φ̂(ρ)))`` for an unvalidated input matrix."""
    return (
        entropy_of_matrix(rho),
        entropy_of_matrix(channel.apply_matrix(rho)),
        entropy_of_matrix(complement.apply_matrix(rho)),
    )


def mutual_info(
    channel: KrausChannel, rho: DensityMatrix, tol: float = 1e-8
) -> EntropyValue:
    """Quantum mutual information ``I(Φ,ρ) = H(ρ) + H(Φ(ρ)) - H(Φ̂(ρ))``.

    Cross-checked against ``H(Φ⊗Id(|φ_ρ⟩⟨φ_ρ|) ‖ Φ(ρ)⊗ϱ)`` with ``φ_ρ`` a
    purification of ``ρ`` and ``ϱ`` its reference marginal.

    Raises:
        NumericalError: if the two expressions differ by more than ``tol``.
    """
    _check_channel_input(channel, rho)
    h_in, h_out, h_env = mutual_info_terms(channel, complementary(channel), rho.matrix)
    value = h_in + h_out - h_env

    d = rho.dim
    purification = purify(rho).projector()
    joint = channel.apply_extended(purification, d)
    reference = partial_trace(purification, (d, d), keep="B")
    product = tensor(channel.apply_matrix(rho.matrix), reference)
    relative = relative_entropy_of_matrices(joint.matrix, product)
    if abs(relative - value) > tol:
        raise NumericalError(
            f"Mutual information forms disagree: {value!r} vs {relative!r}"
        )
    return EntropyValue.finite(max(value, 0.0))


def coherent_info(channel: KrausChannel, rho: DensityMatrix) -> EntropyValue:
    """Coherent information ``I_c(Φ,ρ) = H(Φ(ρ)) - H(Φ̂(ρ))``."""
    _check_channel_input(channel, rho)
    _, h_out, h_env = mutual_info_terms(channel, complementary(channel), rho.matrix)
    return EntropyValue.finite(h_out - h_env)


def entropy_gain(channel: KrausChannel, rho: DensityMatrix) -> EntropyValue:
    """``H(Φ(ρ)) - H(ρ)``, a convex function of ``ρ``."""
    _check_channel_input(channel, rho)
    return EntropyValue.finite(
        entropy_of_matrix(channel.apply_matrix(rho.matrix))
        - entropy_of_matrix(rho.matrix)
    )


def donald_residual(
    rho: DensityMatrix,
    sigma: DensityMatrix,
    t: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Residual of Donald's identity for the mixture ``σ_t = tρ + (1-t)σ``.

    Returns::

        tH(ρ‖σ) + (1-t)H(σ‖σ) - [tH(ρ‖σ_t) + (1-t)H(σ‖σ_t) + H(σ_t‖σ)]

    Raises:
        SupportError: if any of the five relative entropies is infinite.
    """
    if not 0 < t < 1:
        raise ValueError(f"t must lie in (0, 1), got {t!r}")
    sigma_t = DensityMatrix(t * rho.matrix + (1 - t) * sigma.matrix)
    terms = {
        "H(rho||sigma)": rel_entropy(rho, sigma, tolerances),
        "H(sigma||sigma)": rel_entropy(sigma, sigma, tolerances),
        "H(rho||sigma_t)": rel_entropy(rho, sigma_t, tolerances),
        "H(sigma||sigma_t)": rel_entropy(sigma, sigma_t, tolerances),
        "H(sigma_t||sigma)": rel_entropy(sigma_t, sigma, tolerances),
    }
    infinite = [name for name, value in terms.items() if value.is_infinite]
    if infinite:
        raise SupportError(
            f"Donald's identity has infinite terms: {', '.join(infinite)}",
            infinite_terms=infinite,
        )
    v = {name: float(value) for name, value in terms.items()}
    left = t * v["H(rho||sigma)"] + (1 - t) * v["H(sigma||sigma)"]
    right = (
        t * v["H(rho||sigma_t)"]
        + (1 - t) * v["H(sigma||sigma_t)"]
        + v["H(sigma_t||sigma)"]
    )
    return left - right


def binary_entropy(p: float) -> float:
    """``h₂(p) = -p log₂ p - (1-p) log₂(1-p)``."""
    return entropy_of_spectrum([p, 1 - p])
