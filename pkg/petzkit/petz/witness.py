"""Certificates about Schmidt numbers and partial entanglement breaking."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np

from ..channels import KrausChannel, minimal_kraus
from ..config import DEFAULT_TOLERANCES
from ..exceptions import DimensionMismatchError
from ..sampling import random_isometry

if TYPE_CHECKING:
    from .._types import ComplexMatrix, Dims
    from ..matcore import DensityMatrix

logger = logging.getLogger(__name__)

# margin above r/d required for a positive witness
WITNESS_MARGIN = 1e-9


def _overlap(sigma: ComplexMatrix, k: ComplexMatrix, d: int) -> float:
    v = k.reshape(-1)
    return float(np.real(v.conj() @ sigma @ v)) / d


def _nearest_partial_isometry(g: ComplexMatrix, d: int) -> ComplexMatrix:
    u, _, vh = np.linalg.svd(g, full_matrices=False)
    return u[:, :d] @ vh[:d]


def _polish(
    sigma: ComplexMatrix,
    k: ComplexMatrix,
    d: int,
    max_iterations: int,
    tol: float,
) -> float:
    shape = k.shape
    value = _overlap(sigma, k, d)
    for _ in range(max_iterations):
        gradient = (sigma @ k.reshape(-1)).reshape(shape)
        k = _nearest_partial_isometry(gradient, d)
        new_value = _overlap(sigma, k, d)
        if new_value - value <= tol:
            return max(value, new_value)
        value = new_value
    return value


def max_entangled_overlap(
    sigma: DensityMatrix,
    dims: Dims,
    seeds: int = 20,
    seed: int = 0,
    max_iterations: int = 500,
) -> float:
    """Largest fidelity of ``sigma`` with a maximally entangled state found.

    Maximizes ``⟨Φ_d|(U⊗V) σ (U⊗V)†|Φ_d⟩`` over local unitaries, with
    ``d = min(dA, dB)``. The rotated vectors ``(U⊗V)†|Φ_d⟩`` are exactly
    ``vec(K)/√d`` for ``dA x dB`` partial isometries ``K`` of rank ``d``; each
    start is polished by the monotone update ``K ← polar(σ vec(K))``.

    Args:
        sigma:
            A state on ``A ⊗ B``.
        dims:
            ``(dA, dB)``.
        seeds:
            Number of random starts.
        seed:
            Root seed; start ``i`` uses the ``i``-th spawned child.
        max_iterations:
            Iteration cap per start.

    Returns:
        The best overlap; a lower bound on the true maximum.
    """
    d_a, d_b = dims
    if sigma.dim != d_a * d_b:
        raise DimensionMismatchError(
            f"State of dimension {sigma.dim} does not live on {d_a}x{d_b}"
        )
    d = min(d_a, d_b)
    best = -np.inf
    for index, child in enumerate(np.random.SeedSequence(seed).spawn(seeds)):
        rng = np.random.default_rng(child)
        start = random_isometry(d_a, d, rng) @ random_isometry(d_b, d, rng).T
        value = _polish(sigma.matrix, start, d, max_iterations, 1e-14)
        logger.debug("Overlap search start %d: %.12f", index, value)
        # strict comparison keeps the lowest seed on ties
        if value > best:
            best = value
    return float(best)


def schmidt_witness(
    sigma: DensityMatrix, dims: Dims, r: int, seed: int = 0
) -> bool:
    """Certify that ``sigma`` has Schmidt number larger than ``r``.

    Mixtures of pure states of Schmidt rank at most ``r`` have overlap at most
    ``r/d`` with every maximally entangled state, so an overlap above that
    bound is a sound certificate. ``False`` is inconclusive.
    """
    d = min(dims)
    overlap = max_entangled_overlap(sigma, dims, seed=seed)
    certified = overlap > r / d + WITNESS_MARGIN
    logger.info(
        "Maximally entangled overlap %.6f vs bound %.6f for Schmidt number %d",
        overlap,
        r / d,
        r,
    )
    return certified


def peb_upper_certificate(
    channel: KrausChannel, r: int, minimal: bool = True
) -> bool:
    """Whether ``channel`` is certified to be ``r``-partially entanglement breaking.

    A channel is ``r``-PEB if some Kraus representation has all operators of
    rank at most ``r``. ``True`` is returned when the representation as given
    qualifies or, with ``minimal=True``, when the minimal one of
    :func:`~petzkit.channels.minimal_kraus` does. This is not the test "every
    minimal Kraus operator has rank ``≤ r``" on its own: minimal
    representations are unique only up to a unitary mixing, which changes
    ranks when the Choi spectrum is degenerate (as for the trine channel).
    ``False`` is inconclusive.
    """
    tol = DEFAULT_TOLERANCES.numerical_rank
    if max(channel.kraus_ranks(tol)) <= r:
        return True
    if minimal:
        return max(minimal_kraus(channel).kraus_ranks(tol)) <= r
    return False
