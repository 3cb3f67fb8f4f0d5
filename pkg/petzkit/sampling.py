"""Seedable random instances: unitaries, states, channels and ensembles.

Every function takes ``rng``, which may be a :class:`numpy.random.Generator`,
an integer seed or ``None`` (fresh entropy).
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Union

import numpy as np

from .channels import Ensemble, KrausChannel
from .matcore import DensityMatrix, eig_hermitian

if TYPE_CHECKING:
    from ._types import ComplexMatrix

RandomLike = Union[np.random.Generator, int, None]


def as_generator(rng: RandomLike) -> np.random.Generator:
    """Turn a seed (or generator) into a :class:`numpy.random.Generator`."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def ginibre(rows: int, cols: int, rng: RandomLike = None) -> ComplexMatrix:
    """Matrix with i.i.d. standard complex Gaussian entries."""
    gen = as_generator(rng)
    return (
        gen.standard_normal((rows, cols)) + 1j * gen.standard_normal((rows, cols))
    ) / np.sqrt(2)


def random_isometry(rows: int, cols: int, rng: RandomLike = None) -> ComplexMatrix:
    """Haar-random isometry ``V`` with ``V†V = I_cols``.

    QR decomposition of a Ginibre matrix, with the phases of ``R``'s diagonal
    moved into ``Q`` so that the distribution is exactly Haar.
    """
    if cols > rows:
        raise ValueError(f"An isometry needs rows >= cols, got {rows} < {cols}")
    q, r = np.linalg.qr(ginibre(rows, cols, rng))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_unitary(dim: int, rng: RandomLike = None) -> ComplexMatrix:
    """Haar-random ``dim x dim`` unitary."""
    return random_isometry(dim, dim, rng)


def random_pure_state(dim: int, rng: RandomLike = None) -> np.ndarray:
    """Uniformly random unit vector."""
    v = ginibre(dim, 1, rng).reshape(-1)
    return v / np.linalg.norm(v)


def random_density_matrix(
    dim: int, rank: int | None = None, rng: RandomLike = None
) -> DensityMatrix:
    """Random state ``GG† / Tr GG†`` from a ``dim x rank`` Ginibre matrix."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must be in [1, {dim}], got {rank}")
    g = ginibre(dim, rank, rng)
    m = g @ g.conj().T
    return DensityMatrix(m / np.real(np.trace(m)))


def random_channel(
    dim_in: int,
    dim_out: int | None = None,
    n_kraus: int | None = None,
    rng: RandomLike = None,
) -> KrausChannel:
    """Random channel from a Haar-random Stinespring isometry.

    Args:
        dim_in:
            Input dimension.
        dim_out:
            Output dimension, defaults to ``dim_in``.
        n_kraus:
            Environment dimension, defaults to ``dim_in * dim_out``.
        rng:
            Seed or generator.
    """
    dim_out = dim_in if dim_out is None else dim_out
    n_kraus = dim_in * dim_out if n_kraus is None else n_kraus
    v = random_isometry(dim_out * n_kraus, dim_in, rng)
    ops = v.reshape(dim_out, n_kraus, dim_in).transpose(1, 0, 2)
    return KrausChannel(ops)


def random_ensemble(
    dim: int, n_states: int, rank: int | None = None, rng: RandomLike = None
) -> Ensemble:
    """Random ensemble with Dirichlet weights and Ginibre states."""
    gen = as_generator(rng)
    probs = gen.dirichlet(np.ones(n_states))
    states = [random_density_matrix(dim, rank, gen) for _ in range(n_states)]
    return Ensemble.from_weights(probs, states)


def random_pure_ensemble(
    dim: int, n_states: int, rng: RandomLike = None
) -> Ensemble:
    """Random ensemble of pure states."""
    return random_ensemble(dim, n_states, rank=1, rng=rng)


def random_pure_decomposition(
    rho: DensityMatrix, n_atoms: int | None = None, rng: RandomLike = None
) -> Ensemble:
    """Random pure-state decomposition of ``rho``.

    With ``S`` the columns ``√λ_k e_k`` of ``rho`` on its support and ``U`` a
    random ``n_atoms x rank`` isometry, the vectors ``w_i = S U[i]ᵀ`` satisfy
    ``Σ_i |w_i⟩⟨w_i| = rho``. All decompositions arise this way.
    """
    return decomposition_from_mixing(rho, _mixing_isometry(rho, n_atoms, rng))


def decomposition_from_mixing(
    rho: DensityMatrix, mixing: ComplexMatrix, prune: float = 1e-14
) -> Ensemble:
    """Pure decomposition of ``rho`` induced by an ``N x rank`` isometry."""
    vectors = mixing @ sqrt_factor(rho).T
    weights = np.sum(np.abs(vectors) ** 2, axis=1)
    keep = weights > prune
    states = [
        DensityMatrix(np.outer(w, w.conj()) / p)
        for w, p in zip(vectors[keep], weights[keep])
    ]
    return Ensemble.from_weights(weights[keep], states)


def sqrt_factor(rho: DensityMatrix, support_tol: float = 1e-12) -> ComplexMatrix:
    """Columns ``√λ_k e_k`` over the support of ``rho`` (``S S† = rho``)."""
    eigenvalues, eigenvectors = eig_hermitian(rho)
    scale = float(np.max(eigenvalues))
    keep = eigenvalues > support_tol * scale
    return eigenvectors[:, keep] * np.sqrt(eigenvalues[keep])


def _mixing_isometry(
    rho: DensityMatrix, n_atoms: int | None, rng: RandomLike
) -> ComplexMatrix:
    rank = sqrt_factor(rho).shape[1]
    n_atoms = rho.dim**2 if n_atoms is None else n_atoms
    if n_atoms < rank:
        raise ValueError(
            f"A decomposition of a rank-{rank} state needs at least {rank} atoms"
        )
    return random_isometry(n_atoms, rank, rng)
