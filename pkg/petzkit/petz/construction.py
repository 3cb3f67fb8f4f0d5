"""Rank-bounded Kraus representations of complementary channels.

When a channel preserves the Holevo quantity of an ensemble of rank-``r``
states, its complementary channel admits a Kraus representation whose
operators all have rank at most ``r``. The functions here carry out that
construction explicitly and verify every step numerically.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from ..channels import (
    Ensemble,
    IsometricEquivalence,
    KrausChannel,
    choi_distance,
    complementary,
    isometric_equivalence,
    minimal_kraus,
    pseudo_diagonal,
)
from ..channels.kraus import completeness_residual
from ..config import DEFAULT_TOLERANCES, Tolerances
from ..exceptions import ConstructionError, NumericalError, RankPreconditionError
from ..matcore import eig_hermitian, inv_sqrtm_psd, numerical_rank, trace_norm
from .recovery import RecoveryReport, restrict_to_average_support, reversibility_audit

if TYPE_CHECKING:
    from .._types import ComplexMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RankBoundedKraus:
    """A Kraus representation ``{W_ij}`` of the complementary channel.

    Attributes:
        channel:
            The complementary channel with Kraus operators ``W_ij``.
        per_op_numerical_rank:
            Numerical rank of every ``W_ij``.
        certified_rank_bound:
            The largest of those ranks.
        labels:
            The pair ``(i, j)`` of every operator: ensemble index and column.
        b_operators:
            The operators ``B_i`` on the environment of the complement.
        system:
            The vectors ``ψ_ij = √λ_j e_j`` from the eigendecomposition of
            ``B_i``.
        precondition_residual:
            ``max_i ‖A_i - Ψ*(B_i)‖₁``.
        choi_residual:
            Choi distance between ``channel`` and the complementary channel.
        completeness:
            ``max|Σ W_ij†W_ij - I|`` before the operators were renormalized.
        isometry:
            Isometry onto the support of the average state if the construction
            ran on a restriction, else ``None``.
    """

    channel: KrausChannel
    per_op_numerical_rank: tuple[int, ...]
    certified_rank_bound: int
    labels: tuple[tuple[int, int], ...]
    b_operators: tuple[ComplexMatrix, ...]
    system: tuple[np.ndarray, ...]
    precondition_residual: float
    choi_residual: float
    completeness: float = 0.0
    isometry: ComplexMatrix | None = None


def _spectral_columns(b: ComplexMatrix, support_tol: float) -> list[np.ndarray]:
    """Vectors ``√λ_j e_j`` with ``Σ_j |√λ_j e_j⟩⟨√λ_j e_j| ≈ b``, largest first.

    Eigenvalues at or below ``support_tol`` times the largest are dropped, so
    round-off never adds spurious components to a low-rank ``b``.
    """
    eigenvalues, eigenvectors = eig_hermitian(b)
    scale = float(np.max(eigenvalues))
    if scale <= 0:
        return []
    keep = np.flatnonzero(eigenvalues > support_tol * scale)[::-1]
    return [np.sqrt(eigenvalues[j]) * eigenvectors[:, j] for j in keep]


def _check_ranks(ens: Ensemble, r: int, tol: float) -> None:
    for index, rank in enumerate(ens.ranks(tol)):
        if rank > r:
            raise RankPreconditionError(
                f"State {index} of the ensemble has numerical rank {rank} > {r}"
            )


def rank_bounded_complement(
    channel: KrausChannel,
    ens: Ensemble,
    r: int,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> RankBoundedKraus:
    """Build a Kraus representation of ``Φ̂`` with operators of rank ``≤ r``.

    With ``V_k`` the minimal Kraus operators of ``Φ̂`` and
    ``Ψ(ρ)_kl = Tr V_k ρ V_l†`` (a channel isometrically equivalent to ``Φ``),
    the operators::

        A_i = π_i ρ̄^{-1/2} ρ_i ρ̄^{-1/2}
        B_i = π_i Ψ(ρ̄)^{-1/2} Ψ(ρ_i) Ψ(ρ̄)^{-1/2}

    satisfy ``A_i = Ψ*(B_i)`` when ``Φ`` is reversible on the ensemble.
    Splitting ``B_i = Σ_j |ψ_ij⟩⟨ψ_ij|`` over its eigenvectors gives
    ``W_ij = Σ_k ⟨ψ_ij|k⟩ V_k``, a representation of ``Φ̂`` whose ranks are
    bounded by those of the ensemble states.

    Args:
        channel:
            The channel ``Φ``.
        ens:
            Ensemble of states of rank at most ``r``.
        r:
            The rank bound.
        tolerances:
            ``numerical_rank`` for ranks, ``construction_pass`` and
            ``construction_fail`` for the precondition residual,
            ``completeness`` for ``ΣW†W = I`` and ``equivalence`` for the
            final Choi check.

    Raises:
        RankPreconditionError: if a state has rank above ``r``.
        ConstructionError: if ``A_i = Ψ*(B_i)`` or the completeness of the
            ``W_ij`` fails beyond ``tolerances.construction_fail``.
    """
    if r < 1:
        raise ValueError(f"Rank bound must be positive, got {r}")
    _check_ranks(ens, r, tolerances.numerical_rank)
    channel, ens, isometry = restrict_to_average_support(channel, ens, tolerances)

    complement = complementary(channel, tolerances)
    v = minimal_kraus(complement, tolerances).kraus_ops
    psi = complementary(complement, tolerances)

    average = ens.average().matrix
    average_inv_root = inv_sqrtm_psd(average, tolerances.support)
    psi_average = psi.apply_matrix(average)
    psi_inv_root = inv_sqrtm_psd(psi_average, tolerances.support)

    b_operators = []
    residual = 0.0
    for p, state in ens:
        a = p * average_inv_root @ state.matrix @ average_inv_root
        b = p * psi_inv_root @ psi.apply_matrix(state.matrix) @ psi_inv_root
        b = (b + b.conj().T) / 2
        residual = max(residual, trace_norm(a - psi.dual_apply_matrix(b)))
        b_operators.append(b)

    if residual > tolerances.construction_fail:
        raise ConstructionError(
            f"A_i = Ψ*(B_i) fails with residual {residual:.3e}; the channel is "
            "not reversible on this ensemble",
            residual=residual,
        )
    if residual > tolerances.construction_pass:
        logger.warning(
            "A_i = Ψ*(B_i) holds only approximately (residual %.3e)", residual
        )

    labels = []
    system = []
    for i, b in enumerate(b_operators):
        for j, column in enumerate(_spectral_columns(b, tolerances.support)):
            labels.append((i, j))
            system.append(column)

    ops = np.einsum("nk,kab->nab", np.array(system).conj(), v)
    completeness = completeness_residual(ops)
    if completeness > tolerances.construction_fail:
        raise ConstructionError(
            f"Rank-bounded operators are not trace preserving: "
            f"‖ΣW†W - I‖_max = {completeness:.3e}",
            residual=completeness,
        )
    if completeness > tolerances.completeness:
        logger.warning(
            "Rank-bounded operators are trace preserving only within %.3e; "
            "renormalizing",
            completeness,
        )
    representation = KrausChannel.from_approximate(
        ops, tolerance=tolerances.construction_fail, tolerances=tolerances
    )
    ranks = tuple(
        numerical_rank(op, tolerances.numerical_rank)
        for op in representation.kraus_ops
    )
    choi_residual = choi_distance(representation, complement)
    if choi_residual > tolerances.equivalence:
        raise NumericalError(
            f"Rank-bounded representation differs from the complementary "
            f"channel by {choi_residual:.3e} in Choi distance"
        )
    logger.info(
        "Built %d Kraus operators of the complement with ranks <= %d",
        len(ops),
        max(ranks),
    )
    return RankBoundedKraus(
        channel=representation,
        per_op_numerical_rank=ranks,
        certified_rank_bound=max(ranks),
        labels=tuple(labels),
        b_operators=tuple(b_operators),
        system=tuple(system),
        precondition_residual=residual,
        choi_residual=choi_residual,
        completeness=completeness,
        isometry=isometry,
    )


@dataclass(frozen=True)
class PseudoDiagonalCertificate:
    """A pseudo-diagonal channel isometrically equivalent to a given channel.

    Attributes:
        channel:
            ``Φ′(ρ) = Σ_ab c_ab ⟨ψ_a|ρ|ψ_b⟩ |a⟩⟨b|``.
        equivalence:
            Outcome of the equivalence test between ``Φ′`` and the original
            channel (restricted to the support of the average state).
        gram:
            The Gram matrix ``c``.
        system:
            The overcomplete system ``{ψ_a}``.
        labels:
            Ensemble index and column ``(i, j)`` of every ``ψ_a``.
        input_vectors:
            ``√π_i ρ̄^{-1/2} |φ_i⟩`` for the ensemble vectors ``φ_i``.
        factor_residual:
            Largest spectral-norm distance between a rank-one complement
            operator and its factorization ``|w_a⟩⟨φ̃_i|``.
        report:
            The reversibility audit of the ensemble.
        isometry:
            Isometry onto the support of the average state, or ``None``.
    """

    channel: KrausChannel
    equivalence: IsometricEquivalence
    gram: ComplexMatrix
    system: tuple[np.ndarray, ...]
    labels: tuple[tuple[int, int], ...]
    input_vectors: tuple[np.ndarray, ...]
    factor_residual: float
    report: RecoveryReport
    isometry: ComplexMatrix | None = None


def pure_case_reconstruction(
    channel: KrausChannel,
    pure_ens: Ensemble,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> PseudoDiagonalCertificate:
    """Exhibit ``channel`` as a pseudo-diagonal channel up to isometry.

    If ``channel`` preserves the Holevo quantity of a pure-state ensemble
    ``{π_i, |φ_i⟩⟨φ_i|}``, the complement has a Kraus representation with
    operators ``W_a = |w_a⟩⟨φ̃_i|`` built on the input vectors
    ``φ̃_i = √π_i ρ̄^{-1/2} |φ_i⟩``. The complement of that representation,
    ``Φ′(ρ)_ab = ⟨w_b|w_a⟩ ⟨φ̃_a|ρ|φ̃_b⟩``, is pseudo-diagonal with Gram
    matrix ``c_ab = ⟨ŵ_b|ŵ_a⟩`` of the normalized ``w_a`` and system
    ``ψ_a = ‖w_a‖ φ̃_a``, and it is isometrically equivalent to ``channel``.

    Raises:
        RankPreconditionError: if a state of ``pure_ens`` is not pure.
        ConstructionError: if the audit fails (carrying the report), an
            operator ``W_a`` does not factor through its input vector within
            ``tolerances.construction_fail``, or the equivalence cannot be
            verified within ``tolerances.reversible``.
    """
    _check_ranks(pure_ens, 1, tolerances.numerical_rank)
    report = reversibility_audit(channel, pure_ens, tolerances)
    if not report.reversible:
        raise ConstructionError(
            f"Channel is not reversible on the ensemble (max residual "
            f"{report.max_residual:.3e})",
            residual=report.max_residual,
            report=report,
        )
    restricted, restricted_ens, isometry = restrict_to_average_support(
        channel, pure_ens, tolerances
    )
    rank_bounded = rank_bounded_complement(restricted, restricted_ens, 1, tolerances)

    inv_root = inv_sqrtm_psd(restricted_ens.average().matrix, tolerances.support)
    input_vectors = tuple(
        np.sqrt(p) * inv_root @ vector
        for p, vector in zip(
            restricted_ens.probabilities, restricted_ens.pure_vectors()
        )
    )

    outputs, system, labels = [], [], []
    factor_residual = 0.0
    for (i, j), op in zip(rank_bounded.labels, rank_bounded.channel.kraus_ops):
        phi = input_vectors[i]
        # W_ij = |w_ij⟩⟨φ_i| whenever W_ij†W_ij ≤ |φ_i⟩⟨φ_i|
        w = op @ phi / np.vdot(phi, phi)
        factor_residual = max(
            factor_residual, float(np.linalg.norm(op - np.outer(w, phi.conj()), 2))
        )
        norm = float(np.linalg.norm(w))
        if norm <= 1e-12:
            continue
        outputs.append(w / norm)
        system.append(norm * phi)
        labels.append((i, j))
    if factor_residual > tolerances.construction_fail:
        raise ConstructionError(
            f"Rank-one complement operators do not factor through the input "
            f"vectors (residual {factor_residual:.3e})",
            residual=factor_residual,
            report=report,
        )
    unit_outputs = np.array(outputs).T
    gram = (unit_outputs.conj().T @ unit_outputs).conj()
    np.fill_diagonal(gram, 1.0)

    reconstructed = pseudo_diagonal(gram, system, tolerances)
    equivalence = isometric_equivalence(
        reconstructed, restricted, tolerances.replace(equivalence=tolerances.reversible)
    )
    if not equivalence.equivalent:
        raise ConstructionError(
            f"Pseudo-diagonal reconstruction is not isometrically equivalent to "
            f"the channel (residual {equivalence.residual:.3e})",
            residual=equivalence.residual,
            report=report,
        )
    logger.info(
        "Pseudo-diagonal reconstruction with %d vectors, equivalence residual %.3e",
        len(system),
        equivalence.residual,
    )
    return PseudoDiagonalCertificate(
        channel=reconstructed,
        equivalence=equivalence,
        gram=gram,
        system=tuple(system),
        labels=tuple(labels),
        input_vectors=input_vectors,
        factor_residual=factor_residual,
        report=report,
        isometry=isometry,
    )
