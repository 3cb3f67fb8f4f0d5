"""Constrained Holevo capacity and the equality diagnostics built on it.

Pure decompositions ``ρ = Σ_i |w_i⟩⟨w_i|`` into ``N`` atoms are exactly the
vectors ``w_i = S U[i]`` with ``S`` the columns ``√λ_k e_k`` of ``ρ`` and
``U`` an ``N x rank`` isometry. The convex roof
``Ĥ_Φ(ρ) = min Σ_i π_i H(Φ(ρ_i))`` is minimized by gradient descent on that
Stiefel manifold.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np
import scipy.linalg
import scipy.optimize

from ..channels import (
    Ensemble,
    KrausChannel,
    choi_distance,
    complementary,
    isometric_equivalence,
)
from ..config import DEFAULT_TOLERANCES, Tolerances
from ..entropy import EntropyValue, entropy_of_matrix, holevo, mutual_info
from ..exceptions import ConstructionError, DimensionMismatchError
from ..matcore import (
    DensityMatrix,
    eig_hermitian,
    log2m_floor,
    numerical_rank,
    support_basis,
)
from ..petz import fixed_point_projection, petz_recovery, rank_bounded_complement
from ..sampling import (
    decomposition_from_mixing,
    random_isometry,
    random_pure_decomposition,
    sqrt_factor,
)
from ._restarts import RestartOutcome, run_restarts, select_best
from .holevo import LOG_FLOOR, pure_outputs
from .result import DEFAULT_OPTIONS, CapacityOptions, CapacityResult

if TYPE_CHECKING:
    from .._types import ComplexMatrix

logger = logging.getLogger(__name__)

ARMIJO = 1e-4


def _check_dims(channel: KrausChannel, rho: DensityMatrix) -> None:
    if rho.dim != channel.dim_in:
        raise DimensionMismatchError(
            f"State of dimension {rho.dim} does not match channel input "
            f"dimension {channel.dim_in}"
        )


def roof_objective(channel: KrausChannel, vectors: np.ndarray) -> float:
    """``Σ_i π_i H(Φ(ρ_i))`` for unnormalized atoms ``w_i`` (rows)."""
    total = 0.0
    for output in pure_outputs(channel, vectors):
        p = float(np.real(np.trace(output)))
        if p > 0:
            total += p * entropy_of_matrix(output / p)
    return total


def _roof_gradient(
    channel: KrausChannel, s: ComplexMatrix, vectors: np.ndarray
) -> np.ndarray:
    # d/dw̄_i = G_i w_i with G_i = log₂(p_i) I - Φ*(log₂Φ(w_i w_i†))
    rows = []
    for w, output in zip(vectors, pure_outputs(channel, vectors)):
        p = float(np.real(np.trace(output)))
        if p <= 0:
            rows.append(np.zeros(s.shape[1], dtype=np.complex128))
            continue
        g = np.log2(p) * np.eye(len(w)) - channel.dual_apply_matrix(
            log2m_floor(output, LOG_FLOOR)
        )
        rows.append(s.conj().T @ g @ w)
    return np.array(rows)


def minimize_roof(
    channel: KrausChannel,
    rho: DensityMatrix,
    mixing: ComplexMatrix,
    opts: CapacityOptions,
) -> tuple[ComplexMatrix, float, int, bool]:
    """Descend from the decomposition induced by ``mixing``.

    Steps follow ``U ← expm(-tA) U`` with the skew-Hermitian
    ``A = EU† - UE†`` built from the Euclidean gradient ``E``, and ``t`` from
    Armijo backtracking.

    Returns:
        The final mixing isometry, its objective value, the number of
        iterations and whether the objective stalled below ``opts.tol``.
    """
    s = sqrt_factor(rho)
    u = mixing
    value = roof_objective(channel, u @ s.T)
    step = 1.0
    for iteration in range(1, opts.max_iterations + 1):
        e = _roof_gradient(channel, s, u @ s.T)
        a = e @ u.conj().T - u @ e.conj().T
        norm = float(np.linalg.norm(a))
        if norm**2 <= opts.tol:
            return u, value, iteration, True
        step = min(2 * step, 1.0 / norm)
        while True:
            candidate = scipy.linalg.expm(-step * a) @ u
            candidate_value = roof_objective(channel, candidate @ s.T)
            if candidate_value <= value - ARMIJO * step * norm**2:
                break
            step /= 2
            if step < 1e-14:
                return u, value, iteration, True
        improvement = value - candidate_value
        u, value = candidate, candidate_value
        if improvement <= opts.tol:
            return u, value, iteration, True
    return u, value, opts.max_iterations, False


def constrained_holevo(
    channel: KrausChannel,
    rho: DensityMatrix,
    opts: CapacityOptions = DEFAULT_OPTIONS,
) -> CapacityResult:
    """Constrained Holevo capacity ``C̄(Φ,ρ) = H(Φ(ρ)) - Ĥ_Φ(ρ)``.

    The supremum of ``χ`` over ensembles with average ``ρ`` is attained on
    pure decompositions of ``ρ``; ``dim²`` atoms are used. The first restart
    starts from the eigendecomposition of ``ρ``, the others from Haar-random
    mixings.

    Returns:
        A result whose ``argmax`` is the optimal decomposition found.
    """
    _check_dims(channel, rho)
    rank = sqrt_factor(rho).shape[1]
    n_atoms = channel.dim_in**2

    def task(index: int, rng: np.random.Generator) -> RestartOutcome:
        if index == 0:
            mixing = np.eye(n_atoms, rank, dtype=np.complex128)
        else:
            mixing = random_isometry(n_atoms, rank, rng)
        u, value, iterations, converged = minimize_roof(channel, rho, mixing, opts)
        return RestartOutcome(value, iterations, converged, u)

    logger.info(
        "Constrained Holevo capacity of %r with %d restarts", channel, opts.restarts
    )
    outcomes = run_restarts(task, opts)
    best, _ = select_best(outcomes, maximize=False)
    winner = outcomes[best]
    decomposition = decomposition_from_mixing(
        rho, winner.payload, opts.prune  # type: ignore[arg-type]
    )
    value = float(holevo(decomposition.map(channel)))
    output_entropy = entropy_of_matrix(channel.apply_matrix(rho.matrix))
    history = tuple(output_entropy - roof for roof in _running_min(outcomes))
    logger.info("Constrained Holevo capacity %.9f (restart %d)", value, best)
    return CapacityResult(
        value=EntropyValue.finite(max(value, 0.0)),
        argmax=decomposition,
        iterations=winner.iterations,
        restarts=len(outcomes),
        converged=winner.converged,
        history=history,
    )


def _running_min(outcomes: list[RestartOutcome]) -> list[float]:
    return list(np.minimum.accumulate([outcome.value for outcome in outcomes]))


@dataclass(frozen=True)
class GapIdentityReport:
    """Numerical check of the mutual-information gap identities.

    Attributes:
        mutual_information:
            ``I(Φ,ρ)``.
        entropy:
            ``H(ρ)``.
        holevo_channel:
            ``C̄(Φ,ρ)`` from the optimizer.
        holevo_complement:
            ``χ(Φ̂(μ*))`` at the optimal decomposition ``μ*``, which also
            maximizes ``χ(Φ̂(μ))``.
        gap:
            ``Δ_Φ(ρ) = H(ρ) - C̄(Φ̂,ρ)``, nonnegative.
        identity_residual:
            ``|I - H(ρ) - C̄(Φ,ρ) + C̄(Φ̂,ρ)|``.
        decomposition_deviation:
            Largest ``|χ(Φ(μ)) - χ(Φ̂(μ)) - (I - H(ρ))|`` over random pure
            decompositions ``μ``.
        n_samples:
            Number of random decompositions.
        converged:
            Whether the convex-roof optimizer converged.
    """

    mutual_information: float
    entropy: float
    holevo_channel: float
    holevo_complement: float
    gap: float
    identity_residual: float
    decomposition_deviation: float
    n_samples: int
    converged: bool

    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def gap_identity_check(
    channel: KrausChannel,
    rho: DensityMatrix,
    opts: CapacityOptions = DEFAULT_OPTIONS,
    n_samples: int = 50,
) -> GapIdentityReport:
    """Check ``I(Φ,ρ) = H(ρ) + C̄(Φ,ρ) - C̄(Φ̂,ρ)`` and its decomposition form.

    For every pure decomposition ``μ`` of ``ρ``,
    ``χ(Φ(μ)) - χ(Φ̂(μ)) = I(Φ,ρ) - H(ρ)`` does not depend on ``μ``; it is
    evaluated on the optimal decomposition and on ``n_samples`` random ones
    drawn from ``opts.seed``.
    """
    _check_dims(channel, rho)
    complement = complementary(channel)
    information = float(mutual_info(channel, rho))
    entropy = entropy_of_matrix(rho.matrix)
    target = information - entropy

    result = constrained_holevo(channel, rho, opts)
    optimum = result.argmax
    assert isinstance(optimum, Ensemble)
    holevo_channel = float(result.value)
    holevo_complement = float(holevo(optimum.map(complement)))
    residual = abs(target - holevo_channel + holevo_complement)

    rng = np.random.default_rng(opts.seed)
    deviation = 0.0
    for _ in range(n_samples):
        mu = random_pure_decomposition(rho, rng=rng)
        difference = float(holevo(mu.map(channel))) - float(
            holevo(mu.map(complement))
        )
        deviation = max(deviation, abs(difference - target))
    logger.info(
        "Gap identity residual %.3e, decomposition deviation %.3e over %d samples",
        residual,
        deviation,
        n_samples,
    )
    return GapIdentityReport(
        mutual_information=information,
        entropy=entropy,
        holevo_channel=holevo_channel,
        holevo_complement=holevo_complement,
        gap=entropy - holevo_complement,
        identity_residual=residual,
        decomposition_deviation=deviation,
        n_samples=n_samples,
        converged=result.converged,
    )


@dataclass(frozen=True)
class EntanglementBreakingReport:
    """Outcome of the test ``C̄(Φ,ρ) = I(Φ,ρ)``.

    When the equality holds, ``Φ`` restricted to the support of ``ρ`` is
    entanglement breaking and ``kraus`` holds a rank-one Kraus form of it.

    Attributes:
        constrained_holevo:
            ``C̄(Φ,ρ)``.
        mutual_information:
            ``I(Φ,ρ)``.
        gap:
            ``I(Φ,ρ) - C̄(Φ,ρ)``.
        equality:
            Whether ``|gap| ≤ tolerances.eb_equality``.
        kraus:
            Kraus operators ``Φ_ρ(σ) = Σ_k V_k σ V_k†`` of the restriction
            ``Φ_ρ`` to the support of ``ρ``, or ``None``.
        ranks:
            Numerical ranks of ``kraus``.
        reconstruction_residual:
            Choi distance between ``kraus`` and the restriction of ``Φ``.
        construction_residual:
            Precondition residual of the rank-one construction.
        isometry:
            Isometry onto the support of ``ρ`` used for the restriction.
        converged:
            Whether the convex-roof optimizer converged.
        message:
            Why no Kraus form was emitted despite equality, if so.
    """

    constrained_holevo: float
    mutual_information: float
    gap: float
    equality: bool
    kraus: KrausChannel | None = None
    ranks: tuple[int, ...] = ()
    reconstruction_residual: float | None = None
    construction_residual: float | None = None
    isometry: ComplexMatrix | None = None
    converged: bool = True
    message: str | None = None

    @property
    def entanglement_breaking(self) -> bool:
        return self.kraus is not None and all(rank <= 1 for rank in self.ranks)

    def as_dict(self) -> dict[str, Any]:
        return {
            "constrained_holevo": self.constrained_holevo,
            "mutual_information": self.mutual_information,
            "gap": self.gap,
            "equality": self.equality,
            "entanglement_breaking": self.entanglement_breaking,
            "ranks": list(self.ranks),
            "reconstruction_residual": self.reconstruction_residual,
            "construction_residual": self.construction_residual,
            "converged": self.converged,
            "message": self.message,
        }


def snap_to_fixed_points(
    channel: KrausChannel,
    rho: DensityMatrix,
    decomposition: Ensemble,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Ensemble:
    """Move a nearly optimal decomposition onto exactly recoverable states.

    Every atom is projected onto the fixed points of ``Θ∘Φ`` (``Θ`` the Petz
    recovery channel at ``rho``), truncated to its top eigenvector, and the
    weights are refit by nonnegative least squares so that the average
    reproduces ``rho``. The input is returned unchanged if the fixed-point
    space cannot be computed.
    """
    recovery = petz_recovery(channel, rho, tolerances)
    try:
        projection = fixed_point_projection(recovery.compose(channel))
    except ValueError as e:
        logger.warning("Keeping the decomposition as is: %s", e)
        return decomposition
    d = rho.dim
    vectors = []
    for state in decomposition.states:
        snapped = (projection @ state.matrix.reshape(-1)).reshape(d, d)
        vectors.append(eig_hermitian((snapped + snapped.conj().T) / 2)[1][:, -1])
    projectors = [np.outer(v, v.conj()).reshape(-1) for v in vectors]
    system = np.array(projectors).T
    real_system = np.vstack([system.real, system.imag])
    target = rho.matrix.reshape(-1)
    weights, misfit = scipy.optimize.nnls(
        real_system, np.concatenate([target.real, target.imag])
    )
    logger.debug("Refit decomposition weights with misfit %.3e", misfit)
    keep = weights > 0
    return Ensemble.from_vectors(
        weights[keep], [v for v, k in zip(vectors, keep) if k]
    )


def eb_equality_diagnostic(
    channel: KrausChannel,
    rho: DensityMatrix,
    opts: CapacityOptions = DEFAULT_OPTIONS,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> EntanglementBreakingReport:
    """Test whether ``Φ`` is entanglement breaking on the support of ``ρ``.

    If ``C̄(Φ,ρ) = I(Φ,ρ)``, the complementary channel preserves the Holevo
    quantity of the optimal decomposition of ``ρ``, and the rank-bounded
    construction with ``r = 1`` applied to it yields a rank-one Kraus form
    of (a channel isometrically equivalent to) ``Φ`` on the support of
    ``ρ``. That form is mapped back onto the outputs of ``Φ`` and verified
    in Choi distance.

    Args:
        channel:
            The channel ``Φ``.
        rho:
            The input state.
        opts:
            Settings of the convex-roof optimizer.
        tolerances:
            ``eb_equality`` decides the equality; the reconstruction must be
            within ``construction_pass`` in Choi distance.
    """
    _check_dims(channel, rho)
    result = constrained_holevo(channel, rho, opts)
    value = float(result.value)
    information = float(mutual_info(channel, rho))
    gap = information - value
    equality = abs(gap) <= tolerances.eb_equality
    logger.info(
        "Entanglement-breaking test: C=%.9f I=%.9f gap=%.3e", value, information, gap
    )
    report = EntanglementBreakingReport(
        constrained_holevo=value,
        mutual_information=information,
        gap=gap,
        equality=equality,
        converged=result.converged,
    )
    if not equality:
        return report

    basis = support_basis(rho.matrix, tolerances.support)
    restricted = channel.restrict(basis)
    restricted_rho = DensityMatrix(basis.conj().T @ rho.matrix @ basis)
    decomposition = result.argmax
    assert isinstance(decomposition, Ensemble)
    decomposition = decomposition.restrict(basis)
    complement = complementary(restricted, tolerances)
    decomposition = snap_to_fixed_points(
        complement, restricted_rho, decomposition, tolerances
    )
    try:
        construction = rank_bounded_complement(complement, decomposition, 1, tolerances)
    except ConstructionError as e:
        logger.warning("Rank-one construction failed: %s", e)
        return dataclasses.replace(
            report,
            construction_residual=e.residual,
            isometry=basis,
            message=str(e),
        )

    equivalence = isometric_equivalence(
        construction.channel,
        restricted,
        tolerances.replace(equivalence=tolerances.construction_pass),
    )
    if equivalence.partial_isometry is None:
        return dataclasses.replace(
            report,
            construction_residual=construction.precondition_residual,
            reconstruction_residual=equivalence.residual,
            isometry=basis,
            message="rank-one form is not isometrically equivalent to the channel",
        )
    kraus = KrausChannel.from_approximate(
        equivalence.partial_isometry @ construction.channel.kraus_ops,
        tolerance=tolerances.construction_fail,
        tolerances=tolerances,
    )
    ranks = tuple(
        numerical_rank(op, tolerances.numerical_rank) for op in kraus.kraus_ops
    )
    residual = choi_distance(kraus, restricted)
    return dataclasses.replace(
        report,
        kraus=kraus,
        ranks=ranks,
        reconstruction_residual=residual,
        construction_residual=construction.precondition_residual,
        isometry=basis,
    )
