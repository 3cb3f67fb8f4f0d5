"""Holevo capacity by Blahut-Arimoto iterations over pure-state ensembles.

Each restart keeps at most ``dim_in²`` pure atoms ``ψ_i`` with weights
``π_i``. An iteration, with ``Y = Φ(ρ̄)``:

* updates the weights multiplicatively, ``π_i ∝ π_i 2^{D_i}`` with
  ``D_i = H(Φ(ψ_i) ‖ Y)``;
* moves every atom one projected gradient step uphill in ``D(Φ(ψ) ‖ Y)``,
  kept only if the Holevo quantity does not drop;
* searches for a best response ``max_ψ D(Φ(ψ) ‖ Y)`` by projected gradient
  ascent on the unit sphere, started from the top eigenvector of the
  linearized score ``-Φ*(log₂Y)``, from the best atom and from a random
  state. A best response that beats every atom joins the ensemble with the
  share maximizing the Holevo quantity along the segment.

``max_ψ D(Φ(ψ) ‖ Y)`` bounds the capacity from above, so the difference
between it and the current Holevo quantity is the convergence criterion.
Under an energy constraint the update becomes ``π_i ∝ π_i 2^{D_i - sE_i}``
with the multiplier ``s ≥ 0`` chosen by bisection.

Before the winning ensemble is returned, atoms are folded into their closest
neighbour whenever that keeps the Holevo quantity within ``opts.tol``.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
import scipy.optimize

from ..channels import Ensemble, KrausChannel
from ..entropy import EntropyValue, entropy_of_matrix, holevo_image
from ..matcore import eig_hermitian, log2m_floor
from ..sampling import random_pure_state
from ._restarts import RestartOutcome, run_restarts, select_best
from .result import DEFAULT_OPTIONS, CapacityOptions, CapacityResult

if TYPE_CHECKING:
    from .._types import ComplexMatrix
    from .result import EnergyConstraint

logger = logging.getLogger(__name__)

# eigenvalue floor for logarithms of rank-deficient outputs
LOG_FLOOR = 1e-15
BEST_RESPONSE_STEPS = 20
STEP_LADDER = 4.0 ** -np.arange(-1, 6)


def pure_outputs(channel: KrausChannel, vectors: np.ndarray) -> np.ndarray:
    """``Φ(|ψ_n⟩⟨ψ_n|)`` for the rows ``ψ_n`` of ``vectors``."""
    ops = channel.kraus_ops
    return np.einsum("kab,nb,nc,kdc->nad", ops, vectors, vectors.conj(), ops.conj())


def _output_entropies(outputs: np.ndarray) -> np.ndarray:
    eigenvalues = np.clip(np.linalg.eigvalsh(outputs), 0.0, None)
    logs = np.log2(np.where(eigenvalues > 0, eigenvalues, 1.0))
    return -np.sum(eigenvalues * logs, axis=-1)


def divergences(outputs: np.ndarray, log_average: ComplexMatrix) -> np.ndarray:
    """``H(X_n ‖ Y)`` for a stack of outputs ``X_n`` given ``log₂ Y``."""
    cross = np.real(np.einsum("nab,ba->n", outputs, log_average))
    return -_output_entropies(outputs) - cross


def _chi(outputs: np.ndarray, weights: np.ndarray) -> float:
    average = np.einsum("n,nab->ab", weights, outputs)
    return entropy_of_matrix(average) - float(weights @ _output_entropies(outputs))


class _Penalty(NamedTuple):
    hamiltonian: ComplexMatrix
    bound: float

    def energies(self, vectors: np.ndarray) -> np.ndarray:
        energies = np.einsum("na,ab,nb->n", vectors.conj(), self.hamiltonian, vectors)
        return np.real(energies)


def _scores(
    channel: KrausChannel,
    vectors: np.ndarray,
    log_average: ComplexMatrix,
    linear: ComplexMatrix | None,
) -> np.ndarray:
    values = divergences(pure_outputs(channel, vectors), log_average)
    if linear is not None:
        values = values - np.real(
            np.einsum("na,ab,nb->n", vectors.conj(), linear, vectors)
        )
    return values


def _sphere_gradients(
    channel: KrausChannel,
    vectors: np.ndarray,
    log_average: ComplexMatrix,
    linear: ComplexMatrix | None,
) -> np.ndarray:
    """Tangent gradients ``Mψ - ⟨ψ|M|ψ⟩ψ`` with ``M = Φ*(log₂Φ(ψ) - log₂Y) - L``.

    ``V_k ψ`` lies in the support of ``Φ(ψ)``, so the floor on the kernel of a
    rank-deficient output does not reach ``Mψ``.
    """
    eigenvalues, eigenvectors = np.linalg.eigh(pure_outputs(channel, vectors))
    logs = np.log2(np.maximum(eigenvalues, LOG_FLOOR))
    log_outputs = np.einsum(
        "nab,nb,ncb->nac", eigenvectors, logs, eigenvectors.conj()
    )
    ops = channel.kraus_ops
    m = np.einsum("kba,nbc,kcd->nad", ops.conj(), log_outputs - log_average, ops)
    if linear is not None:
        m = m - linear
    g = np.einsum("nab,nb->na", m, vectors)
    return g - np.einsum("na,na->n", vectors.conj(), g)[:, None] * vectors


def _normalized(vectors: np.ndarray) -> np.ndarray:
    return vectors / np.linalg.norm(vectors, axis=1, keepdims=True)


def _ascent_step(
    channel: KrausChannel,
    vectors: np.ndarray,
    log_average: ComplexMatrix,
    linear: ComplexMatrix | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-row best step from :data:`STEP_LADDER` along the tangent gradient.

    Returns:
        The gradients, the chosen step of every row (zero where no step
        improves) and the resulting scores.
    """
    gradients = _sphere_gradients(channel, vectors, log_average, linear)
    steps = np.zeros(len(vectors))
    scores = _scores(channel, vectors, log_average, linear)
    for step in STEP_LADDER:
        moved = _normalized(vectors + step * gradients)
        trial = _scores(channel, moved, log_average, linear)
        better = trial > scores
        steps[better] = step
        scores = np.where(better, trial, scores)
    return gradients, steps, scores


def best_response(
    channel: KrausChannel,
    starts: np.ndarray,
    log_average: ComplexMatrix,
    linear: ComplexMatrix | None = None,
    steps: int = BEST_RESPONSE_STEPS,
) -> tuple[np.ndarray, float]:
    """Locally maximize ``D(Φ(ψ) ‖ Y) - ⟨ψ|L|ψ⟩`` over unit vectors.

    Runs projected gradient ascent on the unit sphere from every row of
    ``starts`` at once; each step is the best of a fixed ladder of step
    sizes, so the objective never decreases.

    Returns:
        The best final vector and its objective value.
    """
    vectors = _normalized(np.atleast_2d(starts))
    scores = _scores(channel, vectors, log_average, linear)
    for _ in range(steps):
        gradients, chosen, improved = _ascent_step(
            channel, vectors, log_average, linear
        )
        vectors = _normalized(vectors + chosen[:, None] * gradients)
        gain = float(np.max(improved - scores))
        scores = improved
        if gain <= 1e-14:
            break
    best = int(np.argmax(scores))
    return vectors[best], float(scores[best])


def _tilt(
    weights: np.ndarray,
    exponents: np.ndarray,
    energies: np.ndarray | None,
    bound: float,
) -> tuple[np.ndarray, float]:
    """``π ∝ π 2^{exponents - sE}`` with the smallest feasible ``s ≥ 0``."""

    def tilted(s: float) -> np.ndarray:
        shifted = exponents if energies is None else exponents - s * energies
        w = weights * np.exp2(shifted - np.max(shifted[weights > 0]))
        return w / np.sum(w)

    w = tilted(0.0)
    if energies is None or w @ energies <= bound:
        return w, 0.0
    high = 1.0
    while tilted(high) @ energies > bound and high < 2.0**60:
        high *= 2
    low = 0.0
    for _ in range(100):
        middle = (low + high) / 2
        if tilted(middle) @ energies > bound:
            low = middle
        else:
            high = middle
    return tilted(high), high


def _feasible(
    weights: np.ndarray, vectors: np.ndarray, penalty: _Penalty | None
) -> np.ndarray:
    if penalty is None:
        return weights
    zeros = np.zeros(len(weights))
    return _tilt(weights, zeros, penalty.energies(vectors), penalty.bound)[0]


def _refine(
    channel: KrausChannel,
    vectors: np.ndarray,
    weights: np.ndarray,
    log_average: ComplexMatrix,
    linear: ComplexMatrix | None,
    penalty: _Penalty | None,
    protected: int,
) -> tuple[np.ndarray, np.ndarray]:
    """One gradient step on every unprotected atom, kept if ``χ`` does not drop."""
    gradients, steps, _ = _ascent_step(channel, vectors, log_average, linear)
    steps[:protected] = 0.0
    if not np.any(steps > 0):
        return vectors, weights
    chi = _chi(pure_outputs(channel, vectors), weights)
    for shrink in (1.0, 0.25, 0.0625):
        moved = _normalized(vectors + (shrink * steps)[:, None] * gradients)
        moved_weights = _feasible(weights, moved, penalty)
        if _chi(pure_outputs(channel, moved), moved_weights) >= chi:
            return moved, moved_weights
    return vectors, weights


def _inject(
    channel: KrausChannel,
    vectors: np.ndarray,
    weights: np.ndarray,
    candidate: np.ndarray,
    penalty: _Penalty | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Mix ``candidate`` in with the share maximizing ``χ`` on the segment."""
    outputs = pure_outputs(channel, vectors)
    average = np.einsum("n,nab->ab", weights, outputs)
    mean_entropy = float(weights @ _output_entropies(outputs))
    candidate_output = pure_outputs(channel, candidate[None])[0]
    candidate_entropy = float(_output_entropies(candidate_output[None])[0])

    limit = 1.0
    if penalty is not None:
        energy = float(weights @ penalty.energies(vectors))
        candidate_energy = float(penalty.energies(candidate[None])[0])
        if candidate_energy > penalty.bound:
            limit = (penalty.bound - energy) / (candidate_energy - energy)
            limit = min(max(limit, 0.0), 1.0)
    if limit <= 0:
        return vectors, weights

    def negative_chi(t: float) -> float:
        mixed = (1 - t) * average + t * candidate_output
        return -(
            entropy_of_matrix(mixed)
            - (1 - t) * mean_entropy
            - t * candidate_entropy
        )

    result = scipy.optimize.minimize_scalar(
        negative_chi, bounds=(0.0, limit), method="bounded", options={"xatol": 1e-10}
    )
    share = float(result.x)
    if not result.fun < negative_chi(0.0):
        return vectors, weights
    return np.vstack([vectors, candidate]), np.append((1 - share) * weights, share)


def _blahut_arimoto(
    channel: KrausChannel,
    opts: CapacityOptions,
    rng: np.random.Generator,
    penalty: _Penalty | None,
) -> RestartOutcome:
    d = channel.dim_in
    cap = d * d
    vectors = np.array([random_pure_state(d, rng) for _ in range(cap)])
    # atom 0 stays in the ensemble so that the constraint remains satisfiable
    protected = 0
    if penalty is not None:
        vectors[0] = eig_hermitian(penalty.hamiltonian)[1][:, 0]
        protected = 1
    weights = _feasible(np.full(cap, 1.0 / cap), vectors, penalty)
    bound = penalty.bound if penalty is not None else 0.0

    best_value = -np.inf
    best_atoms = (vectors, weights)
    converged = False
    iteration = 0
    for iteration in range(1, opts.max_iterations + 1):
        outputs = pure_outputs(channel, vectors)
        average = np.einsum("n,nab->ab", weights, outputs)
        log_average = log2m_floor(average, LOG_FLOOR)
        d_values = divergences(outputs, log_average)
        energies = None if penalty is None else penalty.energies(vectors)
        chi = float(weights @ d_values)
        if chi > best_value:
            best_value, best_atoms = chi, (vectors.copy(), weights.copy())

        updated, s = _tilt(weights, d_values, energies, bound)
        scores = d_values if energies is None else d_values - s * energies
        linear = None if penalty is None else s * penalty.hamiltonian
        linearized = -channel.dual_apply_matrix(log_average)
        if linear is not None:
            linearized = linearized - linear
        starts = np.array(
            [
                eig_hermitian((linearized + linearized.conj().T) / 2)[1][:, -1],
                vectors[int(np.argmax(scores))],
                random_pure_state(d, rng),
            ]
        )
        candidate, candidate_score = best_response(
            channel, starts, log_average, linear
        )

        # weak duality: χ ≤ max_ψ [D(Φ(ψ)‖Y) - s(E(ψ) - h)]
        upper = max(float(np.max(scores)), candidate_score) + s * bound
        logger.debug(
            "Iteration %d: chi=%.12f upper=%.12f atoms=%d",
            iteration,
            chi,
            upper,
            len(weights),
        )
        if upper - chi <= opts.tol:
            converged = True
            break

        vectors, weights = _refine(
            channel, vectors, updated, log_average, linear, penalty, protected
        )
        if candidate_score > float(np.max(scores)) + 1e-12:
            if len(weights) >= cap:
                drop = protected + int(np.argmin(weights[protected:]))
                vectors = np.delete(vectors, drop, axis=0)
                weights = _feasible(np.delete(weights, drop), vectors, penalty)
            vectors, weights = _inject(channel, vectors, weights, candidate, penalty)

        keep = weights > opts.prune
        keep[:protected] = True
        vectors, weights = vectors[keep], weights[keep] / np.sum(weights[keep])

    return RestartOutcome(best_value, iteration, converged, best_atoms)


def _ensemble_of(
    channel: KrausChannel,
    atoms: tuple[np.ndarray, np.ndarray],
    opts: CapacityOptions,
    penalty: _Penalty | None,
) -> Ensemble:
    """Fold atoms, lightest first, into their closest neighbour.

    A fold is kept when the Holevo quantity stays within ``opts.tol`` of the
    unfolded ensemble and the average energy does not grow past the bound.
    """
    vectors, weights = atoms
    keep = weights > opts.prune
    vectors, weights = vectors[keep], weights[keep] / np.sum(weights[keep])
    outputs = pure_outputs(channel, vectors)
    full = _chi(outputs, weights)
    energies = None
    ceiling = 0.0
    if penalty is not None:
        energies = penalty.energies(vectors)
        ceiling = max(penalty.bound, float(weights @ energies))
    alive = np.ones(len(weights), dtype=bool)
    for n in np.argsort(weights, kind="stable"):
        others = alive.copy()
        others[n] = False
        if not np.any(others):
            break
        overlaps = np.abs(vectors.conj() @ vectors[n]) ** 2
        target = int(np.argmax(np.where(others, overlaps, -1.0)))
        trial = weights.copy()
        trial[target] += trial[n]
        trial[n] = 0.0
        if energies is not None and trial @ energies > ceiling:
            continue
        if _chi(outputs, trial) >= full - opts.tol:
            weights, alive[n] = trial, False
    if not np.all(alive):
        logger.debug("Folded %d of %d atoms", int(np.sum(~alive)), len(alive))
    return Ensemble.from_vectors(weights[alive], list(vectors[alive]))


def holevo_capacity(
    channel: KrausChannel,
    opts: CapacityOptions = DEFAULT_OPTIONS,
    constraint: EnergyConstraint | None = None,
) -> CapacityResult:
    """Holevo capacity ``C̄(Φ) = sup χ({π_i, Φ(ρ_i)})`` over pure ensembles.

    Args:
        channel:
            The channel ``Φ``.
        opts:
            Optimizer settings.
        constraint:
            Optional energy constraint ``Σ_i π_i Tr Hρ_i ≤ h`` on the
            ensemble.

    Returns:
        The best value over all restarts. ``converged`` reports whether the
        duality gap of the winning restart fell below ``opts.tol``; global
        optimality is not certified. The returned ensemble carries no atom
        that can be folded into a neighbour without losing more than
        ``opts.tol``.
    """
    penalty = None
    if constraint is not None:
        if constraint.dim != channel.dim_in:
            raise ValueError(
                f"Hamiltonian of dimension {constraint.dim} does not match channel "
                f"input dimension {channel.dim_in}"
            )
        penalty = _Penalty(constraint.hamiltonian.matrix, constraint.bound)

    logger.info(
        "Holevo capacity of %r with %d restarts%s",
        channel,
        opts.restarts,
        "" if constraint is None else f" under {constraint!r}",
    )
    outcomes = run_restarts(
        lambda index, rng: _blahut_arimoto(channel, opts, rng, penalty), opts
    )
    best, history = select_best(outcomes)
    winner = outcomes[best]
    ensemble = _ensemble_of(
        channel, winner.payload, opts, penalty  # type: ignore[arg-type]
    )
    value = holevo_image(channel, ensemble)
    logger.info(
        "Holevo capacity %.9f (restart %d, %d iterations, %s)",
        float(value),
        best,
        winner.iterations,
        "converged" if winner.converged else "not converged",
    )
    return CapacityResult(
        value=EntropyValue.finite(float(value)),
        argmax=ensemble,
        iterations=winner.iterations,
        restarts=len(outcomes),
        converged=winner.converged,
        history=history,
    )
