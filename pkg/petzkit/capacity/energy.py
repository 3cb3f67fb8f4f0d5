from __future__ import annotations

import logging
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
import scipy.optimize

from ..channels import Ensemble, KrausChannel, complementary
from ..entropy import mutual_info, mutual_info_terms
from ..exceptions import InfeasibleConstraintError
from ..matcore import DensityMatrix, eig_hermitian
from ._restarts import RestartOutcome, run_restarts, select_best
from .convex_roof import EntanglementBreakingReport, eb_equality_diagnostic
from .holevo import holevo_capacity
from .result import DEFAULT_OPTIONS, CapacityOptions, CapacityResult, EnergyConstraint

if TYPE_CHECKING:
    from .._types import ComplexMatrix

logger = logging.getLogger(__name__)

# h within this distance of the ground energy pins inputs to the ground space
GROUND_TOL = 1e-12
# C̄ and C_ea closer than this trigger the entanglement-breaking diagnostic
AGREEMENT_TOL = 1e-6


class EnergyConstrainedCapacities(NamedTuple):
    """Holevo and entanglement-assisted capacities under ``Tr Hρ ≤ h``."""

    holevo: CapacityResult
    entanglement_assisted: CapacityResult
    diagnostic: EntanglementBreakingReport | None


def _state_of(parameters: np.ndarray, d: int) -> ComplexMatrix:
    m = (parameters[: d * d] + 1j * parameters[d * d :]).reshape(d, d)
    rho = m @ m.conj().T
    return rho / np.real(np.trace(rho))


def entanglement_assisted(
    channel: KrausChannel,
    constraint: EnergyConstraint | None = None,
    opts: CapacityOptions = DEFAULT_OPTIONS,
) -> CapacityResult:
    """``C_ea(Φ|H,h) = sup_{Tr Hρ ≤ h} I(Φ,ρ)`` for a single channel use.

    ``I(Φ,·)`` is concave; it is maximized with SLSQP over ``ρ = MM†/Tr MM†``.
    The first restart starts at the maximally mixed state.
    """
    d = channel.dim_in
    complement = complementary(channel)
    hamiltonian = None if constraint is None else constraint.hamiltonian.matrix
    bound = np.inf if constraint is None else constraint.bound

    def negative_information(parameters: np.ndarray) -> float:
        h_in, h_out, h_env = mutual_info_terms(
            channel, complement, _state_of(parameters, d)
        )
        return -(h_in + h_out - h_env)

    constraints = []
    if constraint is not None:
        constraints.append(
            {
                "type": "ineq",
                "fun": lambda x: bound
                - float(np.real(np.trace(hamiltonian @ _state_of(x, d)))),
            }
        )

    def task(index: int, rng: np.random.Generator) -> RestartOutcome:
        if index == 0:
            start = np.concatenate([np.eye(d).reshape(-1), np.zeros(d * d)])
        else:
            start = rng.standard_normal(2 * d * d)
        solution = scipy.optimize.minimize(
            negative_information,
            start,
            method="SLSQP",
            constraints=constraints,
            options={"maxiter": opts.max_iterations, "ftol": opts.tol},
        )
        rho = _state_of(solution.x, d)
        feasible = (
            hamiltonian is None
            or np.real(np.trace(hamiltonian @ rho)) <= bound + 1e-9
        )
        value = -float(solution.fun) if feasible else -np.inf
        return RestartOutcome(value, int(solution.nit), bool(solution.success), rho)

    logger.info(
        "Entanglement-assisted capacity of %r with %d restarts", channel, opts.restarts
    )
    outcomes = run_restarts(task, opts)
    best, history = select_best(outcomes)
    winner = outcomes[best]
    argmax = DensityMatrix(winner.payload)  # type: ignore[arg-type]
    value = mutual_info(channel, argmax)
    return CapacityResult(
        value=value,
        argmax=argmax,
        iterations=winner.iterations,
        restarts=len(outcomes),
        converged=winner.converged,
        history=history,
    )


def _lift(result: CapacityResult, basis: ComplexMatrix) -> CapacityResult:
    argmax = result.argmax
    if isinstance(argmax, Ensemble):
        lifted: Ensemble | DensityMatrix = Ensemble(
            [(p, DensityMatrix(basis @ s.matrix @ basis.conj().T)) for p, s in argmax]
        )
    else:
        lifted = DensityMatrix(basis @ argmax.matrix @ basis.conj().T)
    return CapacityResult(
        value=result.value,
        argmax=lifted,
        iterations=result.iterations,
        restarts=result.restarts,
        converged=result.converged,
        history=result.history,
    )


def energy_constrained_capacities(
    channel: KrausChannel,
    constraint: EnergyConstraint,
    opts: CapacityOptions = DEFAULT_OPTIONS,
) -> EnergyConstrainedCapacities:
    """``C̄(Φ|H,h)`` and ``C_ea(Φ|H,h)`` for a single channel use.

    When the bound equals the ground energy of ``H`` only states on the
    ground space are feasible, and both capacities are computed for the
    channel restricted to it. When the two values agree within ``1e-6`` the
    entanglement-breaking diagnostic runs at the average state of the optimal
    ensemble. Its finite-dimensional conclusion needs no continuity
    assumption on the relative entropy; none is checked.

    Raises:
        InfeasibleConstraintError: if ``h`` is below the ground energy of ``H``.
    """
    if constraint.dim != channel.dim_in:
        raise ValueError(
            f"Hamiltonian of dimension {constraint.dim} does not match channel "
            f"input dimension {channel.dim_in}"
        )
    eigenvalues, eigenvectors = eig_hermitian(constraint.hamiltonian)
    ground = float(eigenvalues[0])
    if constraint.bound < ground - GROUND_TOL:
        raise InfeasibleConstraintError(
            f"Energy bound {constraint.bound!r} is below the ground energy "
            f"{ground!r}; no state is feasible"
        )

    if constraint.bound <= ground + GROUND_TOL:
        basis = eigenvectors[:, eigenvalues <= ground + GROUND_TOL]
        logger.info(
            "Energy bound at the ground energy; restricting to the %d-dim ground "
            "space",
            basis.shape[1],
        )
        restricted = channel.restrict(basis)
        holevo = _lift(holevo_capacity(restricted, opts), basis)
        assisted = _lift(entanglement_assisted(restricted, None, opts), basis)
    else:
        holevo = holevo_capacity(channel, opts, constraint)
        assisted = entanglement_assisted(channel, constraint, opts)

    diagnostic = None
    if abs(float(holevo.value) - float(assisted.value)) <= AGREEMENT_TOL:
        ensemble = holevo.argmax
        assert isinstance(ensemble, Ensemble)
        diagnostic = eb_equality_diagnostic(channel, ensemble.average(), opts)
    return EnergyConstrainedCapacities(holevo, assisted, diagnostic)
