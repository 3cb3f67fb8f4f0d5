"""Named channels."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Any, Callable, Sequence

import numpy as np

from ..exceptions import ValidationError
from ..matcore import DensityMatrix, eig_hermitian
from .kraus import KrausChannel

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

logger = logging.getLogger(__name__)


def _check_dim(name: str, value: int) -> None:
    if not isinstance(value, (int, np.integer)) or value < 1:
        raise ValidationError(f"{name} must be a positive integer, got {value!r}")


def identity(d: int) -> KrausChannel:
    """The noiseless channel on a ``d``-dimensional space."""
    _check_dim("d", d)
    return KrausChannel([np.eye(d)])


def dephasing(d: int) -> KrausChannel:
    """Completely dephasing channel ``Φ(ρ) = Σ_k ⟨k|ρ|k⟩ |k⟩⟨k|``."""
    _check_dim("d", d)
    return KrausChannel(np.array([np.diag(row) for row in np.eye(d)]))


def partial_trace_channel(dim_b: int, dim_e: int) -> KrausChannel:
    """``Φ(ρ) = Tr_E ρ`` from ``B ⊗ E`` to ``B``, with Kraus ops ``I_B ⊗ ⟨e|``."""
    _check_dim("dim_b", dim_b)
    _check_dim("dim_e", dim_e)
    return KrausChannel(
        [np.kron(np.eye(dim_b), e[None, :]) for e in np.eye(dim_e)]
    )


def trine_vectors() -> np.ndarray:
    """The scaled trine vectors ``√(2/3)[cos(2πk/3), sin(2πk/3)]`` as rows."""
    angles = 2 * np.pi * np.arange(3) / 3
    return np.sqrt(2 / 3) * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def trine() -> KrausChannel:
    """Qubit-to-qutrit channel with rank-one Kraus ops ``|k⟩⟨φ_k|``.

    It is a measurement in the trine POVM with the outcome written to a
    classical register. No pure-state ensemble with full-rank average has its
    Holevo quantity preserved.
    """
    phi = trine_vectors()
    return KrausChannel([np.outer(np.eye(3)[k], phi[k]) for k in range(3)])


def weyl_operators(d: int) -> np.ndarray:
    """The ``d²`` Weyl operators ``X^a Z^b``, shape ``(d², d, d)``."""
    _check_dim("d", d)
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return np.array(
        [
            np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            for a in range(d)
            for b in range(d)
        ]
    )


def depolarizing(d: int, p: float) -> KrausChannel:
    """``Φ(ρ) = (1 - p) ρ + p I/d``.

    Written as a Weyl-twirl, the identity has weight ``1 - p + p/d²`` and each
    other Weyl operator weight ``p/d²``.
    """
    _check_dim("d", d)
    if not 0 <= p <= 1:
        raise ValidationError(f"Depolarizing parameter must be in [0, 1], got {p!r}")
    weights = np.full(d * d, p / d**2)
    weights[0] += 1 - p
    ops = weyl_operators(d) * np.sqrt(weights)[:, None, None]
    return KrausChannel(ops[weights > 0])


def replacement(sigma: DensityMatrix, dim_in: int | None = None) -> KrausChannel:
    """Channel sending every input to ``sigma``.

    Kraus ops ``√λ_a |e_a⟩⟨j|`` for the eigenpairs of ``sigma`` and a basis
    ``|j⟩`` of the input.
    """
    dim_in = sigma.dim if dim_in is None else dim_in
    _check_dim("dim_in", dim_in)
    eigenvalues, eigenvectors = eig_hermitian(sigma)
    ops = [
        np.sqrt(value) * np.outer(vector, basis_vector)
        for value, vector in zip(eigenvalues, eigenvectors.T)
        if value > 0
        for basis_vector in np.eye(dim_in)
    ]
    return KrausChannel(ops)


def unitary(u: ArrayLike) -> KrausChannel:
    """Unitary channel ``ρ ↦ UρU†``."""
    return KrausChannel([np.asarray(u, dtype=np.complex128)])


def measure_prepare(
    povm: Sequence[ArrayLike], states: Sequence[DensityMatrix]
) -> KrausChannel:
    """Entanglement-breaking channel ``Φ(ρ) = Σ_k Tr(E_k ρ) σ_k``.

    Args:
        povm:
            PSD operators ``E_k`` summing to the identity.
        states:
            Output states ``σ_k``, one per POVM element.
    """
    if len(povm) != len(states):
        raise ValidationError(
            f"Got {len(povm)} POVM elements for {len(states)} states"
        )
    ops = []
    for element, sigma in zip(povm, states):
        e_values, e_vectors = eig_hermitian(np.asarray(element, dtype=np.complex128))
        s_values, s_vectors = eig_hermitian(sigma)
        for ev, e_vec in zip(e_values, e_vectors.T):
            if ev <= 0:
                continue
            for sv, s_vec in zip(s_values, s_vectors.T):
                if sv <= 0:
                    continue
                ops.append(np.sqrt(ev * sv) * np.outer(s_vec, e_vec.conj()))
    return KrausChannel.from_approximate(ops, tolerance=1e-9)


CHANNEL_BUILDERS: dict[str, Callable[..., KrausChannel]] = {
    "identity": identity,
    "dephasing": dephasing,
    "partial_trace": partial_trace_channel,
    "trine": trine,
    "depolarizing": depolarizing,
    "replacement": replacement,
    "unitary": unitary,
    "measure_prepare": measure_prepare,
}


def named_channel(name: str, **params: Any) -> KrausChannel:
    """Build one of the channels in :data:`CHANNEL_BUILDERS` by name.

    Args:
        name:
            Builder name, e.g. ``"depolarizing"``.
        params:
            Keyword arguments of the builder, e.g. ``d=2, p=0.5``.
    """
    try:
        builder = CHANNEL_BUILDERS[name]
    except KeyError:
        raise ValidationError(
            f"Unknown channel '{name}', expected one of {sorted(CHANNEL_BUILDERS)}"
        ) from None
    try:
        channel = builder(**params)
    except TypeError as e:
        raise ValidationError(f"Invalid parameters for channel '{name}': {e}") from e
    logger.debug("Built %s channel %r", name, channel)
    return channel
