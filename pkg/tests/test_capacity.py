import dataclasses
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from petzkit import DensityMatrix, Ensemble, HermitianOperator, KrausChannel
from petzkit.capacity import (
    DEFAULT_OPTIONS,
    CapacityOptions,
    EnergyConstraint,
    commutant_dimension,
    constrained_holevo,
    covariance_relation_check,
    eb_equality_diagnostic,
    energy_constrained_capacities,
    entanglement_assisted,
    gap_identity_check,
    holevo_capacity,
    min_output_entropy,
)
from petzkit.channels import depolarizing, identity
from petzkit.entropy import binary_entropy
from petzkit.exceptions import (
    CovarianceError,
    DimensionMismatchError,
    InfeasibleConstraintError,
    ValidationError,
)
from petzkit.petz import pure_case_reconstruction, reversibility_audit
from petzkit.sampling import random_channel, random_density_matrix

from .conftest import HADAMARD, PAULI_X, PAULI_Y, PAULI_Z, projector

TRINE_GRID = 512


def trine_grid_capacity(n_points: int = TRINE_GRID, iterations: int = 3000) -> float:
    """Classical Blahut-Arimoto over real pure inputs of the trine channel."""
    theta = np.linspace(0, np.pi, n_points, endpoint=False)
    angles = 2 * np.pi * np.arange(3) / 3
    transition = (2 / 3) * np.cos(theta[:, None] - angles[None, :]) ** 2
    p = np.full(n_points, 1 / n_points)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_transition = np.where(transition > 0, np.log2(transition), 0.0)
    for _ in range(iterations):
        q = p @ transition
        d = np.sum(transition * (log_transition - np.log2(q)), axis=1)
        p = p * np.exp2(d)
        p /= np.sum(p)
    q = p @ transition
    d = np.sum(transition * (log_transition - np.log2(q)), axis=1)
    return float(p @ d)


def test_options_validation() -> None:
    with pytest.raises(ValueError, match="restarts"):
        CapacityOptions(restarts=0)
    with pytest.raises(ValueError, match="n_workers"):
        CapacityOptions(n_workers=0)
    with pytest.raises(ValueError, match="tol"):
        CapacityOptions(tol=0.0)


def test_holevo_capacity_identity(fast_options: CapacityOptions) -> None:
    result = holevo_capacity(identity(3), fast_options)
    assert float(result.value) == pytest.approx(math.log2(3), abs=1e-4)
    assert result.restarts == fast_options.restarts
    assert len(result.history) == fast_options.restarts
    assert list(result.history) == sorted(result.history)
    assert isinstance(result.argmax, Ensemble)


def test_holevo_capacity_dephasing(
    qubit_dephasing: KrausChannel, fast_options: CapacityOptions
) -> None:
    result = holevo_capacity(qubit_dephasing, fast_options)
    assert float(result.value) == pytest.approx(1.0, abs=1e-4)
    data = result.as_dict()
    assert data["value"] == float(result.value)
    assert data["restarts"] == fast_options.restarts


def test_holevo_capacity_trine(
    trine_channel: KrausChannel, fast_options: CapacityOptions
) -> None:
    result = holevo_capacity(trine_channel, fast_options)
    assert float(result.value) == pytest.approx(trine_grid_capacity(), abs=1e-3)


def test_holevo_capacity_default_options(qubit_dephasing: KrausChannel) -> None:
    result = holevo_capacity(identity(3))
    assert float(result.value) == pytest.approx(math.log2(3), abs=1e-4)
    assert result.restarts == DEFAULT_OPTIONS.restarts

    dephasing = holevo_capacity(qubit_dephasing)
    assert float(dephasing.value) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("channel", [identity(2), identity(3)], ids=["d2", "d3"])
def test_capacity_ensemble_is_reconstructible(
    channel: KrausChannel, fast_options: CapacityOptions
) -> None:
    result = holevo_capacity(channel, fast_options)
    assert float(result.value) == pytest.approx(math.log2(channel.dim_in), abs=1e-4)
    assert isinstance(result.argmax, Ensemble)
    certificate = pure_case_reconstruction(channel, result.argmax)
    assert certificate.equivalence.residual <= 1e-7


def test_capacity_ensemble_drops_dust(
    qubit_dephasing: KrausChannel, fast_options: CapacityOptions
) -> None:
    result = holevo_capacity(qubit_dephasing, fast_options)
    assert float(result.value) == pytest.approx(1.0, abs=1e-4)
    ensemble = result.argmax
    assert isinstance(ensemble, Ensemble)
    # every atom that survives is a basis state, whatever its weight
    report = reversibility_audit(qubit_dephasing, ensemble)
    assert report.max_residual <= 1e-7
    certificate = pure_case_reconstruction(qubit_dephasing, ensemble)
    assert certificate.equivalence.residual <= 1e-7


def test_holevo_capacity_is_reproducible(
    trine_channel: KrausChannel, fast_options: CapacityOptions
) -> None:
    first = holevo_capacity(trine_channel, fast_options)
    threaded = holevo_capacity(
        trine_channel, dataclasses.replace(fast_options, n_workers=2)
    )
    assert float(first.value) == float(threaded.value)
    assert first.history == threaded.history


def test_min_output_entropy(
    qubit_dephasing: KrausChannel,
    trine_channel: KrausChannel,
    fast_options: CapacityOptions,
) -> None:
    assert float(min_output_entropy(qubit_dephasing, fast_options).value) == (
        pytest.approx(0.0, abs=1e-6)
    )
    assert float(min_output_entropy(trine_channel, fast_options).value) == (
        pytest.approx(1.0, abs=1e-4)
    )
    noisy = min_output_entropy(depolarizing(2, 0.5), fast_options)
    assert float(noisy.value) == pytest.approx(binary_entropy(0.75), abs=1e-6)
    assert isinstance(noisy.argmax, DensityMatrix)
    assert list(noisy.history) == sorted(noisy.history, reverse=True)


def test_trine_second_eigenvalue(trine_channel: KrausChannel) -> None:
    # smallest second-largest output eigenvalue over real pure inputs
    theta = np.linspace(0, np.pi, TRINE_GRID, endpoint=False)
    second = [
        np.linalg.eigvalsh(trine_channel.apply(projector(c, s)).matrix)[-2]
        for c, s in zip(np.cos(theta), np.sin(theta))
    ]
    assert float(np.min(second)) == pytest.approx(1 / 6, abs=1e-9)


def test_commutant_dimension() -> None:
    assert commutant_dimension([PAULI_X, PAULI_Z]) == 1
    assert commutant_dimension([PAULI_Z]) == 2
    assert commutant_dimension([np.eye(3)]) == 9


def test_covariance_identity(fast_options: CapacityOptions) -> None:
    report = covariance_relation_check(identity(2), [PAULI_X, PAULI_Z], fast_options)
    assert report.residual <= 1e-4
    data = report.as_dict()
    assert data["log_dim"] == 1.0

    noisy = covariance_relation_check(
        depolarizing(2, 0.5), [PAULI_X, PAULI_Y, PAULI_Z], fast_options
    )
    assert noisy.residual <= 1e-4
    assert float(noisy.holevo.value) == pytest.approx(
        1 - binary_entropy(0.75), abs=1e-4
    )


def test_covariance_errors(
    qubit_dephasing: KrausChannel,
    qubit_identity: KrausChannel,
    trine_channel: KrausChannel,
    fast_options: CapacityOptions,
) -> None:
    with pytest.raises(CovarianceError, match="unitary 2") as excinfo:
        covariance_relation_check(
            qubit_dephasing, [PAULI_X, PAULI_Z, HADAMARD], fast_options
        )
    assert excinfo.value.index == 2

    with pytest.raises(CovarianceError, match="reducibly"):
        covariance_relation_check(qubit_identity, [PAULI_Z], fast_options)
    with pytest.raises(CovarianceError, match="At least one"):
        covariance_relation_check(qubit_identity, [], fast_options)
    with pytest.raises(DimensionMismatchError):
        covariance_relation_check(trine_channel, [PAULI_X], fast_options)


def test_constrained_holevo(
    qubit_dephasing: KrausChannel,
    qubit_identity: KrausChannel,
    fast_options: CapacityOptions,
) -> None:
    mixed = DensityMatrix.maximally_mixed(2)
    result = constrained_holevo(qubit_dephasing, mixed, fast_options)
    assert float(result.value) == pytest.approx(1.0, abs=1e-4)
    assert isinstance(result.argmax, Ensemble)
    assert_allclose(result.argmax.average().matrix, mixed.matrix, atol=1e-9)

    skewed = DensityMatrix(np.diag([0.8, 0.2]))
    value = float(constrained_holevo(qubit_identity, skewed, fast_options).value)
    assert value == pytest.approx(binary_entropy(0.8), abs=1e-6)

    pure_state = projector(1, 1)
    pure = float(constrained_holevo(qubit_dephasing, pure_state, fast_options).value)
    assert pure == pytest.approx(0.0, abs=1e-9)

    with pytest.raises(DimensionMismatchError):
        constrained_holevo(qubit_dephasing, DensityMatrix.maximally_mixed(3))


def test_gap_identity(rng: np.random.Generator, fast_options: CapacityOptions) -> None:
    channel = random_channel(2, 3, rng=rng)
    rho = random_density_matrix(2, rng=rng)
    report = gap_identity_check(channel, rho, fast_options, n_samples=20)
    assert report.identity_residual <= 1e-6
    assert report.decomposition_deviation <= 1e-8
    assert report.gap >= -1e-9
    assert report.n_samples == 20
    assert report.as_dict()["entropy"] == report.entropy


def test_eb_diagnostic_dephasing(
    qubit_dephasing: KrausChannel, fast_options: CapacityOptions
) -> None:
    report = eb_equality_diagnostic(
        qubit_dephasing, DensityMatrix.maximally_mixed(2), fast_options
    )
    assert report.equality
    assert report.constrained_holevo == pytest.approx(1.0, abs=1e-4)
    assert report.mutual_information == pytest.approx(1.0)
    assert report.entanglement_breaking
    assert report.reconstruction_residual is not None
    assert report.reconstruction_residual <= 1e-7
    assert report.as_dict()["entanglement_breaking"] is True


def test_eb_diagnostic_identity(
    qubit_identity: KrausChannel, fast_options: CapacityOptions
) -> None:
    report = eb_equality_diagnostic(
        qubit_identity, DensityMatrix.maximally_mixed(2), fast_options
    )
    assert not report.equality
    assert report.gap == pytest.approx(1.0, abs=1e-4)
    assert report.kraus is None
    assert not report.entanglement_breaking


def test_entanglement_assisted(fast_options: CapacityOptions) -> None:
    result = entanglement_assisted(identity(2), None, fast_options)
    assert float(result.value) == pytest.approx(2.0, abs=1e-6)
    assert isinstance(result.argmax, DensityMatrix)


def test_energy_constraint_validation() -> None:
    with pytest.raises(ValidationError, match="positive semidefinite"):
        EnergyConstraint(HermitianOperator(np.diag([-1.0, 1.0])), 0.5)
    with pytest.raises(ValidationError, match="nonnegative"):
        EnergyConstraint(HermitianOperator(np.diag([0.0, 1.0])), -0.5)
    constraint = EnergyConstraint(HermitianOperator(np.diag([0.0, 1.0])), 0.5)
    assert constraint.energy(projector(1, 1)) == pytest.approx(0.5)
    assert constraint.ground_energy() == 0.0


def test_energy_at_ground_level(
    qubit_identity: KrausChannel, fast_options: CapacityOptions
) -> None:
    constraint = EnergyConstraint(HermitianOperator(np.diag([0.0, 1.0])), 0.0)
    capacities = energy_constrained_capacities(
        qubit_identity, constraint, fast_options
    )
    assert float(capacities.holevo.value) == pytest.approx(0.0, abs=1e-9)
    assert float(capacities.entanglement_assisted.value) == pytest.approx(
        0.0, abs=1e-9
    )
    argmax = capacities.entanglement_assisted.argmax
    assert isinstance(argmax, DensityMatrix)
    assert_allclose(argmax.matrix, np.diag([1.0, 0.0]), atol=1e-9)


def test_energy_dephasing(
    qubit_dephasing: KrausChannel, fast_options: CapacityOptions
) -> None:
    constraint = EnergyConstraint(HermitianOperator(np.diag([0.0, 1.0])), 0.5)
    capacities = energy_constrained_capacities(
        qubit_dephasing, constraint, fast_options
    )
    assert float(capacities.holevo.value) == pytest.approx(1.0, abs=1e-4)
    assert float(capacities.entanglement_assisted.value) == pytest.approx(
        1.0, abs=1e-4
    )
    ensemble = capacities.holevo.argmax
    assert isinstance(ensemble, Ensemble)
    assert constraint.energy(ensemble.average()) <= 0.5 + 1e-6


def test_energy_errors(qubit_identity: KrausChannel) -> None:
    above_ground = EnergyConstraint(HermitianOperator(np.diag([1.0, 2.0])), 0.5)
    with pytest.raises(InfeasibleConstraintError, match="ground energy"):
        energy_constrained_capacities(qubit_identity, above_ground)

    qutrit = EnergyConstraint(HermitianOperator(np.diag([0.0, 1.0, 2.0])), 1.0)
    with pytest.raises(ValueError, match="does not match"):
        energy_constrained_capacities(qubit_identity, qutrit)
