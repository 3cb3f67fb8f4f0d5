import numpy as np
import pytest
from petzkit import DensityMatrix, Ensemble, KrausChannel
from petzkit.capacity import CapacityOptions
from petzkit.channels import dephasing, identity, trine, trine_vectors

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]])
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def ket(*amplitudes: complex) -> np.ndarray:
    v = np.array(amplitudes, dtype=complex)
    return v / np.linalg.norm(v)


def projector(*amplitudes: complex) -> DensityMatrix:
    return DensityMatrix.from_vector(ket(*amplitudes))


@pytest.fixture
def rng() -> np.random.Generator:
    """A seeded generator, fresh for every test."""
    return np.random.default_rng(20240601)


@pytest.fixture
def qubit_identity() -> KrausChannel:
    """The noiseless qubit channel."""
    return identity(2)


@pytest.fixture
def qubit_dephasing() -> KrausChannel:
    """Completely dephasing qubit channel ``ρ ↦ diag(ρ)``."""
    return dephasing(2)


@pytest.fixture
def trine_channel() -> KrausChannel:
    """Qubit-to-qutrit trine measurement channel.

    Its three Kraus operators ``|k⟩⟨φ_k|`` have rank one, and every output
    has rank at least two.
    """
    return trine()


@pytest.fixture
def trine_ensemble() -> Ensemble:
    """The three normalized trine states with uniform weights."""
    return Ensemble.from_vectors(np.full(3, 1 / 3), list(trine_vectors()))


@pytest.fixture
def basis_ensemble() -> Ensemble:
    """``{½, |0⟩⟨0|; ½, |1⟩⟨1|}``."""
    return Ensemble.from_vectors([0.5, 0.5], list(np.eye(2)))


@pytest.fixture
def bell_state() -> DensityMatrix:
    """``|Φ⁺⟩⟨Φ⁺|`` on ``2 ⊗ 2``."""
    return projector(1, 0, 0, 1)


@pytest.fixture
def bell_ensemble() -> Ensemble:
    """The four Bell states with uniform weights."""
    s = 1 / np.sqrt(2)
    vectors = [[s, 0, 0, s], [s, 0, 0, -s], [0, s, s, 0], [0, s, -s, 0]]
    return Ensemble.from_vectors(np.full(4, 1 / 4), vectors)


@pytest.fixture
def fast_options() -> CapacityOptions:
    """Optimizer settings small enough for the test suite."""
    return CapacityOptions(restarts=4, max_iterations=300, seed=7)
