import numpy as np
import pytest
from numpy.testing import assert_allclose
from petzkit import DensityMatrix, HermitianOperator, PureStateVector
from petzkit.exceptions import DimensionMismatchError, DomainError, ValidationError
from petzkit.matcore import (
    eig_hermitian,
    inv_sqrtm_psd,
    is_psd,
    numerical_rank,
    op_func,
    partial_trace,
    purify,
    reduced_state,
    schmidt,
    support_basis,
    support_projector,
    tensor,
    trace_norm,
)

from .conftest import PAULI_X, ket, projector


def test_eig_hermitian_diagonal() -> None:
    eigenvalues, eigenvectors = eig_hermitian(np.diag([3.0, 1.0]))
    assert_allclose(eigenvalues, [1.0, 3.0])
    assert_allclose(np.abs(eigenvectors), [[0, 1], [1, 0]])


def test_eig_hermitian_pauli_x() -> None:
    eigenvalues, eigenvectors = eig_hermitian(HermitianOperator(PAULI_X))
    assert_allclose(eigenvalues, [-1.0, 1.0])
    assert_allclose(eigenvectors.conj().T @ eigenvectors, np.eye(2), atol=1e-12)


def test_eig_hermitian_two_state_average() -> None:
    average = 0.5 * projector(1, 0).matrix + 0.5 * projector(1, 1).matrix
    eigenvalues, _ = eig_hermitian(average)
    assert_allclose(
        eigenvalues, [np.sin(np.pi / 8) ** 2, np.cos(np.pi / 8) ** 2], atol=1e-12
    )


def test_hermitian_operator_rejects_non_hermitian() -> None:
    with pytest.raises(ValidationError, match="not Hermitian"):
        HermitianOperator([[0, 1], [0, 0]])


def test_hermitian_operator_rejects_non_square() -> None:
    with pytest.raises(ValidationError, match="square"):
        HermitianOperator(np.zeros((2, 3)))


def test_density_matrix_validation() -> None:
    with pytest.raises(ValidationError, match="not positive"):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(ValidationError, match="unit trace"):
        DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(ValidationError, match="NaN"):
        DensityMatrix([[np.nan, 0], [0, 1]])


def test_density_matrix_clamps_round_off() -> None:
    rho = DensityMatrix(np.diag([1.0 + 1e-11, -1e-11]))
    assert eig_hermitian(rho)[0][0] >= 0.0


def test_pure_state_vector() -> None:
    with pytest.raises(ValidationError, match="not normalized"):
        PureStateVector([1.0, 1.0])
    psi = PureStateVector.normalized([1.0, 1.0])
    assert psi.dim == 2
    assert_allclose(psi.projector().matrix, np.full((2, 2), 0.5))
    with pytest.raises(ValidationError, match="zero vector"):
        PureStateVector.normalized([0.0, 0.0])


def test_maximally_mixed() -> None:
    assert_allclose(DensityMatrix.maximally_mixed(3).matrix, np.eye(3) / 3)


def test_op_func() -> None:
    root = op_func(HermitianOperator(np.diag([4.0, 9.0])), np.sqrt)
    assert_allclose(root.matrix, np.diag([2.0, 3.0]), atol=1e-12)

    inverse_root = op_func(HermitianOperator(np.diag([4.0, 0.0])), lambda x: x**-0.5)
    assert_allclose(inverse_root.matrix, np.diag([0.5, 0.0]), atol=1e-12)

    integrand = op_func(
        HermitianOperator(np.diag([0.5, 0.5])), lambda x: -x * np.log2(x)
    )
    assert_allclose(integrand.matrix, np.diag([0.5, 0.5]), atol=1e-12)


def test_op_func_domain_errors() -> None:
    with pytest.raises(DomainError, match="undefined"):
        op_func(HermitianOperator(np.diag([1.0, -1.0])), np.log)
    with pytest.raises(ValueError, match="nonnegative"):
        op_func(HermitianOperator(np.eye(2)), np.sqrt, support_tol=-1.0)


def test_inv_sqrtm_psd_is_pseudo_inverse() -> None:
    m = np.diag([4.0, 1e-20])
    assert_allclose(inv_sqrtm_psd(m), np.diag([0.5, 0.0]), atol=1e-12)


def test_tensor() -> None:
    assert_allclose(tensor(np.eye(2), np.eye(2)), np.eye(4))
    assert_allclose(
        tensor(np.diag([1, 2]), np.diag([1, 3])), np.diag([1.0, 3.0, 2.0, 6.0])
    )
    block = tensor(projector(1, 0).matrix, PAULI_X)
    assert_allclose(block[:2, :2], PAULI_X)
    assert_allclose(block[2:, :], 0)


def test_partial_trace(bell_state: DensityMatrix) -> None:
    assert_allclose(partial_trace(bell_state, (2, 2), keep="A"), np.eye(2) / 2)
    assert_allclose(partial_trace(bell_state, (2, 2), keep="B"), np.eye(2) / 2)

    rho = np.diag([0.7, 0.3])
    sigma = np.diag([0.2, 0.5, 0.3])
    product = tensor(rho, sigma)
    assert_allclose(partial_trace(product, (2, 3), keep="A"), rho, atol=1e-12)
    assert_allclose(partial_trace(product, (2, 3), keep="B"), sigma, atol=1e-12)
    assert_allclose(reduced_state(DensityMatrix(product), (2, 3)).matrix, rho)

    with pytest.raises(DimensionMismatchError):
        partial_trace(bell_state, (2, 3))
    with pytest.raises(ValueError, match="keep"):
        partial_trace(bell_state, (2, 2), keep="C")  # type: ignore[arg-type]


def test_schmidt() -> None:
    product = schmidt(np.kron(ket(1, 0), ket(0, 1)), (2, 2))
    assert product.rank() == 1
    assert_allclose(product.coefficients[0], 1.0)

    bell = schmidt(ket(1, 0, 0, 1), (2, 2))
    assert bell.rank() == 2
    assert_allclose(bell.coefficients, [1 / np.sqrt(2)] * 2)

    skewed = schmidt(ket(2, 0, 0, 1), (2, 2))
    assert_allclose(skewed.coefficients, [2 / np.sqrt(5), 1 / np.sqrt(5)])

    with pytest.raises(DimensionMismatchError):
        schmidt(ket(1, 0, 0), (2, 2))


def test_purify() -> None:
    pure = purify(projector(1, 0))
    assert_allclose(np.abs(pure.amplitudes), [1, 0, 0, 0], atol=1e-12)

    mixed = purify(DensityMatrix.maximally_mixed(2))
    assert_allclose(np.abs(mixed.amplitudes), np.abs(ket(1, 0, 0, 1)), atol=1e-12)

    skewed = purify(DensityMatrix(np.diag([0.8, 0.2])))
    assert_allclose(
        np.abs(skewed.amplitudes), [np.sqrt(0.8), 0, 0, np.sqrt(0.2)], atol=1e-12
    )
    marginal = partial_trace(skewed.projector(), (2, 2), keep="A")
    assert_allclose(marginal, np.diag([0.8, 0.2]), atol=1e-12)


def test_helpers() -> None:
    assert_allclose(trace_norm(np.diag([1.0, -2.0])), 3.0)
    assert trace_norm(np.zeros((0, 0))) == 0.0
    assert is_psd(np.diag([1.0, 0.0]))
    assert not is_psd(np.diag([1.0, -1e-3]))
    assert numerical_rank(np.diag([1.0, 1e-12])) == 1
    basis = support_basis(np.diag([0.0, 0.25, 0.75]))
    assert basis.shape == (3, 2)
    # largest eigenvalue first
    assert_allclose(np.abs(basis[:, 0]), [0, 0, 1])


def test_support_projector() -> None:
    rho = DensityMatrix(np.array([[0.5, 0.5], [0.5, 0.5]]))
    assert_allclose(support_projector(rho.matrix), rho.matrix, atol=1e-12)
    p = support_projector(np.diag([0.0, 0.25, 0.75]))
    assert_allclose(p, np.diag([0.0, 1.0, 1.0]), atol=1e-12)
    assert_allclose(support_projector(np.zeros((2, 2))), np.zeros((2, 2)))
