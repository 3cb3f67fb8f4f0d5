"""Dense complex Hermitian linear algebra.

All operators are stored as read-only ``numpy`` arrays. Bipartite spaces are
ordered with the left factor varying slowest (``np.kron`` convention), and
every function here follows that single convention.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Callable, NamedTuple

import numpy as np
import scipy.linalg

from .config import DEFAULT_TOLERANCES, Tolerances
from .exceptions import (
    DimensionMismatchError,
    DomainError,
    EigensolverError,
    ValidationError,
)

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from ._types import ComplexMatrix, Dims, Subsystem

logger = logging.getLogger(__name__)

ScalarFunction = Callable[[np.ndarray], np.ndarray]


def as_complex_matrix(data: ArrayLike, name: str = "matrix") -> ComplexMatrix:
    """Return ``data`` as a read-only, finite, two-dimensional complex array.

    Args:
        data:
            Anything ``numpy`` can turn into a 2-D array.
        name:
            Used in error messages.
    """
    matrix = np.array(data, dtype=np.complex128)
    if matrix.ndim != 2:
        raise ValidationError(
            f"{name} must be two-dimensional, got shape {matrix.shape}"
        )
    if not np.all(np.isfinite(matrix)):
        raise ValidationError(f"{name} contains NaN or Inf entries")
    matrix.setflags(write=False)
    return matrix


class HermitianOperator:
    """A Hermitian operator on a ``dim``-dimensional space.

    The input is checked against ``‖M - M†‖_max ≤ tol · max(1, ‖M‖_max)`` and
    stored symmetrized as ``(M + M†) / 2``.

    Args:
        matrix:
            Square complex matrix.
        tol:
            Relative hermiticity tolerance.
    """

    __slots__ = ("_matrix",)

    def __init__(
        self, matrix: ArrayLike, tol: float = DEFAULT_TOLERANCES.hermitian
    ) -> None:
        m = as_complex_matrix(matrix)
        if m.shape[0] != m.shape[1]:
            raise ValidationError(f"Hermitian operator must be square, got {m.shape}")
        scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
        deviation = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if deviation > tol * scale:
            raise ValidationError(
                f"Operator is not Hermitian: ‖M - M†‖_max = {deviation:.3e}",
                residual=deviation,
            )
        symmetric = (m + m.conj().T) / 2
        symmetric.setflags(write=False)
        self._matrix = symmetric

    @property
    def matrix(self) -> ComplexMatrix:
        """The (read-only) matrix of this operator."""
        return self._matrix

    @property
    def dim(self) -> int:
        """Dimension of the underlying space."""
        return int(self._matrix.shape[0])

    def eigenvalues(self) -> np.ndarray:
        """Return the eigenvalues in ascending order."""
        return eig_hermitian(self)[0]

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return np.asarray(self._matrix, dtype=dtype)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


class DensityMatrix(HermitianOperator):
    """A positive semidefinite operator with unit trace.

    Eigenvalues in ``[-psd_clamp, 0)`` are clamped to zero, which absorbs
    round-off from upstream channel applications.

    Args:
        matrix:
            Square complex matrix.
        tolerances:
            Thresholds for hermiticity, positivity and trace.
    """

    __slots__ = ()

    def __init__(
        self, matrix: ArrayLike, tolerances: Tolerances = DEFAULT_TOLERANCES
    ) -> None:
        super().__init__(matrix, tol=tolerances.hermitian)

        eigenvalues, eigenvectors = eig_hermitian(self._matrix)
        if eigenvalues.size and eigenvalues[0] < -tolerances.psd_clamp:
            raise ValidationError(
                f"State is not positive: smallest eigenvalue {eigenvalues[0]:.3e}",
                residual=float(-eigenvalues[0]),
            )
        if eigenvalues.size and eigenvalues[0] < 0:
            clamped = np.clip(eigenvalues, 0.0, None)
            rebuilt = (eigenvectors * clamped) @ eigenvectors.conj().T
            rebuilt = (rebuilt + rebuilt.conj().T) / 2
            rebuilt.setflags(write=False)
            self._matrix = rebuilt

        trace = float(np.real(np.trace(self._matrix)))
        if abs(trace - 1.0) > tolerances.trace:
            raise ValidationError(
                f"State does not have unit trace: Tr = {trace!r}",
                residual=abs(trace - 1.0),
            )

    @classmethod
    def from_vector(cls, vector: ArrayLike | PureStateVector) -> DensityMatrix:
        """Return the projector onto a unit vector."""
        if isinstance(vector, PureStateVector):
            v = vector.amplitudes
        else:
            v = PureStateVector(vector).amplitudes
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityMatrix:
        """Return ``I / dim``."""
        return cls(np.eye(dim) / dim)


class PureStateVector:
    """A unit vector.

    Args:
        amplitudes:
            The coordinates of the vector.
        tol:
            Allowed deviation of the Euclidean norm from one.
    """

    __slots__ = ("_amplitudes",)

    def __init__(self, amplitudes: ArrayLike, tol: float = 1e-12) -> None:
        v = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise ValidationError("State vector contains NaN or Inf entries")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > tol:
            raise ValidationError(
                f"State vector is not normalized: ‖v‖ = {norm!r}",
                residual=abs(norm - 1.0),
            )
        v.setflags(write=False)
        self._amplitudes = v

    @classmethod
    def normalized(cls, amplitudes: ArrayLike) -> PureStateVector:
        """Normalize ``amplitudes`` and wrap them."""
        v = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValidationError("Cannot normalize the zero vector")
        return cls(v / norm)

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    @property
    def dim(self) -> int:
        return int(self._amplitudes.shape[0])

    def projector(self) -> DensityMatrix:
        """Return ``|v⟩⟨v|``."""
        return DensityMatrix.from_vector(self)

    def __repr__(self) -> str:
        return f"PureStateVector(dim={self.dim})"


def _matrix_of(operator: HermitianOperator | ArrayLike) -> np.ndarray:
    if isinstance(operator, HermitianOperator):
        return operator.matrix
    return np.asarray(operator, dtype=np.complex128)


def eig_hermitian(
    operator: HermitianOperator | ArrayLike,
) -> tuple[np.ndarray, ComplexMatrix]:
    """Eigendecomposition ``H = U diag(λ) U†`` of a Hermitian operator.

    Args:
        operator:
            A :class:`HermitianOperator` or a Hermitian matrix.

    Returns:
        Eigenvalues in ascending order and a unitary matrix whose columns are
        the corresponding eigenvectors.

    Raises:
        EigensolverError: if LAPACK does not converge.
    """
    matrix = _matrix_of(operator)
    try:
        eigenvalues, eigenvectors = scipy.linalg.eigh(matrix)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigensolverError(
            f"Hermitian eigensolver failed for a {matrix.shape[0]}x"
            f"{matrix.shape[0]} matrix: {e}"
        ) from e
    return eigenvalues, eigenvectors


def spectral_apply(
    matrix: ArrayLike, f: ScalarFunction, support_tol: float | None = None
) -> np.ndarray:
    """Apply ``f`` to the eigenvalues of a Hermitian matrix, on its support.

    Eigenvalues with ``|λ| ≤ support_tol · max|λ|`` are mapped to zero (the
    pseudo-inverse convention). ``support_tol`` defaults to the shared support
    threshold.

    Raises:
        DomainError: if ``f`` is not finite at a retained eigenvalue.
    """
    if support_tol is None:
        support_tol = DEFAULT_TOLERANCES.support
    eigenvalues, eigenvectors = eig_hermitian(matrix)
    values = np.zeros_like(eigenvalues)
    scale = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
    if scale > 0:
        keep = np.abs(eigenvalues) > support_tol * scale
        with np.errstate(all="ignore"):
            mapped = np.asarray(f(eigenvalues[keep]), dtype=np.float64)
        if not np.all(np.isfinite(mapped)):
            bad = eigenvalues[keep][~np.isfinite(mapped)]
            raise DomainError(
                f"Function is undefined at retained eigenvalue(s) {bad.tolist()}"
            )
        values[keep] = mapped
    return (eigenvectors * values) @ eigenvectors.conj().T


def op_func(
    operator: HermitianOperator,
    f: ScalarFunction,
    support_tol: float = DEFAULT_TOLERANCES.support,
) -> HermitianOperator:
    """Apply a scalar function to a Hermitian operator through its spectrum.

    Args:
        operator:
            The operator ``H``.
        f:
            A vectorized scalar function, e.g. ``np.sqrt``.
        support_tol:
            Eigenvalues at or below ``support_tol · λ_max`` (in magnitude) are
            outside the support and map to zero.

    Returns:
        ``f(H)`` restricted to the support of ``H``.
    """
    if support_tol < 0:
        raise ValueError(f"support_tol must be nonnegative, got {support_tol}")
    return HermitianOperator(spectral_apply(operator.matrix, f, support_tol))


def log2m(matrix: ArrayLike, support_tol: float = 0.0) -> np.ndarray:
    """Base-2 logarithm of a PSD matrix, zero outside its support.

    Eigenvalues at or below ``support_tol · λ_max`` (and any nonpositive
    round-off) count as outside the support.
    """
    eigenvalues, eigenvectors = eig_hermitian(matrix)
    scale = float(np.max(eigenvalues)) if eigenvalues.size else 0.0
    keep = eigenvalues > max(support_tol * scale, 0.0)
    values = np.zeros_like(eigenvalues)
    values[keep] = np.log2(eigenvalues[keep])
    return (eigenvectors * values) @ eigenvectors.conj().T


def log2m_floor(matrix: ArrayLike, floor: float = 1e-300) -> np.ndarray:
    """Base-2 logarithm of a PSD matrix with eigenvalues floored at ``floor``.

    The kernel is mapped to a large negative value instead of zero, which keeps
    linearizations of entropic objectives honest near the boundary.
    """
    eigenvalues, eigenvectors = eig_hermitian(matrix)
    values = np.log2(np.maximum(eigenvalues, floor))
    return (eigenvectors * values) @ eigenvectors.conj().T


def sqrtm_psd(matrix: ArrayLike) -> np.ndarray:
    """Square root of a PSD matrix (negative round-off clamped to zero)."""
    eigenvalues, eigenvectors = eig_hermitian(matrix)
    values = np.sqrt(np.clip(eigenvalues, 0.0, None))
    return (eigenvectors * values) @ eigenvectors.conj().T


def inv_sqrtm_psd(
    matrix: ArrayLike, support_tol: float = DEFAULT_TOLERANCES.support
) -> np.ndarray:
    """Pseudo-inverse square root ``M^{-1/2}`` on the support of a PSD matrix."""
    return spectral_apply(matrix, _inv_sqrt_positive, support_tol)


def support_basis(
    matrix: ArrayLike, support_tol: float = DEFAULT_TOLERANCES.support
) -> np.ndarray:
    """Orthonormal basis (as columns) of the support of a PSD matrix."""
    eigenvalues, eigenvectors = eig_hermitian(matrix)
    scale = float(np.max(eigenvalues)) if eigenvalues.size else 0.0
    if scale <= 0:
        return eigenvectors[:, :0]
    keep = eigenvalues > support_tol * scale
    # largest eigenvalues first
    return eigenvectors[:, keep][:, ::-1]


def support_projector(
    matrix: ArrayLike, support_tol: float = DEFAULT_TOLERANCES.support
) -> np.ndarray:
    """Orthogonal projector onto the support of a PSD matrix."""
    basis = support_basis(matrix, support_tol)
    return basis @ basis.conj().T


def numerical_rank(
    matrix: ArrayLike, tol: float = DEFAULT_TOLERANCES.numerical_rank
) -> int:
    """Number of singular values strictly above ``tol``."""
    singular_values = np.linalg.svd(np.asarray(matrix), compute_uv=False)
    return int(np.sum(singular_values > tol))


def trace_norm(matrix: ArrayLike) -> float:
    """Sum of the singular values."""
    m = np.asarray(matrix)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, "nuc"))


def is_psd(matrix: ArrayLike, tol: float = DEFAULT_TOLERANCES.psd_clamp) -> bool:
    """Whether a Hermitian matrix has no eigenvalue below ``-tol``."""
    eigenvalues, _ = eig_hermitian(matrix)
    return bool(eigenvalues.size == 0 or eigenvalues[0] >= -tol)


def tensor(a: ArrayLike, b: ArrayLike) -> ComplexMatrix:
    """Kronecker product ``A ⊗ B`` (left factor varies slowest)."""
    return np.kron(np.asarray(a), np.asarray(b))


def partial_trace(
    matrix: HermitianOperator | ArrayLike, dims: Dims, keep: Subsystem = "A"
) -> ComplexMatrix:
    """Trace out one factor of an operator on ``A ⊗ B``.

    Args:
        matrix:
            A ``(dA·dB) x (dA·dB)`` matrix.
        dims:
            ``(dA, dB)``.
        keep:
            ``"A"`` to trace out ``B``, ``"B"`` to trace out ``A``.
    """
    m = _matrix_of(matrix)
    d_a, d_b = dims
    if m.shape != (d_a * d_b, d_a * d_b):
        raise DimensionMismatchError(
            f"Cannot take partial trace with dims {dims} of a {m.shape} matrix"
        )
    blocks = m.reshape(d_a, d_b, d_a, d_b)
    if keep == "A":
        return np.einsum("ajbj->ab", blocks)
    if keep == "B":
        return np.einsum("iaib->ab", blocks)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def reduced_state(
    rho: DensityMatrix, dims: Dims, keep: Subsystem = "A"
) -> DensityMatrix:
    """Marginal of a bipartite state as a :class:`DensityMatrix`."""
    return DensityMatrix(partial_trace(rho, dims, keep))


class SchmidtDecomposition(NamedTuple):
    """``v = Σ_k c_k a_k ⊗ b_k`` with orthonormal ``a_k`` and ``b_k``.

    ``left`` and ``right`` hold the vectors ``a_k`` and ``b_k`` as columns.
    """

    coefficients: np.ndarray
    left: ComplexMatrix
    right: ComplexMatrix

    def rank(self, tol: float = 1e-10) -> int:
        """Schmidt rank: number of coefficients above ``tol``."""
        return int(np.sum(self.coefficients > tol))


def schmidt(vector: PureStateVector | ArrayLike, dims: Dims) -> SchmidtDecomposition:
    """Schmidt decomposition of a vector in ``A ⊗ B``.

    Coefficients are returned in nonincreasing order.
    """
    v = vector.amplitudes if isinstance(vector, PureStateVector) else np.asarray(vector)
    d_a, d_b = dims
    if v.shape[0] != d_a * d_b:
        raise DimensionMismatchError(
            f"Vector of dimension {v.shape[0]} does not live in {d_a}x{d_b}"
        )
    u, s, vh = np.linalg.svd(v.reshape(d_a, d_b), full_matrices=False)
    return SchmidtDecomposition(coefficients=s, left=u, right=vh.T)


def purify(rho: DensityMatrix) -> PureStateVector:
    """Canonical purification ``(√ρ ⊗ I) Σ_i |i⟩|i⟩``.

    The reference factor is a copy of the input space; ``Tr_R`` of the
    returned projector is ``ρ`` and its Schmidt coefficients are ``√λ(ρ)``.
    """
    vector = sqrtm_psd(rho.matrix).reshape(-1)
    return PureStateVector.normalized(vector)


def _inv_sqrt_positive(x: np.ndarray) -> np.ndarray:
    return 1.0 / np.sqrt(x)
