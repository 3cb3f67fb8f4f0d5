"""Choi matrices and minimal Kraus representations.

The Choi matrix is unnormalized, ``J = Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)``, with the
input factor varying slowest. Its trace equals ``dim_in`` and trace
preservation is the condition ``Tr_out J = I``.
"""

from __future__ import annotations

import logging
from functools import cmp_to_key
from typing import TYPE_CHECKING

import numpy as np

from ..config import DEFAULT_TOLERANCES, Tolerances
from ..exceptions import DimensionMismatchError, ValidationError
from ..matcore import HermitianOperator, eig_hermitian, partial_trace
from .kraus import KrausChannel

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from .._types import ComplexMatrix

logger = logging.getLogger(__name__)


class ChoiMatrix:
    """Validated Choi matrix of a channel.

    Args:
        matrix:
            ``(dim_in·dim_out) x (dim_in·dim_out)`` matrix.
        dim_in:
            Input dimension of the channel.
        dim_out:
            Output dimension of the channel.
        tolerances:
            ``psd_clamp`` bounds negative eigenvalues, ``completeness`` bounds
            ``max|Tr_out J - I|``.
    """

    __slots__ = ("_operator", "dim_in", "dim_out")

    def __init__(
        self,
        matrix: ArrayLike,
        dim_in: int,
        dim_out: int,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> None:
        operator = HermitianOperator(matrix, tol=tolerances.hermitian)
        if operator.dim != dim_in * dim_out:
            raise DimensionMismatchError(
                f"Choi matrix of dimension {operator.dim} does not match "
                f"{dim_in} -> {dim_out}"
            )
        eigenvalues = operator.eigenvalues()
        if eigenvalues[0] < -tolerances.psd_clamp * max(1, dim_in):
            raise ValidationError(
                f"Choi matrix is not positive: smallest eigenvalue "
                f"{eigenvalues[0]:.3e}",
                residual=float(-eigenvalues[0]),
            )
        marginal = partial_trace(operator, (dim_in, dim_out), keep="A")
        residual = float(np.max(np.abs(marginal - np.eye(dim_in))))
        if residual > tolerances.completeness:
            raise ValidationError(
                f"Choi matrix is not trace preserving: "
                f"‖Tr_out J - I‖_max = {residual:.3e}",
                residual=residual,
            )
        self._operator = operator
        self.dim_in = dim_in
        self.dim_out = dim_out

    @property
    def matrix(self) -> ComplexMatrix:
        return self._operator.matrix

    def rank(self, tol: float = DEFAULT_TOLERANCES.choi_eig) -> int:
        """Number of eigenvalues above ``tol`` (the minimal Kraus count)."""
        return int(np.sum(self._operator.eigenvalues() > tol))

    def __repr__(self) -> str:
        return f"ChoiMatrix({self.dim_in} -> {self.dim_out})"


def choi_of_operators(ops: np.ndarray) -> ComplexMatrix:
    """Unvalidated Choi matrix ``Σ_k v_k v_k†`` of any stack of operators."""
    n, dim_out, dim_in = ops.shape
    # v_k[i * dim_out + b] = V_k[b, i]
    vectors = ops.transpose(0, 2, 1).reshape(n, dim_in * dim_out)
    return vectors.T @ vectors.conj()


def to_choi(channel: KrausChannel) -> ChoiMatrix:
    """Return the Choi matrix of ``channel``."""
    return ChoiMatrix(
        choi_of_operators(channel.kraus_ops), channel.dim_in, channel.dim_out
    )


def from_choi(
    choi: ChoiMatrix, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> KrausChannel:
    """Minimal Kraus representation from the eigendecomposition of a Choi matrix.

    One operator per eigenvalue above ``tolerances.choi_eig``, in descending
    eigenvalue order. The operators are mutually orthogonal in the
    Hilbert-Schmidt inner product.
    """
    eigenvalues, eigenvectors = eig_hermitian(choi.matrix)
    order = np.argsort(eigenvalues, kind="stable")[::-1]
    keep = [k for k in order if eigenvalues[k] > tolerances.choi_eig]
    ops = [
        np.sqrt(eigenvalues[k])
        * eigenvectors[:, k].reshape(choi.dim_in, choi.dim_out).T
        for k in keep
    ]
    logger.debug(
        "Extracted %d minimal Kraus operators from a %dx%d Choi matrix",
        len(ops),
        choi.matrix.shape[0],
        choi.matrix.shape[0],
    )
    return KrausChannel.from_approximate(ops, tolerance=1e-7, tolerances=tolerances)


def _descending(norms: np.ndarray, tol: float) -> list[int]:
    """Indices by descending norm; norms within ``tol`` keep their input order."""

    def compare(a: int, b: int) -> int:
        if abs(norms[a] - norms[b]) <= tol:
            return a - b
        return -1 if norms[a] > norms[b] else 1

    return sorted(range(len(norms)), key=cmp_to_key(compare))


def minimal_kraus(
    channel: KrausChannel, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> KrausChannel:
    """Return a minimal Kraus representation of ``channel``.

    A Kraus set that is already mutually orthogonal (Hilbert-Schmidt) is
    minimal; it is kept, sorted by descending norm, so that structure such as
    rank-one operators survives. Norms within ``tolerances.choi_eig`` of each
    other count as equal and keep their input order. Otherwise the set is
    extracted from the Choi matrix.
    """
    ops = channel.kraus_ops
    gram = np.einsum("kab,lab->kl", ops.conj(), ops)
    norms = np.real(np.diag(gram))
    off_diagonal = gram - np.diag(np.diag(gram))
    if np.all(norms > tolerances.choi_eig) and np.max(
        np.abs(off_diagonal), initial=0.0
    ) <= tolerances.choi_eig:
        order = _descending(norms, tolerances.choi_eig)
        return KrausChannel(ops[order], tolerances)
    return from_choi(to_choi(channel), tolerances)


def choi_distance(first: KrausChannel, second: KrausChannel) -> float:
    """Hilbert-Schmidt (Frobenius) norm of the difference of the Choi matrices."""
    if (first.dim_in, first.dim_out) != (second.dim_in, second.dim_out):
        raise DimensionMismatchError(
            f"Cannot compare a {first.dim_in} -> {first.dim_out} channel with a "
            f"{second.dim_in} -> {second.dim_out} channel"
        )
    difference = choi_of_operators(first.kraus_ops) - choi_of_operators(
        second.kraus_ops
    )
    return float(np.linalg.norm(difference))
