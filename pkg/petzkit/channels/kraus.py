from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Sequence

import numpy as np

from ..config import DEFAULT_TOLERANCES, Tolerances
from ..exceptions import DimensionMismatchError, ValidationError
from ..matcore import (
    DensityMatrix,
    HermitianOperator,
    inv_sqrtm_psd,
    numerical_rank,
)

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from .._types import ComplexMatrix

logger = logging.getLogger(__name__)


def completeness_residual(ops: np.ndarray) -> float:
    """``max|Σ_k V_k†V_k - I|`` of a stack of Kraus operators."""
    total = np.einsum("kba,kbc->ac", ops.conj(), ops)
    return float(np.max(np.abs(total - np.eye(ops.shape[2]))))


# completeness residuals below this are left alone
_EXACT = 1e-13


def _renormalized(ops: np.ndarray) -> np.ndarray:
    total = np.einsum("kba,kbc->ac", ops.conj(), ops)
    return ops @ inv_sqrtm_psd(total)


def _as_kraus_stack(kraus_ops: Sequence[ArrayLike] | np.ndarray) -> np.ndarray:
    if isinstance(kraus_ops, np.ndarray) and kraus_ops.ndim == 3:
        ops = np.array(kraus_ops, dtype=np.complex128)
    else:
        matrices = [np.asarray(op, dtype=np.complex128) for op in kraus_ops]
        if not matrices:
            raise ValidationError("A channel needs at least one Kraus operator")
        shapes = {m.shape for m in matrices}
        if len(shapes) != 1 or matrices[0].ndim != 2:
            raise ValidationError(
                f"Kraus operators must be matrices of equal shape, got {sorted(shapes)}"
            )
        ops = np.stack(matrices)
    if ops.shape[0] == 0:
        raise ValidationError("A channel needs at least one Kraus operator")
    if not np.all(np.isfinite(ops)):
        raise ValidationError("Kraus operators contain NaN or Inf entries")
    return ops


class KrausChannel:
    """A quantum channel ``Φ(ρ) = Σ_k V_k ρ V_k†``.

    Args:
        kraus_ops:
            A sequence of ``dim_out x dim_in`` matrices, or an array of shape
            ``(n_kraus, dim_out, dim_in)``.
        tolerances:
            ``tolerances.completeness`` bounds ``max|Σ_k V_k†V_k - I|``.
    """

    __slots__ = ("_ops",)

    def __init__(
        self,
        kraus_ops: Sequence[ArrayLike] | np.ndarray,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> None:
        ops = _as_kraus_stack(kraus_ops)
        residual = completeness_residual(ops)
        if residual > tolerances.completeness:
            raise ValidationError(
                f"Kraus operators are not trace preserving: "
                f"‖ΣV†V - I‖_max = {residual:.3e}",
                residual=residual,
            )
        if residual > _EXACT:
            ops = _renormalized(ops)
        ops.setflags(write=False)
        self._ops = ops

    @classmethod
    def from_approximate(
        cls,
        kraus_ops: Sequence[ArrayLike] | np.ndarray,
        tolerance: float,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> KrausChannel:
        """Accept a nearly complete Kraus set and repair it.

        Operators with ``max|Σ V†V - I| ≤ tolerance`` are mapped to
        ``V (Σ V†V)^{-1/2}``, which is exactly trace preserving.

        Raises:
            ValidationError: if the residual exceeds ``tolerance``.
        """
        ops = _as_kraus_stack(kraus_ops)
        residual = completeness_residual(ops)
        if residual > tolerance:
            raise ValidationError(
                f"Kraus operators are not trace preserving: "
                f"‖ΣV†V - I‖_max = {residual:.3e} exceeds {tolerance:.1e}",
                residual=residual,
            )
        if residual > _EXACT:
            logger.debug(
                "Renormalizing Kraus operators with completeness residual %.3e",
                residual,
            )
            ops = _renormalized(ops)
        return cls(ops, tolerances)

    @property
    def kraus_ops(self) -> np.ndarray:
        """Read-only array of shape ``(n_kraus, dim_out, dim_in)``."""
        return self._ops

    @property
    def n_kraus(self) -> int:
        return int(self._ops.shape[0])

    @property
    def dim_in(self) -> int:
        return int(self._ops.shape[2])

    @property
    def dim_out(self) -> int:
        return int(self._ops.shape[1])

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        """Return ``Φ(ρ)``."""
        self._check_input(rho.dim)
        return DensityMatrix(self.apply_matrix(rho.matrix))

    def apply_matrix(self, x: ArrayLike) -> ComplexMatrix:
        """Apply the (linear) map to an arbitrary ``dim_in x dim_in`` matrix."""
        return np.einsum("kab,bc,kdc->ad", self._ops, np.asarray(x), self._ops.conj())

    def dual_apply(self, a: HermitianOperator) -> HermitianOperator:
        """Return ``Φ*(A) = Σ_k V_k† A V_k``."""
        if a.dim != self.dim_out:
            raise DimensionMismatchError(
                f"Observable of dimension {a.dim} does not match channel "
                f"output dimension {self.dim_out}"
            )
        return HermitianOperator(self.dual_apply_matrix(a.matrix))

    def dual_apply_matrix(self, a: ArrayLike) -> ComplexMatrix:
        """Apply the dual map to an arbitrary ``dim_out x dim_out`` matrix."""
        return np.einsum("kba,bc,kcd->ad", self._ops.conj(), np.asarray(a), self._ops)

    def apply_extended(self, rho: DensityMatrix, dim_ref: int) -> DensityMatrix:
        """Return ``(Φ ⊗ Id_R)(ρ)`` for a state on ``A ⊗ R``."""
        if rho.dim != self.dim_in * dim_ref:
            raise DimensionMismatchError(
                f"State of dimension {rho.dim} does not live on "
                f"{self.dim_in}x{dim_ref}"
            )
        blocks = rho.matrix.reshape(self.dim_in, dim_ref, self.dim_in, dim_ref)
        out = np.einsum(
            "kab,bicj,kdc->aidj", self._ops, blocks, self._ops.conj()
        ).reshape(self.dim_out * dim_ref, self.dim_out * dim_ref)
        return DensityMatrix(out)

    def compose(self, first: KrausChannel) -> KrausChannel:
        """Return ``self ∘ first`` (``first`` is applied first)."""
        if first.dim_out != self.dim_in:
            raise DimensionMismatchError(
                f"Cannot compose: output dimension {first.dim_out} does not match "
                f"input dimension {self.dim_in}"
            )
        ops = np.einsum("iab,jbc->ijac", self._ops, first.kraus_ops)
        ops = ops.reshape(-1, self.dim_out, first.dim_in)
        norms = np.linalg.norm(ops, axis=(1, 2))
        ops = ops[norms > 0]
        return KrausChannel.from_approximate(ops, tolerance=1e-7)

    def restrict(self, isometry: ArrayLike) -> KrausChannel:
        """Restrict the channel to the range of an isometry ``P``.

        The result acts on the ``P.shape[1]``-dimensional space with Kraus
        operators ``V_k P``.
        """
        p = np.asarray(isometry, dtype=np.complex128)
        if p.shape[0] != self.dim_in:
            raise DimensionMismatchError(
                f"Isometry with {p.shape[0]} rows cannot restrict a channel with "
                f"input dimension {self.dim_in}"
            )
        return KrausChannel(self._ops @ p)

    def liouville(self) -> ComplexMatrix:
        """Matrix of the map acting on row-major vectorized operators."""
        return np.einsum("kab,kcd->acbd", self._ops, self._ops.conj()).reshape(
            self.dim_out**2, self.dim_in**2
        )

    def kraus_ranks(self, tol: float = DEFAULT_TOLERANCES.numerical_rank) -> list[int]:
        """Numerical rank of each Kraus operator as given."""
        return [numerical_rank(op, tol) for op in self._ops]

    def _check_input(self, dim: int) -> None:
        if dim != self.dim_in:
            raise DimensionMismatchError(
                f"State of dimension {dim} does not match channel input "
                f"dimension {self.dim_in}"
            )

    def __repr__(self) -> str:
        return (
            f"KrausChannel({self.dim_in} -> {self.dim_out}, "
            f"{self.n_kraus} Kraus ops)"
        )


def apply(channel: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    """Return ``Φ(ρ)``."""
    return channel.apply(rho)


def dual_apply(channel: KrausChannel, a: HermitianOperator) -> HermitianOperator:
    """Return ``Φ*(A)``."""
    return channel.dual_apply(a)


def kraus_ranks(
    channel: KrausChannel, tol: float = DEFAULT_TOLERANCES.numerical_rank
) -> list[int]:
    """Numerical rank of each Kraus operator of ``channel`` as given."""
    return channel.kraus_ranks(tol)
