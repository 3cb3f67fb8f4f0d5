from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np

from ..config import DEFAULT_TOLERANCES, Tolerances
from ..exceptions import ValidationError
from ..matcore import DensityMatrix, as_complex_matrix
from .choi import minimal_kraus
from .kraus import KrausChannel

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from .._types import ComplexMatrix

logger = logging.getLogger(__name__)


class StinespringIsometry:
    """An isometry ``V: A -> B ⊗ E`` dilating a channel.

    Row ``b * dim_env + k`` of ``V`` holds row ``b`` of the ``k``-th Kraus
    operator, i.e. ``⟨b ⊗ k|V|a⟩ = ⟨b|V_k|a⟩``.

    Args:
        isometry:
            ``(dim_out·dim_env) x dim_in`` matrix with ``V†V = I``.
        dim_out:
            Dimension of the output factor ``B``.
        dim_env:
            Dimension of the environment ``E``.
        tolerances:
            ``completeness`` bounds ``max|V†V - I|``.
    """

    __slots__ = ("_isometry", "dim_env", "dim_in", "dim_out")

    def __init__(
        self,
        isometry: ArrayLike,
        dim_out: int,
        dim_env: int,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> None:
        v = as_complex_matrix(isometry, name="Stinespring isometry")
        if v.shape[0] != dim_out * dim_env:
            raise ValidationError(
                f"Stinespring isometry has {v.shape[0]} rows, expected "
                f"{dim_out} x {dim_env}"
            )
        residual = float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))))
        if residual > tolerances.completeness:
            raise ValidationError(
                f"Stinespring operator is not an isometry: "
                f"‖V†V - I‖_max = {residual:.3e}",
                residual=residual,
            )
        self._isometry = v
        self.dim_in = int(v.shape[1])
        self.dim_out = dim_out
        self.dim_env = dim_env

    @property
    def isometry(self) -> ComplexMatrix:
        return self._isometry

    def dilate(self, rho: DensityMatrix) -> DensityMatrix:
        """Return the joint output ``VρV†`` on ``B ⊗ E``."""
        return DensityMatrix(self._isometry @ rho.matrix @ self._isometry.conj().T)

    def channel(self) -> KrausChannel:
        """The channel ``Tr_E V(·)V†``."""
        blocks = self._isometry.reshape(self.dim_out, self.dim_env, self.dim_in)
        return KrausChannel(blocks.transpose(1, 0, 2))

    def complementary_channel(self) -> KrausChannel:
        """The channel ``Tr_B V(·)V†``."""
        blocks = self._isometry.reshape(self.dim_out, self.dim_env, self.dim_in)
        return KrausChannel(blocks)

    def __repr__(self) -> str:
        return (
            f"StinespringIsometry({self.dim_in} -> {self.dim_out} x {self.dim_env})"
        )


def stinespring(
    channel: KrausChannel, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> StinespringIsometry:
    """Minimal Stinespring isometry obtained by stacking minimal Kraus operators."""
    ops = minimal_kraus(channel, tolerances).kraus_ops
    n_kraus, dim_out, dim_in = ops.shape
    v = ops.transpose(1, 0, 2).reshape(dim_out * n_kraus, dim_in)
    return StinespringIsometry(v, dim_out, n_kraus, tolerances)


def complementary(
    channel: KrausChannel, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> KrausChannel:
    """Complementary channel ``Φ̂(ρ)_kl = Tr V_k ρ V_l†`` of the minimal dilation.

    The environment has one dimension per minimal Kraus operator, ordered as
    :func:`~petzkit.channels.minimal_kraus` orders them.
    """
    ops = minimal_kraus(channel, tolerances).kraus_ops
    logger.debug(
        "Complement of %r lives on a %d-dimensional environment", channel, len(ops)
    )
    # R_j[k, a] = V_k[j, a]
    return KrausChannel(ops.transpose(1, 0, 2), tolerances)
