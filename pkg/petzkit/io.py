"""JSON documents for channels, ensembles and states.

Complex matrices are nested lists of rows whose entries are ``[re, im]``
pairs. Floats are written in their shortest round-trip form, so a dumped
object loads back bit for bit. The documents look like::

    {"dim_in": 2, "dim_out": 3, "kraus": [<matrix>, ...]}
    {"ensemble": [{"prob": 0.5, "state": <matrix>},
                  {"prob": 0.5, "vector": <vector>}]}
    {"state": <matrix>}
    {"hamiltonian": <matrix>}
"""

from __future__ import annotations

import json
import logging
import os
from typing import TYPE_CHECKING, Any, Union

import numpy as np

from .channels import Ensemble, KrausChannel
from .channels.kraus import completeness_residual
from .config import DEFAULT_TOLERANCES, Tolerances
from .exceptions import ValidationError
from .matcore import DensityMatrix, HermitianOperator, PureStateVector

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

PathLike = Union[str, "os.PathLike[str]"]

logger = logging.getLogger(__name__)


def encode_matrix(matrix: ArrayLike) -> list[Any]:
    """Nested ``[re, im]`` lists of a complex array."""
    m = np.asarray(matrix, dtype=np.complex128)
    pairs = np.stack([m.real, m.imag], axis=-1)
    return pairs.tolist()  # type: ignore[no-any-return]


def decode_matrix(data: Any, where: str, ndim: int = 2) -> np.ndarray:
    """Inverse of :func:`encode_matrix`.

    Args:
        data:
            The decoded JSON value.
        where:
            Location of ``data`` in its document, used in error messages.
        ndim:
            Expected number of dimensions of the complex array.
    """
    try:
        pairs = np.asarray(data, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"{where}: not a rectangular array of numbers") from e
    if pairs.ndim != ndim + 1 or pairs.shape[-1] != 2:
        raise ValidationError(
            f"{where}: expected a {ndim}-dimensional array of [re, im] pairs, "
            f"got shape {pairs.shape}"
        )
    if not np.all(np.isfinite(pairs)):
        raise ValidationError(f"{where}: contains NaN or Inf entries")
    return pairs[..., 0] + 1j * pairs[..., 1]


def _read(path: PathLike) -> Any:
    with open(path, encoding="utf-8") as f:
        text = f.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(
            f"{os.fspath(path)}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}"
        ) from e


def _write(document: dict[str, Any], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(document))


def dumps(document: dict[str, Any]) -> str:
    """Deterministic JSON text of a document."""
    return json.dumps(document, sort_keys=True, indent=1) + "\n"


def _field(document: Any, key: str, source: str) -> Any:
    if not isinstance(document, dict) or key not in document:
        raise ValidationError(f"{source}: missing field '{key}'")
    return document[key]


def channel_to_dict(channel: KrausChannel) -> dict[str, Any]:
    """Document of a channel."""
    return {
        "dim_in": channel.dim_in,
        "dim_out": channel.dim_out,
        "kraus": [encode_matrix(op) for op in channel.kraus_ops],
    }


def channel_from_dict(
    document: Any,
    source: str = "<channel>",
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> KrausChannel:
    """Build a channel from its document.

    A completeness residual ``max|ΣV†V - I|`` up to
    ``tolerances.file_completeness`` is repaired with a warning.

    Raises:
        ValidationError: on malformed documents or a larger residual.
    """
    dim_in = int(_field(document, "dim_in", source))
    dim_out = int(_field(document, "dim_out", source))
    entries = _field(document, "kraus", source)
    if not isinstance(entries, list) or not entries:
        raise ValidationError(f"{source}: 'kraus' must be a nonempty list")
    ops = []
    for index, entry in enumerate(entries):
        op = decode_matrix(entry, f"{source}: kraus[{index}]")
        if op.shape != (dim_out, dim_in):
            raise ValidationError(
                f"{source}: kraus[{index}] has shape {op.shape}, expected "
                f"({dim_out}, {dim_in})"
            )
        ops.append(op)
    stack = np.stack(ops)
    residual = completeness_residual(stack)
    if residual > tolerances.file_completeness:
        raise ValidationError(
            f"{source}: Kraus operators are not trace preserving: "
            f"‖ΣV†V - I‖_max = {residual:.3e} exceeds "
            f"{tolerances.file_completeness:.1e}",
            residual=residual,
        )
    if residual > tolerances.completeness:
        logger.warning(
            "%s: renormalizing Kraus operators with completeness residual %.3e",
            source,
            residual,
        )
    return KrausChannel.from_approximate(
        stack, tolerance=tolerances.file_completeness, tolerances=tolerances
    )


def load_channel(
    path: PathLike, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> KrausChannel:
    """Read a channel file."""
    return channel_from_dict(_read(path), os.fspath(path), tolerances)


def dump_channel(channel: KrausChannel, path: PathLike) -> None:
    """Write a channel file."""
    _write(channel_to_dict(channel), path)


def state_to_dict(rho: DensityMatrix) -> dict[str, Any]:
    """Document of a state."""
    return {"state": encode_matrix(rho.matrix)}


def state_from_dict(document: Any, source: str = "<state>") -> DensityMatrix:
    """Read ``{"state": <matrix>}``."""
    matrix = decode_matrix(_field(document, "state", source), f"{source}: state")
    try:
        return DensityMatrix(matrix)
    except ValidationError as e:
        raise ValidationError(f"{source}: {e}", residual=e.residual) from e


def load_state(path: PathLike) -> DensityMatrix:
    """Read a state file."""
    return state_from_dict(_read(path), os.fspath(path))


def dump_state(rho: DensityMatrix, path: PathLike) -> None:
    """Write a state file."""
    _write(state_to_dict(rho), path)


def ensemble_to_dict(ens: Ensemble) -> dict[str, Any]:
    """Document of an ensemble, every member given as a density matrix."""
    return {
        "ensemble": [
            {"prob": p, "state": encode_matrix(state.matrix)} for p, state in ens
        ]
    }


def ensemble_from_dict(document: Any, source: str = "<ensemble>") -> Ensemble:
    """Build an ensemble; members give either a ``state`` or a ``vector``.

    Probabilities are renormalized if they sum to one within ``1e-9``.
    """
    members = _field(document, "ensemble", source)
    if not isinstance(members, list) or not members:
        raise ValidationError(f"{source}: 'ensemble' must be a nonempty list")
    weights = []
    states = []
    for index, member in enumerate(members):
        where = f"{source}: ensemble[{index}]"
        weights.append(float(_field(member, "prob", where)))
        try:
            if "vector" in member:
                vector = decode_matrix(member["vector"], f"{where}.vector", ndim=1)
                pure = PureStateVector.normalized(vector)
                states.append(DensityMatrix.from_vector(pure))
            else:
                entry = _field(member, "state", where)
                matrix = decode_matrix(entry, f"{where}.state")
                states.append(DensityMatrix(matrix))
        except ValidationError as e:
            raise ValidationError(f"{where}: {e}", residual=e.residual) from e
    total = float(np.sum(weights))
    if min(weights) <= 0 or abs(total - 1.0) > 1e-9:
        raise ValidationError(
            f"{source}: probabilities must be positive and sum to 1, got {weights}"
        )
    return Ensemble.from_weights(weights, states)


def load_ensemble(path: PathLike) -> Ensemble:
    """Read an ensemble file."""
    return ensemble_from_dict(_read(path), os.fspath(path))


def dump_ensemble(ens: Ensemble, path: PathLike) -> None:
    """Write an ensemble file."""
    _write(ensemble_to_dict(ens), path)


def hamiltonian_from_dict(
    document: Any, source: str = "<hamiltonian>"
) -> HermitianOperator:
    """Read ``{"hamiltonian": <matrix>}``."""
    entry = _field(document, "hamiltonian", source)
    matrix = decode_matrix(entry, f"{source}: hamiltonian")
    try:
        return HermitianOperator(matrix)
    except ValidationError as e:
        raise ValidationError(f"{source}: {e}", residual=e.residual) from e


def load_hamiltonian(path: PathLike) -> HermitianOperator:
    """Read a Hamiltonian file."""
    return hamiltonian_from_dict(_read(path), os.fspath(path))
