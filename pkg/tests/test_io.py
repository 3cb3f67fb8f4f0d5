import json
import logging
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose
from petzkit import Ensemble, KrausChannel
from petzkit.channels import choi_distance, depolarizing
from petzkit.exceptions import ValidationError
from petzkit.io import (
    channel_from_dict,
    channel_to_dict,
    decode_matrix,
    dump_channel,
    dump_ensemble,
    dump_state,
    encode_matrix,
    ensemble_from_dict,
    hamiltonian_from_dict,
    load_channel,
    load_ensemble,
    load_hamiltonian,
    load_state,
)
from petzkit.sampling import random_channel, random_density_matrix

from .conftest import projector


def write_json(path: Path, document: object) -> Path:
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


def test_encode_matrix() -> None:
    assert encode_matrix([[1, 1j]]) == [[[1.0, 0.0], [0.0, 1.0]]]
    assert_allclose(decode_matrix([[[1.0, 0.0], [0.0, 1.0]]], "m"), [[1, 1j]])


def test_decode_matrix_errors() -> None:
    with pytest.raises(ValidationError, match="m: not a rectangular"):
        decode_matrix([[[1.0, 0.0]], [[1.0]]], "m")
    with pytest.raises(ValidationError, match="got shape"):
        decode_matrix([[1.0, 0.0]], "m")
    with pytest.raises(ValidationError, match="NaN"):
        decode_matrix([[[float("nan"), 0.0]]], "m")


def test_channel_file(tmp_path: Path, rng: np.random.Generator) -> None:
    channel = random_channel(2, 3, rng=rng)
    path = tmp_path / "channel.json"
    dump_channel(channel, path)
    loaded = load_channel(path)
    assert (loaded.dim_in, loaded.dim_out, loaded.n_kraus) == (2, 3, channel.n_kraus)
    assert_allclose(loaded.kraus_ops, channel.kraus_ops, rtol=0, atol=0)

    # dumping is deterministic
    first = path.read_text(encoding="utf-8")
    dump_channel(loaded, path)
    assert path.read_text(encoding="utf-8") == first


def test_channel_completeness_rejected() -> None:
    document = channel_to_dict(depolarizing(2, 0.5))
    document["kraus"][0] = encode_matrix(1.1 * np.eye(2) * np.sqrt(1 - 0.375))
    with pytest.raises(ValidationError, match="not trace preserving") as excinfo:
        channel_from_dict(document, "bad.json")
    assert "‖ΣV†V - I‖" in str(excinfo.value)
    assert str(excinfo.value).startswith("bad.json:")
    assert excinfo.value.residual is not None


def test_channel_small_residual_repaired(caplog: pytest.LogCaptureFixture) -> None:
    nearly = encode_matrix(np.eye(2) * 1.0000001)
    document = {"dim_in": 2, "dim_out": 2, "kraus": [nearly]}
    with caplog.at_level(logging.WARNING, logger="petzkit.io"):
        channel = channel_from_dict(document)
    assert "renormalizing" in caplog.text
    assert_allclose(channel.kraus_ops[0], np.eye(2), atol=1e-14)


def test_channel_document_errors() -> None:
    with pytest.raises(ValidationError, match="missing field 'kraus'"):
        channel_from_dict({"dim_in": 2, "dim_out": 2})
    with pytest.raises(ValidationError, match="nonempty list"):
        channel_from_dict({"dim_in": 2, "dim_out": 2, "kraus": []})
    with pytest.raises(ValidationError, match=r"kraus\[0\] has shape"):
        channel_from_dict(
            {"dim_in": 3, "dim_out": 2, "kraus": [encode_matrix(np.eye(2))]}
        )


def test_invalid_json_position(tmp_path: Path) -> None:
    path = tmp_path / "broken.json"
    path.write_text('{"dim_in": 2,\n "dim_out": }', encoding="utf-8")
    with pytest.raises(ValidationError, match=r"broken\.json:2:13: invalid JSON"):
        load_channel(path)


def test_state_file(tmp_path: Path, rng: np.random.Generator) -> None:
    rho = random_density_matrix(3, rng=rng)
    path = tmp_path / "state.json"
    dump_state(rho, path)
    assert_allclose(load_state(path).matrix, rho.matrix, rtol=0, atol=0)

    write_json(path, {"state": encode_matrix(np.diag([0.5, 0.6]))})
    with pytest.raises(ValidationError, match="unit trace"):
        load_state(path)


def test_ensemble_file(tmp_path: Path, basis_ensemble: Ensemble) -> None:
    path = tmp_path / "ensemble.json"
    dump_ensemble(basis_ensemble, path)
    loaded = load_ensemble(path)
    assert_allclose(loaded.probabilities, [0.5, 0.5])
    assert_allclose(loaded.average().matrix, np.eye(2) / 2)


def test_ensemble_vector_members() -> None:
    document = {
        "ensemble": [
            {"prob": 0.25, "vector": encode_matrix([1, 1])},
            {"prob": 0.75, "state": encode_matrix(projector(1, 0).matrix)},
        ]
    }
    ens = ensemble_from_dict(document)
    assert_allclose(ens.states[0].matrix, np.full((2, 2), 0.5), atol=1e-15)
    assert ens.is_pure()


def test_ensemble_document_errors() -> None:
    state = encode_matrix(np.eye(2) / 2)
    with pytest.raises(ValidationError, match="sum to 1"):
        ensemble_from_dict({"ensemble": [{"prob": 0.5, "state": state}]})
    with pytest.raises(ValidationError, match="positive"):
        ensemble_from_dict(
            {
                "ensemble": [
                    {"prob": 1.0, "state": state},
                    {"prob": 0.0, "state": state},
                ]
            }
        )
    with pytest.raises(ValidationError, match=r"ensemble\[0\]: missing field 'prob'"):
        ensemble_from_dict({"ensemble": [{"state": state}]})
    zero = {"prob": 1.0, "vector": encode_matrix([0, 0])}
    with pytest.raises(ValidationError, match=r"ensemble\[0\].*zero vector"):
        ensemble_from_dict({"ensemble": [zero]})


def test_hamiltonian_file(tmp_path: Path) -> None:
    path = write_json(
        tmp_path / "h.json", {"hamiltonian": encode_matrix(np.diag([0.0, 1.0]))}
    )
    assert_allclose(load_hamiltonian(path).matrix, np.diag([0.0, 1.0]))
    with pytest.raises(ValidationError, match="not Hermitian"):
        hamiltonian_from_dict({"hamiltonian": encode_matrix([[0, 1], [0, 0]])})


def test_round_trip_preserves_channel(tmp_path: Path) -> None:
    channel = KrausChannel([np.array([[0, 1], [1, 0]]) * 1j])
    path = tmp_path / "c.json"
    dump_channel(channel, path)
    assert choi_distance(load_channel(path), channel) == 0.0
