import numpy as np
import pytest
from numpy.testing import assert_allclose
from petzkit import DensityMatrix, Ensemble, HermitianOperator, KrausChannel
from petzkit.channels import (
    ChoiMatrix,
    choi_distance,
    complementary,
    dephasing,
    depolarizing,
    from_choi,
    identity,
    isometric_equivalence,
    kraus_ranks,
    measure_prepare,
    minimal_kraus,
    named_channel,
    partial_trace_channel,
    pseudo_diagonal,
    rekraus,
    replacement,
    stinespring,
    to_choi,
    transfer_reverse,
    trine_vectors,
    unitary,
    weyl_operators,
)
from petzkit.exceptions import DimensionMismatchError, ValidationError
from petzkit.matcore import partial_trace
from petzkit.sampling import random_channel, random_density_matrix

from .conftest import PAULI_Z, ket, projector


def test_apply(
    qubit_identity: KrausChannel,
    qubit_dephasing: KrausChannel,
    trine_channel: KrausChannel,
) -> None:
    plus = projector(1, 1)
    assert_allclose(qubit_identity.apply(plus).matrix, plus.matrix)
    assert_allclose(qubit_dephasing.apply(plus).matrix, np.eye(2) / 2)
    mixed = DensityMatrix.maximally_mixed(2)
    assert_allclose(trine_channel.apply(mixed).matrix, np.eye(3) / 3, atol=1e-12)

    with pytest.raises(DimensionMismatchError):
        trine_channel.apply(DensityMatrix.maximally_mixed(3))


def test_dual_pairing(rng: np.random.Generator) -> None:
    for _ in range(50):
        channel = random_channel(3, 2, rng=rng)
        rho = random_density_matrix(3, rng=rng)
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        a = HermitianOperator(g + g.conj().T)
        left = np.trace(a.matrix @ channel.apply(rho).matrix)
        right = np.trace(channel.dual_apply(a).matrix @ rho.matrix)
        assert_allclose(left, right, atol=1e-10)


def test_kraus_validation() -> None:
    with pytest.raises(ValidationError, match="not trace preserving"):
        KrausChannel([np.eye(2), np.eye(2)])
    with pytest.raises(ValidationError, match="at least one"):
        KrausChannel([])
    with pytest.raises(ValidationError, match="equal shape"):
        KrausChannel([np.eye(2), np.eye(3)])

    nearly = [np.eye(2) * (1 + 1e-8)]
    with pytest.raises(ValidationError):
        KrausChannel(nearly)
    repaired = KrausChannel.from_approximate(nearly, tolerance=1e-6)
    assert_allclose(repaired.kraus_ops[0], np.eye(2), atol=1e-14)
    with pytest.raises(ValidationError, match="exceeds"):
        KrausChannel.from_approximate(nearly, tolerance=1e-9)


def test_choi(qubit_identity: KrausChannel, qubit_dephasing: KrausChannel) -> None:
    bell = np.zeros(4)
    bell[[0, 3]] = 1
    assert_allclose(to_choi(qubit_identity).matrix, np.outer(bell, bell))
    assert to_choi(qubit_identity).rank() == 1
    recovered = from_choi(to_choi(qubit_identity))
    assert recovered.n_kraus == 1
    assert choi_distance(recovered, qubit_identity) < 1e-12

    assert_allclose(to_choi(qubit_dephasing).matrix, np.diag([1.0, 0, 0, 1]))
    assert minimal_kraus(qubit_dephasing).n_kraus == 2


def test_minimal_kraus_order(trine_channel: KrausChannel) -> None:
    # equal norms keep the input order
    assert_allclose(minimal_kraus(trine_channel).kraus_ops, trine_channel.kraus_ops)
    nearly_equal = KrausChannel(
        [np.sqrt(0.5) * np.eye(2), np.sqrt(0.5) * (1 + 1e-14) * PAULI_Z]
    )
    assert_allclose(
        minimal_kraus(nearly_equal).kraus_ops[0], np.sqrt(0.5) * np.eye(2), atol=1e-12
    )

    skewed = KrausChannel([np.sqrt(0.2) * np.eye(2), np.sqrt(0.8) * PAULI_Z])
    assert_allclose(
        minimal_kraus(skewed).kraus_ops[0], np.sqrt(0.8) * PAULI_Z, atol=1e-12
    )


def test_choi_validation() -> None:
    with pytest.raises(ValidationError, match="not trace preserving"):
        ChoiMatrix(np.eye(4), 2, 2)
    with pytest.raises(DimensionMismatchError):
        ChoiMatrix(np.eye(4) / 2, 2, 3)


def test_redundant_kraus_presentation(qubit_dephasing: KrausChannel) -> None:
    # a tight frame of three vectors on the two-dimensional environment
    redundant = rekraus(qubit_dephasing, trine_vectors())
    assert redundant.n_kraus == 3
    assert choi_distance(redundant, qubit_dephasing) < 1e-12
    assert from_choi(to_choi(redundant)).n_kraus == 2
    assert minimal_kraus(redundant).n_kraus == 2


def test_rekraus_dephasing_into_paulis(qubit_dephasing: KrausChannel) -> None:
    system = [ket(1, 1), ket(1, -1)]
    paulis = rekraus(qubit_dephasing, system)
    assert_allclose(paulis.kraus_ops[0], np.eye(2) / np.sqrt(2), atol=1e-12)
    assert_allclose(paulis.kraus_ops[1], PAULI_Z / np.sqrt(2), atol=1e-12)

    with pytest.raises(ValidationError, match="not overcomplete"):
        rekraus(qubit_dephasing, [ket(1, 0), ket(1, 1)])
    with pytest.raises(DimensionMismatchError):
        rekraus(qubit_dephasing, np.eye(3))


def test_choi_round_trip(rng: np.random.Generator) -> None:
    for dims in [(2, 2), (3, 2), (2, 3), (3, 3)]:
        for _ in range(10):
            channel = random_channel(*dims, rng=rng)
            assert choi_distance(from_choi(to_choi(channel)), channel) < 1e-9


def test_complementary(
    qubit_identity: KrausChannel,
    qubit_dephasing: KrausChannel,
    trine_channel: KrausChannel,
    rng: np.random.Generator,
) -> None:
    rho = random_density_matrix(2, rng=rng)

    constant = complementary(qubit_identity)
    assert (constant.dim_in, constant.dim_out) == (2, 1)
    assert_allclose(constant.apply(rho).matrix, [[1.0]])

    assert_allclose(
        complementary(qubit_dephasing).apply(rho).matrix,
        np.diag(np.diag(rho.matrix)),
        atol=1e-12,
    )

    # rank-one Kraus operators |k⟩⟨φ_k| give Φ̂(ρ) = diag(⟨φ_k|ρ|φ_k⟩)
    phi = trine_vectors()
    expected = np.diag([phi[k] @ rho.matrix @ phi[k] for k in range(3)])
    assert_allclose(
        complementary(trine_channel).apply(rho).matrix, expected, atol=1e-12
    )


def test_stinespring(qubit_identity: KrausChannel, rng: np.random.Generator) -> None:
    dilation = stinespring(qubit_identity)
    assert dilation.dim_env == 1
    assert_allclose(dilation.isometry, np.eye(2))

    channel = random_channel(3, 2, rng=rng)
    dilation = stinespring(channel)
    rho = random_density_matrix(3, rng=rng)
    joint = dilation.dilate(rho)
    dims = (dilation.dim_out, dilation.dim_env)
    assert_allclose(
        partial_trace(joint, dims, keep="A"), channel.apply(rho).matrix, atol=1e-10
    )
    assert_allclose(
        partial_trace(joint, dims, keep="B"),
        complementary(channel).apply(rho).matrix,
        atol=1e-10,
    )
    assert choi_distance(dilation.channel(), channel) < 1e-10
    complement = dilation.complementary_channel()
    assert choi_distance(complement, complementary(channel)) < 1e-10


def test_double_complement_equivalence(rng: np.random.Generator) -> None:
    for dims in [(2, 2), (3, 2), (2, 3)]:
        for _ in range(5):
            channel = random_channel(*dims, rng=rng)
            double = complementary(complementary(channel))
            result = isometric_equivalence(double, channel)
            assert result.equivalent
            assert result.residual <= 1e-8


def test_isometric_equivalence(
    qubit_dephasing: KrausChannel, trine_channel: KrausChannel
) -> None:
    same = isometric_equivalence(qubit_dephasing, qubit_dephasing)
    assert same.equivalent
    assert same.residual <= 1e-8

    embedding = np.eye(3, 2)
    embedded = KrausChannel(embedding @ qubit_dephasing.kraus_ops)
    result = isometric_equivalence(qubit_dephasing, embedded)
    assert result.equivalent
    w = result.partial_isometry
    assert w is not None
    assert w.shape == (3, 2)
    assert choi_distance(KrausChannel(w @ qubit_dephasing.kraus_ops), embedded) < 1e-8

    different = isometric_equivalence(qubit_dephasing, trine_channel)
    assert not different.equivalent
    assert different.residual > 0.1

    with pytest.raises(DimensionMismatchError):
        isometric_equivalence(qubit_dephasing, identity(3))


def test_transfer_reverse(qubit_dephasing: KrausChannel) -> None:
    sigma = DensityMatrix.maximally_mixed(2)
    unchanged = transfer_reverse(identity(2), np.eye(2), sigma)
    assert choi_distance(unchanged, identity(2)) < 1e-10

    embedding = np.eye(3, 2)
    carried = transfer_reverse(identity(2), embedding, sigma)
    rho = projector(1, 1j)
    image = DensityMatrix(embedding @ rho.matrix @ embedding.T)
    assert_allclose(carried.apply(image).matrix, rho.matrix, atol=1e-10)

    # the identity reverses dephasing on diagonal states; so does its transfer
    embedded = KrausChannel(embedding @ qubit_dephasing.kraus_ops)
    diagonal = [projector(1, 0), projector(0, 1), DensityMatrix(np.diag([0.3, 0.7]))]
    for state in diagonal:
        recovered = carried.apply(embedded.apply(state))
        assert_allclose(recovered.matrix, state.matrix, atol=1e-10)

    with pytest.raises(ValidationError, match="partial isometry"):
        transfer_reverse(identity(2), 2 * np.eye(2), sigma)


def test_pseudo_diagonal(
    qubit_dephasing: KrausChannel, qubit_identity: KrausChannel
) -> None:
    basis = np.eye(2)
    assert choi_distance(pseudo_diagonal(np.eye(2), basis), qubit_dephasing) < 1e-12
    coherent = pseudo_diagonal(np.ones((2, 2)), basis)
    assert choi_distance(coherent, qubit_identity) < 1e-12

    with pytest.raises(ValidationError, match="unit diagonal"):
        pseudo_diagonal(np.diag([1.0, 2.0]), basis)
    with pytest.raises(ValidationError, match="not positive"):
        pseudo_diagonal(np.array([[1.0, 2.0], [2.0, 1.0]]), basis)
    with pytest.raises(DimensionMismatchError):
        pseudo_diagonal(np.eye(3), basis)


def test_pseudo_diagonal_from_rank_one_kraus() -> None:
    # W_a = |u_a⟩⟨φ_a| with unit trine vectors u_a and scaled trine vectors φ_a
    phi = trine_vectors()
    units = phi / np.linalg.norm(phi, axis=1, keepdims=True)
    rank_one = KrausChannel([np.outer(u, f) for u, f in zip(units, phi)])
    gram = units @ units.T
    reconstructed = pseudo_diagonal(gram, phi)
    assert reconstructed.dim_out == 3
    result = isometric_equivalence(reconstructed, complementary(rank_one))
    assert result.equivalent


def test_library(bell_state: DensityMatrix, rng: np.random.Generator) -> None:
    zero = projector(1, 0)
    assert_allclose(
        depolarizing(2, 0.5).apply(zero).matrix, np.diag([0.75, 0.25]), atol=1e-12
    )

    sigma = random_density_matrix(3, rng=rng)
    assert_allclose(
        replacement(sigma, dim_in=2).apply(zero).matrix, sigma.matrix, atol=1e-12
    )

    traced = partial_trace_channel(2, 2).apply(bell_state)
    assert_allclose(traced.matrix, np.eye(2) / 2, atol=1e-12)

    povm = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    classical = measure_prepare(povm, [projector(1, 0), projector(0, 1)])
    assert choi_distance(classical, dephasing(2)) < 1e-12

    hadamard = unitary(np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    assert_allclose(hadamard.apply(zero).matrix, np.full((2, 2), 0.5), atol=1e-12)

    weyl = weyl_operators(3)
    assert weyl.shape == (9, 3, 3)
    gram = np.einsum("kab,lab->kl", weyl.conj(), weyl)
    assert_allclose(gram, 3 * np.eye(9), atol=1e-12)


def test_named_channel() -> None:
    channel = named_channel("depolarizing", d=2, p=0.5)
    assert choi_distance(channel, depolarizing(2, 0.5)) < 1e-14
    with pytest.raises(ValidationError, match="Unknown channel"):
        named_channel("amplitude_damping")
    with pytest.raises(ValidationError, match="Invalid parameters"):
        named_channel("depolarizing", d=2)
    with pytest.raises(ValidationError, match="positive integer"):
        named_channel("dephasing", d=0)
    with pytest.raises(ValidationError, match=r"\[0, 1\]"):
        depolarizing(2, 1.5)


def test_kraus_ranks(trine_channel: KrausChannel, qubit_identity: KrausChannel) -> None:
    assert kraus_ranks(trine_channel) == [1, 1, 1]
    assert qubit_identity.kraus_ranks() == [2]
    assert minimal_kraus(partial_trace_channel(2, 2)).kraus_ranks() == [2, 2]


def test_compose_restrict_extend(
    qubit_dephasing: KrausChannel,
    qubit_identity: KrausChannel,
    bell_state: DensityMatrix,
) -> None:
    twice = qubit_dephasing.compose(qubit_dephasing)
    assert choi_distance(twice, qubit_dephasing) < 1e-12
    with pytest.raises(DimensionMismatchError):
        qubit_dephasing.compose(identity(3))

    restricted = qubit_dephasing.restrict(np.eye(2)[:, :1])
    assert (restricted.dim_in, restricted.dim_out) == (1, 2)
    with pytest.raises(DimensionMismatchError):
        qubit_dephasing.restrict(np.eye(3))

    assert_allclose(
        qubit_identity.apply_extended(bell_state, 2).matrix, bell_state.matrix
    )
    correlated = qubit_dephasing.apply_extended(bell_state, 2).matrix
    assert_allclose(correlated, np.diag([0.5, 0, 0, 0.5]), atol=1e-12)

    liouville = qubit_dephasing.liouville()
    plus = projector(1, 1).matrix
    assert_allclose(
        (liouville @ plus.reshape(-1)).reshape(2, 2), np.eye(2) / 2, atol=1e-12
    )


def test_ensemble(basis_ensemble: Ensemble, qubit_dephasing: KrausChannel) -> None:
    assert len(basis_ensemble) == 2
    assert basis_ensemble.dim == 2
    assert_allclose(basis_ensemble.average().matrix, np.eye(2) / 2)
    assert basis_ensemble.is_pure()
    assert basis_ensemble.ranks() == [1, 1]

    image = basis_ensemble.map(qubit_dephasing)
    for (_, before), (_, after) in zip(basis_ensemble, image):
        assert_allclose(after.matrix, before.matrix)

    restricted = basis_ensemble.restrict(np.eye(2))
    assert_allclose(restricted.probabilities, [0.5, 0.5])

    weighted = Ensemble.from_weights([2.0, 0.0, 2.0], [np.eye(2) / 2] * 3)
    assert len(weighted) == 2
    assert_allclose(weighted.probabilities, [0.5, 0.5])

    with pytest.raises(ValidationError, match="sum to"):
        Ensemble([(0.5, projector(1, 0)), (0.4, projector(0, 1))])
    with pytest.raises(ValidationError, match="positive"):
        Ensemble([(1.0, projector(1, 0)), (0.0, projector(0, 1))])
    with pytest.raises(DimensionMismatchError):
        Ensemble([(0.5, projector(1, 0)), (0.5, projector(1, 0, 0))])
    with pytest.raises(ValidationError, match="weights"):
        Ensemble.from_weights([1.0], [np.eye(2) / 2] * 2)
