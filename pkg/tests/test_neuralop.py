"""Tests for the MIONet, Adam, the Poisson datasets and the training loop."""

import math
from types import SimpleNamespace

import numpy as np
import pytest

from src.config import NetworkConfig, OptimizerConfig, TrainConfig
from src.errors import (
    AllTargetsDegenerateError,
    DataError,
    DivergenceError,
    EmptyInputError,
    WidthMismatchError,
)
from src.neuralop.data import (
    LOWER,
    MIN_LENGTH,
    UPPER,
    OperatorDataset,
    gen_poisson1d_dataset,
    poisson_solution,
    query_grid,
    split_dataset,
)
from src.neuralop.network import (
    MIONet,
    MLP,
    build_mionet,
    mionet_forward,
    mionet_gradient,
    network_arrays,
    network_from_arrays,
)
from src.neuralop.optim import AdamState, adam_step, learning_rate
from src.neuralop.training import evaluate_relative_l2, gradient_check, train


@pytest.fixture
def small_network():
    return NetworkConfig(hidden=[6], latent=5, activation="tanh")


@pytest.fixture
def dataset():
    return gen_poisson1d_dataset(24, 4, seed=3, queries=16)


@pytest.fixture
def fast_train():
    return TrainConfig(iterations=300, batch_size=8, log_interval=100)


def test_mlp_forward_and_parameters():
    rng = np.random.default_rng(0)
    mlp = MLP.create([3, 4, 2], rng)
    out = mlp(rng.random((5, 3)))
    assert out.shape == (5, 2)
    assert len(mlp.parameters()) == 4
    linear = MLP.create([3, 2], rng, bias=False)
    assert linear.linear
    x = rng.random((4, 3))
    assert np.allclose(linear(x), x @ linear.weights[0])
    with pytest.raises(WidthMismatchError):
        mlp(rng.random((5, 4)))
    with pytest.raises(DataError):
        MLP.create([3], rng)


def test_linear_mionet_matches_closed_form():
    rng = np.random.default_rng(1)
    b0 = MLP.create([3, 4], rng, bias=False)
    b1 = MLP.create([2, 4], rng, bias=False)
    trunk = MLP.create([1, 4], rng)
    net = MIONet(branches=[b0, b1], trunk=trunk)
    x0, x1, q = rng.random(3), rng.random(2), 0.3
    expected = np.sum(
        (x0 @ b0.weights[0]) * (x1 @ b1.weights[0]) * (q * trunk.weights[0][0] + trunk.biases[0])
    )
    assert mionet_forward(net, [x0, x1], [q])[0] == pytest.approx(expected)


def test_mionet_is_symmetric_in_branch_order():
    rng = np.random.default_rng(2)
    b0 = MLP.create([3, 5, 4], rng)
    b1 = MLP.create([2, 5, 4], rng)
    trunk = MLP.create([1, 5, 4], rng)
    x0, x1 = rng.random((6, 3)), rng.random((6, 2))
    queries = rng.random((6, 7, 1))
    forward = MIONet([b0, b1], trunk).predict([x0, x1], queries)
    swapped = MIONet([b1, b0], trunk).predict([x1, x0], queries)
    assert np.array_equal(forward, swapped)


def test_zero_input_on_linear_branch_zeroes_prediction():
    rng = np.random.default_rng(3)
    branches = [
        MLP.create([2, 4, 3], rng),
        MLP.create([2, 3], rng, bias=False),
        MLP.create([3, 4, 3], rng),
    ]
    net = MIONet(branches, MLP.create([1, 4, 3], rng))
    prediction = mionet_forward(net, [rng.random(2), np.zeros(2), rng.random(3)], [0.5])
    assert prediction[0] == 0.0


def test_mionet_width_checks():
    rng = np.random.default_rng(4)
    with pytest.raises(WidthMismatchError):
        MIONet([MLP.create([2, 3], rng)], MLP.create([1, 4], rng))
    net = MIONet([MLP.create([2, 3], rng)], MLP.create([1, 3], rng))
    with pytest.raises(WidthMismatchError):
        net.predict([np.zeros((1, 2)), np.zeros((1, 2))], np.zeros((1, 1, 1)))


def test_gradient_matches_finite_differences(dataset, small_network):
    net = build_mionet(dataset.branch_widths, [False, True], 1, small_network, seed=0)
    batch = dataset.subset(range(4))
    assert gradient_check(net, batch) < 1e-6


def test_mionet_gradient_on_minibatch(dataset, small_network):
    net = build_mionet(dataset.branch_widths, [False, True], 1, small_network, seed=0)
    batch = dataset.subset(range(5))
    grads = mionet_gradient(net, batch)
    assert [g.shape for g in grads] == [p.shape for p in net.parameters()]
    _, expected = net.loss_and_gradient(batch.branch_inputs, batch.queries, batch.targets, batch.weights)
    assert all(np.array_equal(g, e) for g, e in zip(grads, expected))
    empty = SimpleNamespace(branch_inputs=[], queries=None, targets=np.zeros((0, 16)), weights=None)
    with pytest.raises(DataError):
        mionet_gradient(net, empty)


def test_gradient_with_output_matrix(small_network):
    rng = np.random.default_rng(5)
    net = build_mionet([3, 2, 4], [False, True, False], 2, small_network, seed=1, outputs=2)
    batch = SimpleNamespace(
        branch_inputs=[rng.random((3, 3)), rng.random((3, 2)), rng.random((3, 4))],
        queries=rng.random((3, 5, 2)),
        targets=rng.random((3, 5, 2)),
        weights=rng.random((3, 5)),
    )
    assert net.outputs == 2
    assert gradient_check(net, batch, max_entries=60) < 1e-6


def test_checkpoint_arrays_round_trip(dataset, small_network):
    net = build_mionet(dataset.branch_widths, [False, True], 1, small_network, seed=0)
    arrays = network_arrays(net)
    assert "branch1.layer0.bias" not in arrays
    restored = network_from_arrays(arrays, "tanh")
    assert np.array_equal(
        restored.predict(dataset.branch_inputs, dataset.queries),
        net.predict(dataset.branch_inputs, dataset.queries),
    )


def test_adam_first_step_moves_by_learning_rate():
    params = [np.array([1.0, -2.0]), np.array([[0.5]])]
    grads = [np.array([3.0, -0.1]), np.array([[0.0]])]
    new, state = adam_step(params, grads, AdamState.zeros_like(params), lr=0.01)
    assert np.allclose(new[0], [0.99, -1.99])
    assert new[1][0, 0] == 0.5
    assert state.step == 1
    with pytest.raises(WidthMismatchError):
        adam_step(params, grads[:1], state)


def test_adam_descends_a_quadratic_bowl():
    params = [np.array([1.0, -2.0, 0.5]), np.array([[0.3, -0.7]])]
    state = AdamState.zeros_like(params)
    for _ in range(500):
        params, state = adam_step(params, [2.0 * p for p in params], state, lr=0.1)
    assert math.sqrt(sum(float(np.sum(p**2)) for p in params)) < 1e-3
    assert state.step == 500


def test_learning_rate_decay():
    assert learning_rate(1e-3, 25, 10, 0.5) == pytest.approx(2.5e-4)
    assert learning_rate(1e-3, 25, 0, 0.5) == 1e-3


def test_poisson_dataset_encodes_interval_and_source(dataset):
    assert len(dataset) == 24
    assert dataset.branch_widths == [4, 4]
    assert dataset.queries.shape == (24, 16, 1)
    assert dataset.metadata["generator"] == "poisson1d"
    x = query_grid(16)
    for i in range(len(dataset)):
        shape, source = dataset.branch_inputs[0][i], dataset.branch_inputs[1][i]
        length = shape[0]
        total = shape[1] / (math.sqrt(3) * length) + 1.0
        a, b = (total - length) / 2.0, (total + length) / 2.0
        c = source[0] / length
        assert length >= MIN_LENGTH - 1e-12
        assert LOWER - 1e-12 <= a and b <= UPPER + 1e-12
        assert -1.0 <= c <= 1.0
        assert np.allclose(dataset.targets[i], poisson_solution(x, a, b, c), atol=1e-10)
        inside = (x >= a + 1e-9) & (x <= b - 1e-9)
        assert np.all(dataset.weights[i][inside] == 1.0 / 16)
        assert np.all(dataset.weights[i][(x < a - 1e-9) | (x > b + 1e-9)] == 0.0)


def test_poisson_boundary_dataset():
    data = gen_poisson1d_dataset(5, 3, seed=0, boundary=True)
    assert data.branch_widths == [3, 6]
    assert data.metadata["generator"] == "poisson1d-boundary"
    with pytest.raises(EmptyInputError):
        gen_poisson1d_dataset(0, 3, seed=0)


def test_poisson_solution():
    x = np.array([0.0, 0.2, 0.5, 0.8, 1.0])
    u = poisson_solution(x, 0.2, 0.8, 2.0, ga=0.1, gb=0.3)
    assert u[0] == 0.0 and u[-1] == 0.0
    assert u[1] == pytest.approx(0.1)
    assert u[3] == pytest.approx(0.3)
    assert u[2] == pytest.approx(0.09 + 0.2)


def test_dataset_validation_and_split(dataset):
    train_set, test_set = split_dataset(dataset, 16, seed=0)
    assert len(train_set) == 16 and len(test_set) == 8
    with pytest.raises(DataError):
        split_dataset(dataset, 24, seed=0)
    with pytest.raises(DataError):
        OperatorDataset([np.zeros((2, 3))], np.zeros((2, 4, 1)), np.zeros((2, 4)), -np.ones((2, 4)))
    with pytest.raises(DataError):
        OperatorDataset([np.zeros((3, 3))], np.zeros((2, 4, 1)), np.zeros((2, 4)), np.ones((2, 4)))


def test_training_is_deterministic(dataset, small_network, fast_train):
    optimizer = OptimizerConfig(lr=1e-2)
    config = fast_train.model_copy(update={"iterations": 20})
    first = train(dataset, small_network, optimizer, config, seed=7)
    second = train(dataset, small_network, optimizer, config, seed=7)
    assert first.losses == second.losses
    for a, b in zip(first.net.parameters(), second.net.parameters()):
        assert np.array_equal(a, b)
    other = train(dataset, small_network, optimizer, config, seed=8)
    assert other.losses != first.losses


def test_zero_iterations_returns_initial_network(dataset, small_network, fast_train):
    config = fast_train.model_copy(update={"iterations": 0})
    result = train(dataset, small_network, OptimizerConfig(), config, seed=0)
    assert result.losses == []
    assert result.iterations == 0
    assert result.net.metadata["linear_branches"] == [False, True]


def test_training_reduces_loss(dataset, small_network, fast_train):
    result = train(dataset, small_network, OptimizerConfig(lr=1e-2), fast_train, seed=0)
    assert len(result.losses) == 300
    assert np.mean(result.losses[-20:]) < 0.5 * np.mean(result.losses[:20])
    untrained = train(
        dataset, small_network, OptimizerConfig(), fast_train.model_copy(update={"iterations": 0}), seed=0
    )
    before = evaluate_relative_l2(untrained.net, dataset)
    after = evaluate_relative_l2(result.net, dataset)
    assert after.mean < before.mean


def test_fast_mode_trains(dataset, small_network, fast_train):
    config = fast_train.model_copy(update={"iterations": 10, "mode": "fast"})
    result = train(dataset, small_network, OptimizerConfig(lr=1e-2), config, seed=0, workers=2)
    assert len(result.losses) == 10
    assert all(np.isfinite(result.losses))


def test_non_finite_targets_raise_divergence(dataset, small_network, fast_train):
    broken = dataset.subset(range(len(dataset)))
    broken.targets[:, 0] = np.inf
    config = fast_train.model_copy(update={"iterations": 5})
    with pytest.raises(DivergenceError):
        train(broken, small_network, OptimizerConfig(), config, seed=0)


def test_evaluate_relative_l2(dataset, small_network):
    net = build_mionet(dataset.branch_widths, [False, True], 1, small_network, seed=0)
    exact = evaluate_relative_l2(net, dataset, predictions=dataset.targets.copy())
    assert exact.mean == 0.0
    zero = evaluate_relative_l2(net, dataset, predictions=np.zeros_like(dataset.targets))
    assert zero.mean == pytest.approx(1.0)

    degenerate = dataset.subset(range(len(dataset)))
    degenerate.targets[0] = 0.0
    result = evaluate_relative_l2(net, degenerate, predictions=np.zeros_like(degenerate.targets))
    assert result.excluded == 1
    assert np.isnan(result.per_sample[0])

    degenerate.targets[:] = 0.0
    with pytest.raises(AllTargetsDegenerateError):
        evaluate_relative_l2(net, degenerate)
