import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import central_difference, relative_error
from umoead.errors import ConfigurationError
from umoead.pfl import (
    PflModel,
    load_model,
    mse_loss_and_grad,
    param_count,
    pfl_forward,
    pfl_init,
    pfl_input_grad,
    pfl_train,
    save_model,
)
from umoead.problems import analytic_h, get_problem
from umoead.scalarize import angle_to_weight, weight_to_angle


def random_case(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 5))
    hidden = tuple(int(h) for h in rng.integers(1, 9, size=rng.integers(0, 3)))
    model = pfl_init(m, hidden, seed)
    # perturb biases away from zero so every path is exercised
    model = PflModel(model.layer_dims, model.params + 0.3 * rng.standard_normal(model.params.size))
    theta = rng.uniform(0, math.pi / 2, size=m - 1)
    return model, theta, rng


def affine_model(W, b):
    W, b = np.asarray(W, dtype=float), np.asarray(b, dtype=float)
    return PflModel((W.shape[1], W.shape[0]), np.concatenate([W.ravel(), b]))


def oracle_pairs(problem, count, rng):
    thetas = rng.uniform(0.02, math.pi / 2 - 0.02, size=(count, problem.m - 1))
    return thetas, np.array([analytic_h(problem, angle_to_weight(t)) for t in thetas])


def test_init_deterministic():
    np.testing.assert_array_equal(pfl_init(3, seed=4).params, pfl_init(3, seed=4).params)
    assert not np.array_equal(pfl_init(3, seed=4).params, pfl_init(3, seed=5).params)


def test_parameter_count():
    assert param_count((2, 64, 64, 3)) == 4547
    assert pfl_init(3).params.size == 4547
    assert pfl_init(2, hidden=()).layer_dims == (1, 2)


def test_init_rejects_single_objective():
    with pytest.raises(ConfigurationError):
        pfl_init(1)


def test_params_are_frozen():
    model = pfl_init(2, (4,))
    with pytest.raises(ValueError):
        model.params[0] = 1.0


def test_constant_affine_model():
    model = affine_model(np.zeros((3, 2)), [1.0, 2.0, 3.0])
    for theta in ([0.0, 0.0], [0.3, 1.2], [math.pi / 2, math.pi / 2]):
        np.testing.assert_array_equal(pfl_forward(model, theta), [1.0, 2.0, 3.0])
        np.testing.assert_array_equal(pfl_input_grad(model, theta), np.zeros((3, 2)))


def test_affine_jacobian_is_matrix():
    W = np.array([[1.0, -2.0], [0.5, 0.0], [3.0, 1.0]])
    J = pfl_input_grad(affine_model(W, np.zeros(3)), [0.4, 0.9])
    np.testing.assert_array_equal(J, W)


def test_batch_matches_single_calls():
    model = pfl_init(3, (8, 5), seed=1)
    T = np.random.default_rng(2).uniform(0, math.pi / 2, size=(6, 2))
    batch = pfl_forward(model, T)
    jac = pfl_input_grad(model, T)
    for k, t in enumerate(T):
        np.testing.assert_allclose(batch[k], pfl_forward(model, t), rtol=1e-14, atol=1e-15)
        np.testing.assert_allclose(jac[k], pfl_input_grad(model, t), rtol=1e-14, atol=1e-15)


def test_wrong_input_width():
    with pytest.raises(ConfigurationError):
        pfl_forward(pfl_init(3), [0.1])


@given(theta=st.lists(st.floats(0, math.pi / 2), min_size=2, max_size=2))
def test_forward_finite_on_domain(theta):
    assert np.all(np.isfinite(pfl_forward(pfl_init(3), theta)))


@pytest.mark.parametrize("seed", range(100))
def test_gradients_match_finite_differences(seed):
    model, theta, rng = random_case(seed)
    J = pfl_input_grad(model, theta)
    assert relative_error(J, central_difference(lambda t: pfl_forward(model, t), theta)) < 1e-4

    thetas = rng.uniform(0, math.pi / 2, size=(5, model.layer_dims[0]))
    Y = rng.standard_normal((5, model.m))
    _, grad = mse_loss_and_grad(model, thetas, Y)

    def loss(w):
        return np.array(mse_loss_and_grad(PflModel(model.layer_dims, w), thetas, Y)[0])

    assert relative_error(grad, central_difference(loss, model.params)) < 1e-4


def test_loss_value():
    model = affine_model([[0.0], [0.0]], [1.0, 0.0])
    loss, _ = mse_loss_and_grad(model, [[0.0], [1.0]], [[0.0, 0.0], [1.0, 2.0]])
    assert loss == pytest.approx((1 + 0 + 0 + 4) / 4)


def test_zero_learning_rate_is_identity():
    model = pfl_init(2, (4,), seed=3)
    out = pfl_train(model, [[0.3], [0.7]], [[1.0, 0.0], [0.0, 1.0]], epochs=20, lr=0.0)
    np.testing.assert_array_equal(out.params, model.params)


def test_empty_pairs_rejected():
    with pytest.raises(ConfigurationError):
        pfl_train(pfl_init(2), np.empty((0, 1)), np.empty((0, 2)))


def test_unknown_optimizer():
    with pytest.raises(ConfigurationError):
        pfl_train(pfl_init(2, (2,)), [[0.1]], [[0.0, 0.0]], epochs=1, optimizer="sgd")


def test_single_pair_interpolation():
    model = pfl_init(2, seed=0)
    history = []
    trained = pfl_train(model, [[0.6]], [[0.3, 0.5]], epochs=1000, lr=1e-2, history=history)
    loss, _ = mse_loss_and_grad(trained, [[0.6]], [[0.3, 0.5]])
    assert loss < 1e-6
    assert len(history) == 1000


def test_affine_target_fitted_exactly():
    # targets affine in the angle are exactly representable by an affine model
    rng = np.random.default_rng(0)
    A, c = rng.standard_normal((3, 2)), rng.standard_normal(3)
    thetas = rng.uniform(0, math.pi / 2, size=(40, 2))
    Y = thetas @ A.T + c
    for optimizer in ("gd", "lbfgs"):
        trained = pfl_train(pfl_init(3, (), seed=1), thetas, Y, epochs=20_000 if optimizer == "gd" else 200, lr=0.2, optimizer=optimizer)
        assert mse_loss_and_grad(trained, thetas, Y)[0] < 1e-8


@pytest.mark.parametrize("optimizer", ["gd", "adam", "lbfgs"])
def test_optimizers_reduce_loss(optimizer):
    rng = np.random.default_rng(3)
    thetas, Y = oracle_pairs(get_problem("zdt1"), 30, rng)
    model = pfl_init(2, (16, 16), seed=0)
    trained = pfl_train(model, thetas, Y, epochs=200, lr=1e-2, optimizer=optimizer)
    assert mse_loss_and_grad(trained, thetas, Y)[0] < 0.5 * mse_loss_and_grad(model, thetas, Y)[0]


def test_descent_with_small_step():
    problem = get_problem("zdt1")
    fractions = []
    for trial in range(20):
        rng = np.random.default_rng(100 + trial)
        thetas, Y = oracle_pairs(problem, 30, rng)
        history = []
        pfl_train(pfl_init(2, (16, 16), seed=trial), thetas, Y, epochs=200, lr=1e-2, history=history)
        fractions.append(np.mean(np.diff(history) <= 0.0))
    assert min(fractions) >= 0.95


def test_zdt1_held_out_accuracy():
    problem = get_problem("zdt1")
    rng = np.random.default_rng(7)
    train_t, train_y = oracle_pairs(problem, 100, rng)
    test_t, test_y = oracle_pairs(problem, 100, rng)
    model = pfl_train(pfl_init(2, seed=0), train_t, train_y, epochs=500, optimizer="lbfgs")
    assert np.mean(np.sum((pfl_forward(model, test_t) - test_y) ** 2, axis=1)) < 1e-3


def test_dtlz1_centroid_prediction():
    problem = get_problem("dtlz1")
    thetas, Y = oracle_pairs(problem, 150, np.random.default_rng(8))
    model = pfl_train(pfl_init(3, seed=0), thetas, Y, epochs=500, optimizer="lbfgs")
    y = pfl_forward(model, weight_to_angle(np.full(3, 1 / 3)))
    np.testing.assert_allclose(y, np.full(3, 1 / 6), atol=0.02)


def test_checkpoint_round_trip(tmp_path):
    model = pfl_init(3, (5, 4), seed=9)
    path = tmp_path / "model.pfl"
    save_model(model, path)
    raw = path.read_bytes()
    assert raw[:4] == b"PFL1"
    loaded = load_model(path)
    assert loaded.layer_dims == model.layer_dims
    np.testing.assert_array_equal(loaded.params, model.params)


def test_checkpoint_rejects_garbage(tmp_path):
    path = tmp_path / "bad.pfl"
    path.write_bytes(b"nope")
    with pytest.raises(ConfigurationError):
        load_model(path)
    model = pfl_init(2, (3,))
    save_model(model, path)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ConfigurationError):
        load_model(path)
