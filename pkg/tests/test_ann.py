import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from fluorospec import ann
from fluorospec.core import FeatureMatrix, NumericalError, RejectedInputError
from fluorospec.evaluation import SplitPlan

finite = st.floats(-1e4, 1e4, allow_nan=False)


# ---------------------------------------------------------------- activations

def test_relu_values():
    assert ann.relu(-2.0) == 0.0
    assert ann.relu(0.0) == 0.0
    assert ann.relu(3.5) == 3.5


def test_relu_matches_scalar_loop(rng):
    x = rng.normal(size=(7, 5))
    out = ann.relu(x)
    assert out.shape == x.shape
    assert out.tolist() == [[max(0.0, v) for v in row] for row in x.tolist()]


def test_softmax_symmetry():
    np.testing.assert_allclose(ann.softmax(np.array([2.0, 2.0, 2.0])), 1 / 3, atol=1e-15)


@settings(max_examples=200)
@given(hnp.arrays(np.float64, 3, elements=finite), st.floats(-1e3, 1e3))
def test_softmax_normalized_and_shift_invariant(z, c):
    p = ann.softmax(z)
    assert np.all(p >= 0) and abs(p.sum() - 1.0) <= 1e-12
    np.testing.assert_allclose(ann.softmax(z + c), p, atol=1e-12)


def test_softmax_extreme_logits_no_overflow():
    p = ann.softmax(np.array([1e4, -1e4, 0.0]))
    assert np.all(np.isfinite(p)) and p[0] == 1.0


def test_softmax_high_precision_oracle():
    with mpmath.workdps(50):
        e = [mpmath.exp(v) for v in (1, 2, 3)]
        ref = [float(v / sum(e)) for v in e]
    np.testing.assert_allclose(ann.softmax(np.array([1.0, 2.0, 3.0])), ref, rtol=1e-15, atol=0)


# ---------------------------------------------------------------- loss

def test_cross_entropy_analytic_values():
    Y = ann.one_hot([0, 2, 1])
    assert ann.cross_entropy(Y, Y) <= 1e-12
    assert ann.cross_entropy(np.full((3, 3), 1 / 3), Y) == pytest.approx(math.log(3), abs=1e-15)


def test_cross_entropy_high_precision_oracle(rng):
    P = ann.softmax(rng.normal(size=(16, 3)) * 3)
    labels = rng.integers(0, 3, size=16)
    with mpmath.workdps(50):
        ref = -mpmath.fsum(mpmath.log(mpmath.mpf(P[i, labels[i]])) for i in range(16)) / 16
    assert ann.cross_entropy(P, ann.one_hot(labels)) == pytest.approx(float(ref), rel=1e-13)


def test_cross_entropy_shape_mismatch():
    with pytest.raises(RejectedInputError):
        ann.cross_entropy(np.full((2, 3), 1 / 3), np.zeros((3, 3)))


# ---------------------------------------------------------------- forward / backward

def test_architecture_shapes():
    arch = ann.MlpArchitecture((32, 32, 32))
    assert arch.sizes == (1024, 32, 32, 32, 3)
    assert arch.n_params == 1024 * 32 + 32 + 2 * (32 * 32 + 32) + 32 * 3 + 3
    model = ann.init_model(arch, np.random.default_rng(0))
    assert [W.shape for W in model.weights] == [(1024, 32), (32, 32), (32, 32), (32, 3)]
    assert all(np.shares_memory(W, model.params) for W in model.weights)
    with pytest.raises(RejectedInputError):
        ann.MlpArchitecture((8, 0))


def test_zero_model_uniform(rng):
    model = ann.MlpModel(ann.MlpArchitecture((4, 4), input_dim=6))
    probs, _ = ann.forward(model, rng.normal(size=(5, 6)))
    np.testing.assert_allclose(probs, 1 / 3, atol=1e-15)


def test_forward_hand_computation():
    # 1 input -> 1 hidden unit -> 3 outputs
    model = ann.MlpModel(ann.MlpArchitecture((1,), input_dim=1))
    model.weights[0][...] = 2.0
    model.biases[0][...] = -1.0
    model.weights[1][...] = [[1.0, 0.0, -1.0]]
    model.biases[1][...] = [0.0, 0.5, 0.0]
    probs, _ = ann.forward(model, np.array([[1.5], [0.2]]))
    h = max(0.0, 2 * 1.5 - 1)  # = 2; second input gives relu(-0.6) = 0
    e = [math.exp(h), math.exp(0.5), math.exp(-h)]
    np.testing.assert_allclose(probs[0], [v / sum(e) for v in e], rtol=1e-15)
    e0 = [1.0, math.exp(0.5), 1.0]
    np.testing.assert_allclose(probs[1], [v / sum(e0) for v in e0], rtol=1e-15)


def test_forward_rows_normalized(rng):
    model = ann.init_model(ann.MlpArchitecture((16, 8), input_dim=32), rng)
    probs, _ = ann.forward(model, rng.normal(size=(50, 32)))
    np.testing.assert_allclose(probs.sum(1), 1.0, atol=1e-9)


def max_fd_relative_error(arch, seed, batch=4, h=1e-5):
    """Largest relative error of the analytic gradient vs central differences."""
    rng = np.random.default_rng(seed)
    model = ann.init_model(arch, rng)
    model.biases[0][...] = rng.normal(size=model.biases[0].shape) * 0.1
    X = rng.normal(size=(batch, arch.input_dim))
    Y = ann.one_hot(rng.integers(0, 3, size=batch))
    probs, cache = ann.forward(model, X)
    g = ann.backward(model, cache, probs, Y)
    fd = np.empty_like(g)
    p = model.params
    for i in range(p.size):
        old = p[i]
        p[i] = old + h
        up = ann.loss(model, X, Y)
        p[i] = old - h
        down = ann.loss(model, X, Y)
        p[i] = old
        fd[i] = (up - down) / (2 * h)
    # relative error with an absolute floor for components that vanish
    return float(np.max(np.abs(g - fd) / np.maximum(np.maximum(np.abs(g), np.abs(fd)), 1e-7)))


def test_gradient_matches_finite_differences_small():
    for seed in range(5):
        assert max_fd_relative_error(ann.MlpArchitecture((5, 4), input_dim=6), seed) < 1e-4


def test_gradient_zero_at_saturated_optimum():
    model = ann.MlpModel(ann.MlpArchitecture((2,), input_dim=2))
    model.weights[0][...] = np.eye(2)
    model.biases[0][...] = 1.0
    model.biases[1][...] = [0.0, 60.0, 0.0]
    X = np.array([[0.3, 0.1]])
    Y = ann.one_hot([1])
    probs, cache = ann.forward(model, X)
    assert np.linalg.norm(ann.backward(model, cache, probs, Y)) < 1e-6


def test_small_gradient_step_decreases_loss(rng):
    model = ann.init_model(ann.MlpArchitecture((8,), input_dim=20), rng)
    X = rng.normal(size=(4, 20))
    Y = ann.one_hot([0, 1, 2, 1])
    probs, cache = ann.forward(model, X)
    before = ann.cross_entropy(probs, Y)
    model.params -= 1e-4 * ann.backward(model, cache, probs, Y)
    assert ann.loss(model, X, Y) < before


# ---------------------------------------------------------------- Adam

def test_adam_zero_gradient_fixed_point(rng):
    params = rng.normal(size=10)
    start = params.copy()
    state = ann.AdamState.zeros(10)
    for _ in range(50):
        ann.adam_step(state, params, np.zeros(10))
    assert state.t == 50
    assert np.array_equal(params, start)


def test_adam_100_steps_match_scalar_loop(rng):
    n = 6
    params = rng.normal(size=n)
    ref = params.tolist()
    m, v = [0.0] * n, [0.0] * n
    state = ann.AdamState.zeros(n)
    for t in range(1, 101):
        g = rng.normal(size=n) * 10.0 ** rng.uniform(-3, 1)
        ann.adam_step(state, params, g)
        for i in range(n):
            m[i] = 0.9 * m[i] + 0.1 * g[i]
            v[i] = 0.999 * v[i] + 0.001 * g[i] ** 2
            ref[i] -= 1e-3 * (m[i] / (1 - 0.9 ** t)) / (math.sqrt(v[i] / (1 - 0.999 ** t)) + 1e-8)
    np.testing.assert_allclose(params, ref, rtol=0, atol=1e-12)


def test_adam_first_step_is_lr_sign_for_non_tiny_gradients():
    g = np.array([1e-2, -0.5, 3.0, -1e3])
    params = np.zeros(4)
    ann.adam_step(ann.AdamState.zeros(4), params, g)
    np.testing.assert_allclose(params, -1e-3 * np.sign(g), rtol=1e-6)


def test_adam_shape_mismatch():
    with pytest.raises(RejectedInputError):
        ann.adam_step(ann.AdamState.zeros(3), np.zeros(4), np.zeros(4))


# ---------------------------------------------------------------- training

def _toy(seed=0, n=30):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 4.0], [4.0, -2.0], [-4.0, -2.0]])
    X = np.concatenate([rng.normal(size=(n, 2)) * 0.6 + c for c in centers])
    return X, np.repeat(np.arange(3), n)


def test_train_separable_toy():
    X, y = _toy()
    arch = ann.MlpArchitecture((8,), input_dim=2)
    res = ann.train(arch, ann.TrainConfig(epochs=350, seed=1), X, y)
    assert np.array_equal(ann.predict(res.model, X), y)
    assert len(res.epoch_loss) == 350
    assert res.epoch_loss[-1] < res.epoch_loss[0]


def test_train_zero_epochs_returns_initialization():
    X, y = _toy()
    arch = ann.MlpArchitecture((8,), input_dim=2)
    res = ann.train(arch, ann.TrainConfig(epochs=0, seed=4), X, y)
    init = ann.init_model(arch, __import__("fluorospec").seeding.stream(4, "mlp-init"))
    assert np.array_equal(res.model.params, init.params)
    assert res.epoch_loss == []


def test_train_deterministic_and_seed_sensitive():
    X, y = _toy()
    arch = ann.MlpArchitecture((6, 6), input_dim=2)
    a = ann.train(arch, ann.TrainConfig(epochs=20, seed=3), X, y).model.params
    b = ann.train(arch, ann.TrainConfig(epochs=20, seed=3), X, y).model.params
    c = ann.train(arch, ann.TrainConfig(epochs=20, seed=4), X, y).model.params
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_snapshots_equal_separate_runs():
    X, y = _toy(n=11)  # 33 rows: the last mini-batch is partial
    arch = ann.MlpArchitecture((5,), input_dim=2)
    long = ann.train(arch, ann.TrainConfig(epochs=12, seed=2), X, y, snapshot_epochs=(0, 5, 12))
    short = ann.train(arch, ann.TrainConfig(epochs=5, seed=2), X, y)
    assert np.array_equal(long.snapshots[5].params, short.model.params)
    assert np.array_equal(long.snapshots[12].params, long.model.params)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_train_nan_loss_aborts():
    X, y = _toy()
    X = X * 1e308  # activations overflow to inf, softmax to nan
    arch = ann.MlpArchitecture((4,), input_dim=2)
    with pytest.raises(NumericalError, match="non-finite loss"):
        ann.train(arch, ann.TrainConfig(epochs=5, learning_rate=1e3), X, y)


def test_train_rejects_wrong_width():
    X, y = _toy()
    with pytest.raises(RejectedInputError):
        ann.train(ann.MlpArchitecture((4,)), ann.TrainConfig(epochs=1), X, y)


def test_train_config_validation():
    with pytest.raises(RejectedInputError):
        ann.TrainConfig(batch_size=0)


def test_grid_shape_and_ranges():
    X, y = _toy(n=10)
    X = np.c_[X, np.random.default_rng(0).normal(size=(30, 2))]
    fm = FeatureMatrix(X, y, tuple(f"s{i}" for i in range(30)))
    cells = ann.grid_search(fm, SplitPlan(n_repetitions=2), epochs=(3, 6, 10))
    assert len(cells) == 45
    assert {(c.layers, c.width, c.epochs) for c in cells} == {
        (l, w, e) for l in (1, 2, 3) for w in (2, 4, 8, 16, 32) for e in (3, 6, 10)}
    for c in cells:
        assert 0.0 <= c.mean_accuracy <= 1.0 and c.std_accuracy >= 0.0
        assert set(c.record()) == {"layers", "width", "epochs", "mean_accuracy", "std_accuracy"}
