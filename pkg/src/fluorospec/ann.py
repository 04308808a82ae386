"""Feed-forward ReLU network with a softmax output, trained with Adam.

All parameters of a network live in one flat float64 buffer; the per-layer
weight matrices and bias vectors are views into it, so the optimizer updates
the whole network with a single kernel call.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import kernels, seeding
from .core import N_CLASSES, NumericalError, RejectedInputError

PROB_CLAMP = 1e-12


def relu(x):
    return np.maximum(x, 0.0)


def softmax(logits):
    """Row-wise softmax (1-D input is treated as a single row)."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def one_hot(labels, n_classes=N_CLASSES):
    labels = np.asarray(labels, dtype=np.int64)
    return (labels[:, None] == np.arange(n_classes)[None, :]).astype(np.float64)


def cross_entropy(probs, targets):
    """Mean over the batch of ``-sum_j y_j log p_j`` (probabilities clamped at 1e-12)."""
    probs = np.asarray(probs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if probs.shape != targets.shape or probs.ndim != 2:
        raise RejectedInputError(f"shape mismatch: probs {probs.shape} vs targets {targets.shape}")
    return float(-np.sum(targets * np.log(np.clip(probs, PROB_CLAMP, 1.0))) / probs.shape[0])


@dataclass(frozen=True)
class MlpArchitecture:
    hidden_layers: tuple
    input_dim: int = 1024
    output_dim: int = N_CLASSES

    def __post_init__(self):
        hl = tuple(int(w) for w in self.hidden_layers)
        if any(w < 1 for w in hl) or self.input_dim < 1 or self.output_dim < 1:
            raise RejectedInputError("layer widths must be >= 1")
        object.__setattr__(self, "hidden_layers", hl)

    @property
    def sizes(self):
        return (self.input_dim, *self.hidden_layers, self.output_dim)

    @property
    def shapes(self):
        s = self.sizes
        return [((s[i], s[i + 1]), (s[i + 1],)) for i in range(len(s) - 1)]

    @property
    def n_params(self):
        return sum(a * b + b for (a, b), _ in self.shapes)


class MlpModel:
    def __init__(self, arch, params=None):
        self.arch = arch
        self.params = np.zeros(arch.n_params) if params is None else np.array(params, dtype=np.float64)
        if self.params.shape != (arch.n_params,):
            raise RejectedInputError(f"expected {arch.n_params} parameters, got {self.params.shape}")
        self.weights, self.biases = _views(self.params, arch)

    def copy(self):
        return MlpModel(self.arch, self.params.copy())


def _views(flat, arch):
    weights, biases = [], []
    pos = 0
    for (wshape, bshape) in arch.shapes:
        n = wshape[0] * wshape[1]
        weights.append(flat[pos:pos + n].reshape(wshape))
        pos += n
        biases.append(flat[pos:pos + bshape[0]])
        pos += bshape[0]
    return weights, biases


def init_model(arch, rng):
    """Uniform(+-sqrt(6 / fan_in)) weights, zero biases."""
    model = MlpModel(arch)
    for W in model.weights:
        limit = np.sqrt(6.0 / W.shape[0])
        W[...] = rng.uniform(-limit, limit, size=W.shape)
    return model


@dataclass
class ForwardCache:
    activations: list   # input and every hidden activation
    preacts: list       # hidden pre-activations


def forward(model, X):
    """Return ``(probabilities, cache)`` for a batch ``X``."""
    a = np.asarray(X, dtype=np.float64)
    acts, pre = [a], []
    last = len(model.weights) - 1
    for i, (W, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ W + b
        if i == last:
            return softmax(z), ForwardCache(acts, pre)
        pre.append(z)
        a = relu(z)
        acts.append(a)


def backward(model, cache, probs, targets):
    """Gradient of the mean cross-entropy, as a flat vector aligned with ``model.params``."""
    grads = np.empty_like(model.params)
    gW, gb = _views(grads, model.arch)
    delta = (probs - targets) / probs.shape[0]
    for i in range(len(model.weights) - 1, -1, -1):
        gW[i][...] = cache.activations[i].T @ delta
        gb[i][...] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ model.weights[i].T) * (cache.preacts[i - 1] > 0)
    return grads


def loss(model, X, targets):
    probs, _ = forward(model, X)
    return cross_entropy(probs, targets)


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, n, **hyper):
        return cls(np.zeros(n), np.zeros(n), **hyper)


def adam_step(state, params, grads):
    """Advance ``state`` one step and update ``params`` in place."""
    if state.m.shape != params.shape or grads.shape != params.shape:
        raise RejectedInputError("Adam state, parameter and gradient shapes differ")
    state.t += 1
    kernels.adam_update(params, grads, state.m, state.v, state.t,
                        state.lr, state.beta1, state.beta2, state.eps)
    return params, state


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 1000
    batch_size: int = 32
    seed: int = 0
    shuffle: bool = True
    learning_rate: float = 1e-3

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1:
            raise RejectedInputError("epochs must be >= 0 and batch_size >= 1")


@dataclass
class TrainResult:
    model: MlpModel
    epoch_loss: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)


def train(arch, cfg, X, labels, snapshot_epochs=()):
    """Mini-batch Adam training.

    Initialization draws from stream ``(seed, "mlp-init")`` and the per-epoch
    shuffles from ``(seed, "mlp-shuffle")``. Copies of the model after each
    epoch count in ``snapshot_epochs`` are returned in ``snapshots``; they
    equal the result of training for that many epochs.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != arch.input_dim:
        raise RejectedInputError(f"expected {arch.input_dim} features, got shape {X.shape}")
    Y = one_hot(labels, arch.output_dim)
    n = X.shape[0]
    model = init_model(arch, seeding.stream(cfg.seed, "mlp-init"))
    shuffle_rng = seeding.stream(cfg.seed, "mlp-shuffle")
    state = AdamState.zeros(arch.n_params, lr=cfg.learning_rate)
    result = TrainResult(model)
    wanted = set(int(e) for e in snapshot_epochs)
    if 0 in wanted:
        result.snapshots[0] = model.copy()
    bs = cfg.batch_size
    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_rng.permutation(n) if cfg.shuffle else np.arange(n)
        total = 0.0
        for start in range(0, n, bs):
            rows = order[start:start + bs]
            xb, yb = X[rows], Y[rows]
            probs, cache = forward(model, xb)
            batch_loss = cross_entropy(probs, yb)
            if not np.isfinite(batch_loss):
                raise NumericalError(f"non-finite loss at epoch {epoch}, batch starting {start}; "
                                     "check learning rate and input scaling")
            total += batch_loss * rows.shape[0]
            adam_step(state, model.params, backward(model, cache, probs, yb))
        result.epoch_loss.append(total / n)
        if epoch in wanted:
            result.snapshots[epoch] = model.copy()
    return result


def predict_proba(model, X):
    return forward(model, X)[0]


def predict(model, X):
    return np.argmax(predict_proba(model, X), axis=1)


# -- grid search -------------------------------------------------------------

GRID_LAYERS = (1, 2, 3)
GRID_WIDTHS = (2, 4, 8, 16, 32)
GRID_EPOCHS = (350, 600, 1000)


@dataclass(frozen=True)
class GridCell:
    layers: int
    width: int
    epochs: int
    mean_accuracy: float
    std_accuracy: float
    accuracies: tuple = ()

    def record(self):
        return {"layers": self.layers, "width": self.width, "epochs": self.epochs,
                "mean_accuracy": self.mean_accuracy, "std_accuracy": self.std_accuracy}


def grid_search(fm, plan, layers=GRID_LAYERS, widths=GRID_WIDTHS, epochs=GRID_EPOCHS,
                threads=1, batch_size=32, learning_rate=1e-3):
    """Repeated-holdout accuracy for every (layers, width, epochs) cell.

    One training run per (architecture, split) up to ``max(epochs)``; shorter
    epoch counts are read from snapshots of that run, which is identical to
    training them separately with the same seed.
    """
    from .evaluation import run_splits

    epochs = tuple(sorted(set(int(e) for e in epochs)))
    cells = []
    for n_layers, width in itertools.product(layers, widths):
        arch = MlpArchitecture((width,) * n_layers, input_dim=fm.n_features)

        def one_split(train_fm, val_fm, seed, arch=arch):
            res = train(arch, TrainConfig(epochs[-1], batch_size, seed, True, learning_rate),
                        train_fm.rows, train_fm.labels, snapshot_epochs=epochs)
            return [float(np.mean(predict(res.snapshots[e], val_fm.rows) == val_fm.labels))
                    for e in epochs]

        per_split = np.array(run_splits(one_split, fm, plan, threads))
        for k, e in enumerate(epochs):
            acc = per_split[:, k]
            cells.append(GridCell(n_layers, width, e, float(acc.mean()), float(acc.std()),
                                  tuple(float(a) for a in acc)))
    return cells
