"""Shared model contract: validation, class bookkeeping, JSON state."""
import json

import numpy as np

from ..core import QualityClass, RejectedInputError

MODEL_FORMAT = "fluorospec-model"
MODEL_VERSION = 1


def check_train(X, y):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise RejectedInputError("training data must be a non-empty 2-D array")
    if X.shape[0] != y.shape[0]:
        raise RejectedInputError("row and label counts differ")
    if not np.all(np.isfinite(X)):
        raise RejectedInputError("training data contains non-finite features")
    classes = np.unique(y)
    if classes.shape[0] < 2:
        raise RejectedInputError("training data must contain at least two classes")
    return X, y, classes


class TrainedModel:
    """Base for fitted classifiers.

    Subclasses set ``algorithm`` and implement ``_predict`` (returning
    indices into ``self.classes``), ``get_state`` and ``from_state``.
    """

    algorithm = None

    def __init__(self, params, classes, n_features):
        self.params = dict(params)
        self.classes = np.asarray(classes, dtype=np.int64)
        self.n_features = int(n_features)

    def _check(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise RejectedInputError(
                f"expected {self.n_features} features, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise RejectedInputError("input contains non-finite values")
        return np.ascontiguousarray(X)

    def predict(self, X):
        """Class indices (QualityClass order) for each row of ``X``."""
        return self.classes[self._predict(self._check(X))]

    def predict_one(self, x):
        return QualityClass(int(self.predict(np.asarray(x))[0]))

    def _predict(self, X):
        raise NotImplementedError

    def get_state(self):
        raise NotImplementedError

    @classmethod
    def from_state(cls, params, classes, n_features, state):
        raise NotImplementedError

    def to_json(self):
        doc = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "algorithm": self.algorithm,
            "params": self.params,
            "classes": self.classes.tolist(),
            "n_features": self.n_features,
            "state": encode(self.get_state()),
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def encode(obj):
    if isinstance(obj, np.ndarray):
        return {"__ndarray__": obj.dtype.str, "shape": list(obj.shape), "data": obj.ravel().tolist()}
    if isinstance(obj, dict):
        return {k: encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def decode(obj):
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            return np.asarray(obj["data"], dtype=np.dtype(obj["__ndarray__"])).reshape(obj["shape"])
        return {k: decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [decode(v) for v in obj]
    return obj
