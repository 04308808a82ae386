"""Classifiers behind one ``fit``/``predict`` contract.

>>> spec = ClassifierSpec.make("KNN", k=3)
>>> model = fit(spec, train_fm, seed=0)        # doctest: +SKIP
>>> model.predict(X)                           # doctest: +SKIP
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .. import seeding
from ..core import RejectedInputError
from .base import MODEL_FORMAT, MODEL_VERSION, TrainedModel, check_train, decode
from .knn import KnnModel, fit_knn
from .mlp import MlpClassifierModel, fit_mlp
from .mlr import LogisticModel, fit_mlr
from .nb import GaussianNBModel, fit_nb
from .pca_lda import PcaLdaModel, PcaModel, fit_pca_lda, lda_fit, pca_fit, pca_transform
from .svm import SvmModel, fit_svm
from .tree import DecisionTreeModel, RandomForestModel, fit_dt, fit_rf, gini_impurity

PCA_COMPONENTS = (2, 3, 4, 5, 10, 15, 20, 25, 30)

DEFAULTS = {
    "SVM": {"C": 1.0, "kernel": "rbf", "gamma": "scale", "tol": 1e-3, "max_iter": 10_000},
    "NB": {"var_smoothing": 1e-9},
    "MLR": {"l2": 1.0, "tol": 1e-6, "max_iter": 10_000},
    "PCA_LDA": {"n_components": 10, "reg": 1e-6},
    "DT": {"criterion": "gini"},
    "RF": {"n_trees": 100, "criterion": "gini", "max_features": "sqrt"},
    "KNN": {"k": 3},
    "MLP": {"hidden_layers": [32, 32, 32], "epochs": 1000, "batch_size": 32, "learning_rate": 1e-3},
}

ALGORITHMS = tuple(DEFAULTS)

_FIT = {"SVM": fit_svm, "NB": fit_nb, "MLR": fit_mlr, "PCA_LDA": fit_pca_lda,
        "DT": fit_dt, "RF": fit_rf, "KNN": fit_knn, "MLP": fit_mlp}

_MODELS = {cls.algorithm: cls for cls in (SvmModel, GaussianNBModel, LogisticModel, PcaLdaModel,
                                          DecisionTreeModel, RandomForestModel, KnnModel,
                                          MlpClassifierModel)}

_ALIASES = {"PCA+LDA": "PCA_LDA", "K-NN": "KNN", "ANN": "MLP", "PCALDA": "PCA_LDA"}


def canonical_algorithm(name):
    key = name.strip().upper()
    key = _ALIASES.get(key, key.replace("-", "_"))
    if key not in DEFAULTS:
        raise RejectedInputError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")
    return key


def _validate(algorithm, p):
    def positive(name, integer=False):
        v = p[name]
        if integer and (isinstance(v, bool) or int(v) != v):
            raise RejectedInputError(f"{algorithm}.{name} must be an integer, got {v!r}")
        if not v > 0:
            raise RejectedInputError(f"{algorithm}.{name} must be > 0, got {v!r}")

    if algorithm == "SVM":
        positive("C")
        positive("tol")
        positive("max_iter", True)
        if p["kernel"] != "rbf":
            raise RejectedInputError("only the rbf kernel is supported")
        if p["gamma"] != "scale":
            positive("gamma")
    elif algorithm == "NB":
        positive("var_smoothing")
    elif algorithm == "MLR":
        if not p["l2"] >= 0:
            raise RejectedInputError("MLR.l2 must be >= 0")
        positive("tol")
        positive("max_iter", True)
    elif algorithm == "PCA_LDA":
        positive("n_components", True)
        positive("reg")
    elif algorithm in ("DT", "RF"):
        if p["criterion"] != "gini":
            raise RejectedInputError("only the gini criterion is supported")
        if algorithm == "RF":
            positive("n_trees", True)
            if p["max_features"] not in ("sqrt", None):
                positive("max_features", True)
    elif algorithm == "KNN":
        positive("k", True)
    elif algorithm == "MLP":
        if not p["hidden_layers"] or any(int(w) < 1 for w in p["hidden_layers"]):
            raise RejectedInputError("MLP.hidden_layers needs widths >= 1")
        positive("batch_size", True)
        positive("learning_rate")
        if int(p["epochs"]) < 0:
            raise RejectedInputError("MLP.epochs must be >= 0")


@dataclass(frozen=True)
class ClassifierSpec:
    algorithm: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        alg = canonical_algorithm(self.algorithm)
        unknown = set(self.params) - set(DEFAULTS[alg])
        if unknown:
            raise RejectedInputError(f"unknown {alg} parameters: {sorted(unknown)}")
        merged = {**DEFAULTS[alg], **self.params}
        if alg == "MLP":
            merged["hidden_layers"] = [int(w) for w in merged["hidden_layers"]]
        _validate(alg, merged)
        object.__setattr__(self, "algorithm", alg)
        object.__setattr__(self, "params", merged)

    @classmethod
    def make(cls, algorithm, **params):
        return cls(algorithm, params)

    @property
    def label(self):
        """Human-readable row name, e.g. ``PCA+LDA (10)`` or ``k-NN``."""
        p = self.params
        if self.algorithm == "PCA_LDA":
            return f"PCA+LDA ({p['n_components']})"
        if self.algorithm == "KNN":
            return "k-NN"
        if self.algorithm == "MLP":
            return f"ANN ({','.join(str(w) for w in p['hidden_layers'])}; {p['epochs']} ep)"
        return self.algorithm


def fit(spec, train, seed=0):
    """Fit ``spec`` on a FeatureMatrix; deterministic in ``(spec, train, seed)``."""
    X, y, classes = check_train(train.rows, train.labels)
    return _FIT[spec.algorithm](X, y, classes, dict(spec.params), seeding.check_seed(seed))


def predict(model, x):
    """Predicted QualityClass of a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise RejectedInputError("predict expects a single feature vector")
    return model.predict_one(x)


def model_from_json(text):
    doc = json.loads(text)
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
        raise RejectedInputError("not a fluorospec model document (or unsupported version)")
    cls = _MODELS.get(doc.get("algorithm"))
    if cls is None:
        raise RejectedInputError(f"unknown algorithm {doc.get('algorithm')!r} in model document")
    return cls.from_state(doc["params"], doc["classes"], doc["n_features"], decode(doc["state"]))


__all__ = [
    "ALGORITHMS", "DEFAULTS", "PCA_COMPONENTS", "ClassifierSpec", "TrainedModel", "PcaModel",
    "fit", "predict", "model_from_json", "canonical_algorithm",
    "gini_impurity", "pca_fit", "pca_transform", "lda_fit",
]
