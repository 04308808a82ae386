"""Gaussian naive Bayes."""
import numpy as np

from .base import TrainedModel


class GaussianNBModel(TrainedModel):
    algorithm = "NB"

    def __init__(self, params, classes, n_features, means, variances, log_prior):
        super().__init__(params, classes, n_features)
        self.means = means
        self.variances = variances
        self.log_prior = log_prior

    def joint_log_likelihood(self, X):
        out = np.empty((X.shape[0], len(self.classes)))
        for c in range(len(self.classes)):
            var = self.variances[c]
            norm = -0.5 * np.sum(np.log(2.0 * np.pi * var))
            out[:, c] = self.log_prior[c] + norm - 0.5 * np.sum((X - self.means[c]) ** 2 / var, axis=1)
        return out

    def predict_proba(self, X):
        jll = self.joint_log_likelihood(self._check(X))
        jll -= jll.max(axis=1, keepdims=True)
        p = np.exp(jll)
        return p / p.sum(axis=1, keepdims=True)

    def _predict(self, X):
        return np.argmax(self.joint_log_likelihood(X), axis=1)

    def get_state(self):
        return {"means": self.means, "variances": self.variances, "log_prior": self.log_prior}

    @classmethod
    def from_state(cls, params, classes, n_features, state):
        return cls(params, classes, n_features, state["means"], state["variances"], state["log_prior"])


def fit_nb(X, y, classes, params, seed):
    # additive variance smoothing relative to the largest feature variance
    eps = params["var_smoothing"] * X.var(axis=0).max()
    if eps == 0.0:
        eps = params["var_smoothing"]
    means = np.array([X[y == c].mean(axis=0) for c in classes])
    variances = np.array([X[y == c].var(axis=0) for c in classes]) + eps
    counts = np.array([(y == c).sum() for c in classes], dtype=np.float64)
    return GaussianNBModel(params, classes, X.shape[1], means, variances, np.log(counts / counts.sum()))
