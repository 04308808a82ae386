"""Principal component analysis followed by linear discriminant analysis."""
from dataclasses import dataclass

import numpy as np

from ..core import RejectedInputError
from .base import TrainedModel


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray             # k x d, orthonormal rows
    explained_variances: np.ndarray    # k, descending

    def transform(self, X):
        return (np.asarray(X, dtype=np.float64) - self.mean) @ self.components.T


def _fix_signs(components):
    # largest-magnitude entry of every component made positive
    pivots = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(components.shape[0]), pivots])
    signs[signs == 0] = 1.0
    return components * signs[:, None]


def pca_fit(X, k):
    """Top-``k`` principal axes of ``X`` (rows are observations).

    With fewer rows than features the eigenproblem is solved on the n x n
    Gram matrix of the centered data and mapped back to feature space;
    otherwise on the d x d covariance. Components are re-orthonormalized
    with a QR step so null-variance directions stay orthonormal.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    k = int(k)
    if not 1 <= k <= min(n - 1, d):
        raise RejectedInputError(f"n_components={k} outside [1, {min(n - 1, d)}]")
    mean = X.mean(axis=0)
    Xc = X - mean
    if n < d:
        evals, evecs = np.linalg.eigh(Xc @ Xc.T)
        order = np.argsort(evals, kind="stable")[::-1][:k]
        evals = np.clip(evals[order], 0.0, None)
        comps = (Xc.T @ evecs[:, order]).T
    else:
        evals, evecs = np.linalg.eigh(Xc.T @ Xc)
        order = np.argsort(evals, kind="stable")[::-1][:k]
        evals = np.clip(evals[order], 0.0, None)
        comps = evecs[:, order].T
    q, r = np.linalg.qr(comps.T)
    q = q * np.where(np.diag(r) < 0, -1.0, 1.0)
    comps = _fix_signs(q.T)
    return PcaModel(mean, comps, evals / (n - 1))


def pca_transform(model, x):
    return model.transform(x)


class PcaLdaModel(TrainedModel):
    algorithm = "PCA_LDA"

    def __init__(self, params, classes, n_features, pca, coef, intercept):
        super().__init__(params, classes, n_features)
        self.pca = pca
        self.coef = coef            # k x C
        self.intercept = intercept  # C

    def discriminants(self, Z):
        return Z @ self.coef + self.intercept

    def _predict(self, X):
        return np.argmax(self.discriminants(self.pca.transform(X)), axis=1)

    def get_state(self):
        return {"mean": self.pca.mean, "components": self.pca.components,
                "explained_variances": self.pca.explained_variances,
                "coef": self.coef, "intercept": self.intercept}

    @classmethod
    def from_state(cls, params, classes, n_features, state):
        pca = PcaModel(state["mean"], state["components"], state["explained_variances"])
        return cls(params, classes, n_features, pca, state["coef"], state["intercept"])


def lda_fit(Z, y, classes, reg=1e-6):
    """Linear discriminants with a shared, ridge-regularized scatter.

    Returns ``(coef, intercept)`` so that the discriminant of class ``c`` is
    ``z @ coef[:, c] + intercept[c]``.
    """
    Z = np.asarray(Z, dtype=np.float64)
    n, d = Z.shape
    if n <= len(classes):
        raise RejectedInputError(f"LDA needs more rows than classes, got {n} rows")
    means = np.array([Z[y == c].mean(axis=0) for c in classes])
    centered = Z - means[np.searchsorted(classes, y)]
    Sw = centered.T @ centered
    lam = reg * np.trace(Sw) / d
    if lam == 0.0:
        lam = reg
    cov = (Sw + lam * np.eye(d)) / (n - len(classes))
    coef = np.linalg.solve(cov, means.T)
    counts = np.array([(y == c).sum() for c in classes], dtype=np.float64)
    intercept = -0.5 * np.sum(means.T * coef, axis=0) + np.log(counts / n)
    return coef, intercept


def fit_pca_lda(X, y, classes, params, seed):
    pca = pca_fit(X, params["n_components"])
    coef, intercept = lda_fit(pca.transform(X), y, classes, params["reg"])
    return PcaLdaModel(params, classes, X.shape[1], pca, coef, intercept)
