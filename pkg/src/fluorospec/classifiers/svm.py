"""Soft-margin RBF support vector machine, one-vs-one over class pairs."""
import itertools
import warnings

import numpy as np

from .. import kernels
from .base import TrainedModel


class ConvergenceWarning(UserWarning):
    pass


def rbf_kernel(A, B, gamma):
    """``exp(-gamma * ||a - b||^2)`` for every row pair."""
    sq = (np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * (A @ B.T))
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def dual_objective(alpha, y, K):
    """``sum(alpha) - 0.5 * alpha' Q alpha`` (the quantity SMO increases)."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


class BinarySvm:
    def __init__(self, support, coef, rho, n_iter, converged):
        self.support = support   # indices into the model's training rows
        self.coef = coef         # alpha_i * y_i for the support vectors
        self.rho = rho
        self.n_iter = n_iter
        self.converged = converged


def fit_binary(K, y, C, tol, max_iter):
    """Train on a precomputed kernel with labels in {+1, -1}."""
    alpha, rho, it, converged = kernels.smo_solve(np.ascontiguousarray(K), y.astype(np.float64),
                                                  C, tol, max_iter)
    sv = np.nonzero(alpha > 0)[0]
    return BinarySvm(sv, alpha[sv] * y[sv], rho, it, converged), alpha


class SvmModel(TrainedModel):
    algorithm = "SVM"

    def __init__(self, params, classes, n_features, X, gamma, machines):
        super().__init__(params, classes, n_features)
        self.X = X                # union of support vectors is a subset; keep all rows
        self.gamma = gamma
        self.machines = machines  # dict (a, b) -> BinarySvm, positions into classes

    @property
    def converged(self):
        return all(m.converged for m in self.machines.values())

    def decision_values(self, X):
        K = rbf_kernel(X, self.X, self.gamma)
        return {pair: K[:, m.support] @ m.coef - m.rho for pair, m in self.machines.items()}

    def _predict(self, X):
        votes = np.zeros((X.shape[0], len(self.classes)), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for (a, b), f in self.decision_values(X).items():
            votes[rows, np.where(f > 0, a, b)] += 1
        return np.argmax(votes, axis=1)

    def get_state(self):
        return {
            "X": self.X,
            "gamma": self.gamma,
            "machines": [
                {"pair": [a, b], "support": m.support, "coef": m.coef, "rho": m.rho,
                 "n_iter": m.n_iter, "converged": m.converged}
                for (a, b), m in self.machines.items()
            ],
        }

    @classmethod
    def from_state(cls, params, classes, n_features, state):
        machines = {
            tuple(m["pair"]): BinarySvm(np.asarray(m["support"], dtype=np.int64),
                                        np.asarray(m["coef"], dtype=np.float64),
                                        m["rho"], m["n_iter"], m["converged"])
            for m in state["machines"]
        }
        return cls(params, classes, n_features, np.asarray(state["X"], dtype=np.float64),
                   state["gamma"], machines)


def resolve_gamma(gamma, X):
    if gamma == "scale":
        var = X.var()
        return 1.0 / (X.shape[1] * var) if var > 0 else 1.0
    return float(gamma)


def fit_svm(X, y, classes, params, seed):
    gamma = resolve_gamma(params["gamma"], X)
    K = rbf_kernel(X, X, gamma)
    machines = {}
    for a, b in itertools.combinations(range(len(classes)), 2):
        rows = np.nonzero((y == classes[a]) | (y == classes[b]))[0]
        yy = np.where(y[rows] == classes[a], 1.0, -1.0)
        m, _ = fit_binary(K[np.ix_(rows, rows)], yy, float(params["C"]),
                          float(params["tol"]), int(params["max_iter"]))
        m.support = rows[m.support]
        machines[(a, b)] = m
        if not m.converged:
            warnings.warn(f"SMO for classes {classes[a]} vs {classes[b]} hit the iteration cap "
                          f"({m.n_iter})", ConvergenceWarning, stacklevel=3)
    return SvmModel(params, classes, X.shape[1], X.copy(), gamma, machines)
