"""Multinomial logistic regression with an L2 penalty, fitted by Newton-CG.

Objective: ``sum_i -log softmax(x_i W + b)[y_i] + (l2 / 2) ||W||^2`` with an
unpenalized intercept ``b``.
"""
import warnings

import numpy as np

from .base import TrainedModel


class ConvergenceWarning(UserWarning):
    pass


def _softmax_rows(Z):
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


class LogisticModel(TrainedModel):
    algorithm = "MLR"

    def __init__(self, params, classes, n_features, W, b, n_iter=0, converged=True, objective=()):
        super().__init__(params, classes, n_features)
        self.W = W
        self.b = b
        self.n_iter = n_iter
        self.converged = converged
        self.objective = list(objective)

    def decision_function(self, X):
        return X @ self.W + self.b

    def predict_proba(self, X):
        return _softmax_rows(self.decision_function(self._check(X)))

    def _predict(self, X):
        return np.argmax(self.decision_function(X), axis=1)

    def get_state(self):
        return {"W": self.W, "b": self.b, "n_iter": self.n_iter, "converged": self.converged}

    @classmethod
    def from_state(cls, params, classes, n_features, state):
        return cls(params, classes, n_features, np.asarray(state["W"], dtype=np.float64),
                   np.asarray(state["b"], dtype=np.float64), state["n_iter"], state["converged"])


def objective(W, b, X, Y, l2):
    Z = X @ W + b
    zmax = Z.max(axis=1, keepdims=True)
    lse = (zmax + np.log(np.exp(Z - zmax).sum(axis=1, keepdims=True)))[:, 0]
    return float(np.sum(lse - np.sum(Z * Y, axis=1)) + 0.5 * l2 * np.sum(W * W))


def loss_and_grad(W, b, X, Y, l2):
    Z = X @ W + b
    P = _softmax_rows(Z)
    R = P - Y
    return objective(W, b, X, Y, l2), X.T @ R + l2 * W, R.sum(axis=0), P


def _hessp(VW, vb, X, P, l2):
    A = X @ VW + vb
    PA = P * A
    B = PA - P * PA.sum(axis=1, keepdims=True)
    return X.T @ B + l2 * VW, B.sum(axis=0)


def _cg(gW, gb, X, P, l2, tol, maxiter):
    # Solve H s = -g; stop early on negative curvature.
    sW = np.zeros_like(gW)
    sb = np.zeros_like(gb)
    rW, rb = -gW, -gb
    pW, pb = rW.copy(), rb.copy()
    rr = np.sum(rW * rW) + np.sum(rb * rb)
    for _ in range(maxiter):
        if np.sqrt(rr) <= tol:
            break
        HpW, Hpb = _hessp(pW, pb, X, P, l2)
        curv = np.sum(pW * HpW) + np.sum(pb * Hpb)
        if curv <= 0:
            if not sW.any() and not sb.any():
                sW, sb = -gW, -gb
            break
        step = rr / curv
        sW += step * pW
        sb += step * pb
        rW -= step * HpW
        rb -= step * Hpb
        rr_new = np.sum(rW * rW) + np.sum(rb * rb)
        pW = rW + (rr_new / rr) * pW
        pb = rb + (rr_new / rr) * pb
        rr = rr_new
    return sW, sb


def minimize_newton_cg(X, Y, l2, tol=1e-6, max_iter=10_000, cg_maxiter=200):
    """Return ``(W, b, n_iter, converged, objective_history)``."""
    d, k = X.shape[1], Y.shape[1]
    W = np.zeros((d, k))
    b = np.zeros(k)
    f, gW, gb, P = loss_and_grad(W, b, X, Y, l2)
    history = [f]
    converged = False
    it = 0
    while it < max_iter:
        gnorm = np.sqrt(np.sum(gW * gW) + np.sum(gb * gb))
        if gnorm < tol:
            converged = True
            break
        it += 1
        sW, sb = _cg(gW, gb, X, P, l2, min(0.5, np.sqrt(gnorm)) * gnorm, cg_maxiter)
        slope = np.sum(gW * sW) + np.sum(gb * sb)
        t = 1.0
        for _ in range(60):
            f_new = objective(W + t * sW, b + t * sb, X, Y, l2)
            if f_new <= f + 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            break  # no acceptable step at machine precision
        W = W + t * sW
        b = b + t * sb
        f, gW, gb, P = loss_and_grad(W, b, X, Y, l2)
        history.append(f)
    return W, b, it, converged, history


def fit_mlr(X, y, classes, params, seed):
    Y = (y[:, None] == classes[None, :]).astype(np.float64)
    W, b, it, converged, history = minimize_newton_cg(
        X, Y, float(params["l2"]), float(params["tol"]), int(params["max_iter"]))
    if not converged:
        warnings.warn(f"MLR stopped after {it} iterations above gradient tolerance",
                      ConvergenceWarning, stacklevel=3)
    return LogisticModel(params, classes, X.shape[1], W, b, it, converged, history)
