"""Loop kernels compiled with numba (default backend)."""
import math

import numba
import numpy as np

# error_model="numpy" drops the ZeroDivisionError checks that block vectorization
njit = numba.njit(cache=True, nogil=True, error_model="numpy")


@njit
def _best_split(X, y, idx, features, n_classes):
    m = idx.shape[0]
    best_f = -1
    best_thr = 0.0
    best_score = -np.inf
    if m < 2:
        return best_f, best_thr, best_score
    vals = np.empty(m)
    ys = np.empty(m, dtype=np.int64)
    total = np.zeros(n_classes, dtype=np.int64)
    for r in range(m):
        total[y[idx[r]]] += 1
    left = np.zeros(n_classes, dtype=np.int64)
    for fp in range(features.shape[0]):
        f = features[fp]
        for r in range(m):
            vals[r] = X[idx[r], f]
        order = np.argsort(vals, kind="mergesort")
        for r in range(m):
            ys[r] = y[idx[order[r]]]
        left[:] = 0
        for p in range(m - 1):
            left[ys[p]] += 1
            a = vals[order[p]]
            b = vals[order[p + 1]]
            if not b > a:
                continue
            sq_l = 0
            sq_r = 0
            for c in range(n_classes):
                sq_l += left[c] * left[c]
                rc = total[c] - left[c]
                sq_r += rc * rc
            n_l = p + 1
            n_r = m - n_l
            score = float(sq_l) / n_l + float(sq_r) / n_r
            if score > best_score:
                best_score = score
                best_f = f
                thr = 0.5 * (a + b)
                if thr >= b:
                    thr = a
                best_thr = thr
    return best_f, best_thr, best_score


def best_split(X, y, idx, features, n_classes):
    """Best Gini split; see ``_numpy.best_split`` for the contract."""
    if features.shape[0] == 0:
        return -1, 0.0, -np.inf
    f, thr, score = _best_split(X, y, idx, features, n_classes)
    return int(f), float(thr), float(score)


@njit
def tree_apply(X, feature, threshold, left, right):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for r in range(n):
        node = 0
        while feature[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = node
    return out


@njit
def knn_predict(X_train, y_train, X_query, k, n_classes):
    n, d = X_train.shape
    if k > n:
        k = n
    nq = X_query.shape[0]
    out = np.empty(nq, dtype=np.int64)
    dist = np.empty(n)
    votes = np.empty(n_classes, dtype=np.int64)
    for q in range(nq):
        for r in range(n):
            s = 0.0
            for c in range(d):
                diff = X_query[q, c] - X_train[r, c]
                s += diff * diff
            dist[r] = s
        order = np.argsort(dist, kind="mergesort")
        votes[:] = 0
        for t in range(k):
            votes[y_train[order[t]]] += 1
        best = 0
        for c in range(1, n_classes):
            if votes[c] > votes[best]:
                best = c
        out[q] = best
    return out


@njit
def _smo(K, y, C, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    converged = False
    it = 0
    while it < max_iter:
        i = -1
        j = -1
        g_max = -np.inf
        g_min = np.inf
        for t in range(n):
            yg = -y[t] * G[t]
            if y[t] > 0:
                is_up = alpha[t] < C
                is_low = alpha[t] > 0
            else:
                is_up = alpha[t] > 0
                is_low = alpha[t] < C
            if is_up and yg > g_max:
                g_max = yg
                i = t
            if is_low and yg < g_min:
                g_min = yg
                j = t
        if i < 0 or j < 0 or g_max - g_min < tol:
            converged = True
            break
        it += 1
        yi = y[i]
        yj = y[j]
        Kii = K[i, i]
        Kjj = K[j, j]
        Kij = K[i, j]
        old_i = alpha[i]
        old_j = alpha[j]
        ai = old_i
        aj = old_j
        quad = Kii + Kjj - 2.0 * Kij
        if quad <= 0.0:
            quad = 1e-12
        if yi != yj:
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0.0:
                if aj < 0.0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0.0:
                    ai = 0.0
                    aj = -diff
            if diff > 0.0:
                if ai > C:
                    ai = C
                    aj = C - diff
            else:
                if aj > C:
                    aj = C
                    ai = C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai = C
                    aj = total - C
            else:
                if aj < 0.0:
                    aj = 0.0
                    ai = total
            if total > C:
                if aj > C:
                    aj = C
                    ai = total - C
            else:
                if ai < 0.0:
                    ai = 0.0
                    aj = total
        alpha[i] = ai
        alpha[j] = aj
        di = ai - old_i
        dj = aj - old_j
        for t in range(n):
            G[t] += (y[t] * yi * K[t, i]) * di + (y[t] * yj * K[t, j]) * dj

    # offset
    n_free = 0
    s = 0.0
    ub = np.inf
    lb = -np.inf
    for t in range(n):
        yg = y[t] * G[t]
        if alpha[t] > 0 and alpha[t] < C:
            n_free += 1
            s += yg
        elif (y[t] > 0 and alpha[t] <= 0) or (y[t] < 0 and alpha[t] >= C):
            ub = min(ub, yg)
        else:
            lb = max(lb, yg)
    if n_free > 0:
        rho = s / n_free
    else:
        rho = 0.5 * (ub + lb)
    return alpha, rho, it, converged


def smo_solve(K, y, C, tol, max_iter):
    """Binary SVM dual via SMO; see ``_numpy.smo_solve`` for the contract."""
    alpha, rho, it, converged = _smo(K, y, float(C), float(tol), int(max_iter))
    return alpha, float(rho), int(it), bool(converged)


@njit
def _adam(params, grads, m, v, beta1, beta2, eps, step, inv_sqrt_bc2):
    for i in range(params.shape[0]):
        g = grads[i]
        mi = beta1 * m[i] + (1.0 - beta1) * g
        vi = beta2 * v[i] + (1.0 - beta2) * (g * g)
        m[i] = mi
        v[i] = vi
        params[i] -= step * mi / (math.sqrt(vi) * inv_sqrt_bc2 + eps)


def adam_update(params, grads, m, v, t, lr, beta1, beta2, eps):
    """One bias-corrected Adam step, in place on ``params``, ``m``, ``v``.

    ``m / (1 - beta1^t)`` and ``sqrt(v / (1 - beta2^t))`` are folded into two
    per-step scalars.
    """
    _adam(params, grads, m, v, beta1, beta2, eps,
          lr / (1.0 - beta1 ** t), 1.0 / math.sqrt(1.0 - beta2 ** t))
