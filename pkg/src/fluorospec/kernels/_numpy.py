"""Vectorized numpy kernels (fallback backend).

Every function here mirrors the loop kernel of the same name in ``_numba``
operation for operation, so that both backends agree.
"""
import math

import numpy as np

# Upper bound on elements materialized per k-NN distance chunk.
_KNN_CHUNK_ELEMS = 1 << 22


def best_split(X, y, idx, features, n_classes):
    """Best Gini split of the rows ``idx`` over the candidate ``features``.

    Returns ``(feature, threshold, score)`` where ``score`` is
    ``sum_k cL_k^2 / nL + sum_k cR_k^2 / nR`` (larger is better; the weighted
    Gini impurity equals ``1 - score / n``). ``feature`` is -1 when no
    feature takes two distinct values on the node. Ties go to the lowest
    position in ``features`` and then to the lowest threshold.
    """
    m = idx.shape[0]
    if m < 2 or features.shape[0] == 0:
        return -1, 0.0, -np.inf
    vals = X[np.ix_(idx, features)]
    order = np.argsort(vals, axis=0, kind="stable")
    sv = np.take_along_axis(vals, order, axis=0)
    ys = y[idx][order]
    onehot = (ys[:, :, None] == np.arange(n_classes)).astype(np.int64)
    left = np.cumsum(onehot, axis=0)[:-1]
    total = np.bincount(y[idx], minlength=n_classes).astype(np.int64)
    right = total - left
    n_left = np.arange(1, m, dtype=np.int64)[:, None]
    n_right = m - n_left
    sq_left = (left * left).sum(axis=2)
    sq_right = (right * right).sum(axis=2)
    score = sq_left.astype(np.float64) / n_left + sq_right.astype(np.float64) / n_right
    score = np.where(sv[1:] > sv[:-1], score, -np.inf)
    flat = score.T.ravel()
    k = int(np.argmax(flat))
    if not np.isfinite(flat[k]):
        return -1, 0.0, -np.inf
    f_pos, p = divmod(k, m - 1)
    a = sv[p, f_pos]
    b = sv[p + 1, f_pos]
    thr = 0.5 * (a + b)
    if thr >= b:
        thr = a
    return int(features[f_pos]), float(thr), float(flat[k])


def tree_apply(X, feature, threshold, left, right):
    """Leaf index reached by each row of ``X``."""
    node = np.zeros(X.shape[0], dtype=np.int64)
    while True:
        f = feature[node]
        rows = np.nonzero(f >= 0)[0]
        if rows.size == 0:
            return node
        cur = node[rows]
        go_left = X[rows, f[rows]] <= threshold[cur]
        node[rows] = np.where(go_left, left[cur], right[cur])


def knn_predict(X_train, y_train, X_query, k, n_classes):
    """Majority label of the ``k`` nearest training rows (Euclidean).

    Distance ties are resolved by training-row order, vote ties by the
    lowest class index.
    """
    n, d = X_train.shape
    k = min(k, n)
    out = np.empty(X_query.shape[0], dtype=np.int64)
    chunk = max(1, _KNN_CHUNK_ELEMS // max(1, n * d))
    classes = np.arange(n_classes)
    for start in range(0, X_query.shape[0], chunk):
        q = X_query[start:start + chunk]
        diff = q[:, None, :] - X_train[None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
        votes = (y_train[nearest][:, :, None] == classes).sum(axis=1)
        out[start:start + chunk] = np.argmax(votes, axis=1)
    return out


def smo_solve(K, y, C, tol, max_iter):
    """Solve the binary soft-margin SVM dual with maximal-violating-pair SMO.

    Minimizes ``0.5 a'Qa - e'a`` with ``Q_ij = y_i y_j K_ij``,
    ``0 <= a <= C`` and ``y'a = 0``. Returns ``(alpha, rho, n_iter,
    converged)``; the decision function is ``sum_i a_i y_i K(x_i, x) - rho``.
    """
    n = y.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    converged = False
    it = 0
    pos = y > 0
    while it < max_iter:
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        yg = -y * G
        cand_up = np.where(up, yg, -np.inf)
        cand_low = np.where(low, yg, np.inf)
        i = int(np.argmax(cand_up))
        j = int(np.argmin(cand_low))
        if cand_up[i] - cand_low[j] < tol:
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
        if yi != yj:
            quad = Kii + Kjj - 2.0 * Kij
            if quad <= 0.0:
                quad = 1e-12
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
            quad = Kii + Kjj - 2.0 * Kij
            if quad <= 0.0:
                quad = 1e-12
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
        G += (y * yi * K[:, i]) * di + (y * yj * K[:, j]) * dj
    rho = _rho(alpha, y, G, C)
    return alpha, rho, it, converged


def _rho(alpha, y, G, C):
    yg = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(yg[free].sum() / free.sum())
    at_upper = alpha >= C
    at_lower = alpha <= 0
    pos = y > 0
    ub_mask = (pos & at_lower) | (~pos & at_upper)
    lb_mask = (pos & at_upper) | (~pos & at_lower)
    ub = yg[ub_mask].min() if ub_mask.any() else np.inf
    lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
    return float(0.5 * (ub + lb))


def adam_update(params, grads, m, v, t, lr, beta1, beta2, eps):
    """One bias-corrected Adam step, in place on ``params``, ``m``, ``v``."""
    step = lr / (1.0 - beta1 ** t)
    inv_sqrt_bc2 = 1.0 / math.sqrt(1.0 - beta2 ** t)
    m[:] = beta1 * m + (1.0 - beta1) * grads
    v[:] = beta2 * v + (1.0 - beta2) * (grads * grads)
    params -= step * m / (np.sqrt(v) * inv_sqrt_bc2 + eps)
