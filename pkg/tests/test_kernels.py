"""The numba and numpy kernel backends agree with each other and with
straightforward reference implementations."""
import math

import numpy as np
import pytest

from fluorospec import kernels

pytestmark = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba not installed")


@pytest.fixture(scope="module")
def nb():
    return kernels.get_backend("numba")


@pytest.fixture(scope="module")
def npk():
    return kernels.get_backend("numpy")


def _reference_split(X, y, idx, features, n_classes):
    """Exhaustive weighted-Gini search over every distinct-value midpoint."""
    best = (-1, 0.0, math.inf)
    for f in features:
        vals = np.unique(X[idx, f])
        for a, b in zip(vals[:-1], vals[1:]):
            thr = 0.5 * (a + b)
            if thr >= b:
                thr = a
            mask = X[idx, f] <= thr
            imp = 0.0
            for part in (idx[mask], idx[~mask]):
                c = np.bincount(y[part], minlength=n_classes) / len(part)
                imp += len(part) / len(idx) * (1.0 - np.sum(c * c))
            if imp < best[2] - 1e-12:
                best = (int(f), float(thr), imp)
    return best


@pytest.mark.parametrize("seed", range(6))
def test_best_split_matches_exhaustive_search(nb, npk, seed):
    rng = np.random.default_rng(seed)
    X = np.round(rng.normal(size=(40, 6)), 1)  # rounding creates ties
    y = rng.integers(0, 3, size=40)
    idx = np.sort(rng.choice(40, size=30, replace=False))
    feats = np.array([5, 1, 3, 0])
    f_ref, thr_ref, imp_ref = _reference_split(X, y, idx, feats, 3)
    for impl in (nb, npk):
        f, thr, score = impl.best_split(X, y, idx, feats, 3)
        assert (f, thr) == (f_ref, thr_ref)
        assert 1.0 - score / len(idx) == pytest.approx(imp_ref, abs=1e-12)


def test_best_split_no_valid_split(nb, npk):
    X = np.ones((5, 3))
    y = np.array([0, 1, 2, 0, 1])
    for impl in (nb, npk):
        assert impl.best_split(X, y, np.arange(5), np.arange(3), 3)[0] == -1
        assert impl.best_split(X, y, np.arange(1), np.arange(3), 3)[0] == -1


def test_best_split_backends_bitwise(nb, npk):
    rng = np.random.default_rng(3)
    X = rng.normal(size=(200, 64))
    y = rng.integers(0, 3, size=200)
    idx = np.arange(200)
    feats = rng.permutation(64)[:8]
    assert nb.best_split(X, y, idx, feats, 3) == npk.best_split(X, y, idx, feats, 3)


def test_tree_apply_agrees(nb, npk):
    # depth-2 tree: root on f0, left child on f1
    feature = np.array([0, 1, -1, -1, -1])
    threshold = np.array([0.0, 0.5, 0.0, 0.0, 0.0])
    left = np.array([1, 3, -1, -1, -1])
    right = np.array([2, 4, -1, -1, -1])
    X = np.array([[-1.0, 0.0], [-1.0, 1.0], [1.0, 0.0], [0.0, 0.5]])
    expected = [3, 4, 2, 3]
    for impl in (nb, npk):
        assert impl.tree_apply(X, feature, threshold, left, right).tolist() == expected


def _knn_reference(Xt, yt, Xq, k, n_classes):
    out = []
    for q in Xq:
        d = [float(np.sum((q - x) ** 2)) for x in Xt]
        nearest = sorted(range(len(d)), key=lambda i: (d[i], i))[:k]
        votes = [0] * n_classes
        for i in nearest:
            votes[yt[i]] += 1
        out.append(votes.index(max(votes)))
    return out


@pytest.mark.parametrize("k", [1, 3, 5, 50])
def test_knn_matches_brute_force(nb, npk, k):
    rng = np.random.default_rng(k)
    Xt = rng.normal(size=(30, 7))
    yt = rng.integers(0, 3, size=30)
    Xq = rng.normal(size=(12, 7))
    ref = _knn_reference(Xt, yt, Xq, k, 3)
    assert nb.knn_predict(Xt, yt, Xq, k, 3).tolist() == ref
    assert npk.knn_predict(Xt, yt, Xq, k, 3).tolist() == ref


def test_knn_distance_tie_goes_to_earlier_row(nb, npk):
    Xt = np.array([[1.0], [-1.0]])
    yt = np.array([2, 0])
    for impl in (nb, npk):
        assert impl.knn_predict(Xt, yt, np.array([[0.0]]), 1, 3).tolist() == [2]


@pytest.mark.parametrize("seed", range(3))
def test_smo_backends_agree(nb, npk, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 5))
    y = np.where(X[:, 0] + 0.3 * rng.normal(size=40) > 0, 1.0, -1.0)
    K = np.exp(-0.2 * ((X[:, None] - X[None]) ** 2).sum(-1))
    a1, r1, i1, c1 = nb.smo_solve(K, y, 1.0, 1e-3, 10_000)
    a2, r2, i2, c2 = npk.smo_solve(K, y, 1.0, 1e-3, 10_000)
    assert c1 and c2 and i1 == i2
    np.testing.assert_allclose(a1, a2, atol=1e-10)
    assert r1 == pytest.approx(r2, abs=1e-10)
    assert abs(a1 @ y) < 1e-10
    assert np.all((a1 >= 0) & (a1 <= 1.0))


def test_smo_iteration_cap(npk, nb):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 3))
    y = np.where(rng.random(30) > 0.5, 1.0, -1.0)
    K = X @ X.T
    for impl in (nb, npk):
        _, _, it, conv = impl.smo_solve(K, y, 10.0, 1e-12, 3)
        assert it == 3 and not conv


def _adam_reference(theta, grads_seq, lr=1e-3, b1=0.9, b2=0.999, eps=1e-8):
    """Textbook Adam written elementwise with explicit bias correction."""
    theta = list(theta)
    m = [0.0] * len(theta)
    v = [0.0] * len(theta)
    for t, g in enumerate(grads_seq, start=1):
        for i, gi in enumerate(g):
            m[i] = b1 * m[i] + (1 - b1) * gi
            v[i] = b2 * v[i] + (1 - b2) * gi * gi
            mhat = m[i] / (1 - b1 ** t)
            vhat = v[i] / (1 - b2 ** t)
            theta[i] -= lr * mhat / (math.sqrt(vhat) + eps)
    return np.array(theta)


def test_adam_matches_textbook_loop(nb, npk):
    rng = np.random.default_rng(7)
    theta0 = rng.normal(size=16)
    grads = [rng.normal(size=16) * 10.0 ** rng.integers(-4, 2) for _ in range(25)]
    ref = _adam_reference(theta0, grads)
    for impl in (nb, npk):
        p = theta0.copy()
        m = np.zeros(16)
        v = np.zeros(16)
        for t, g in enumerate(grads, start=1):
            impl.adam_update(p, g, m, v, t, 1e-3, 0.9, 0.999, 1e-8)
        np.testing.assert_allclose(p, ref, rtol=1e-12, atol=1e-15)


def test_adam_first_step_closed_form(nb, npk):
    # first step: lr * g / (|g| + eps)
    g = np.array([1e-2, -3.0, 5e2, 1e-6])
    for impl in (nb, npk):
        p = np.zeros(4)
        impl.adam_update(p, g, np.zeros(4), np.zeros(4), 1, 1e-3, 0.9, 0.999, 1e-8)
        np.testing.assert_allclose(-p, 1e-3 * g / (np.abs(g) + 1e-8), rtol=1e-12)
        large = np.abs(g) >= 1e-2
        np.testing.assert_allclose(-p[large], 1e-3 * np.sign(g[large]), rtol=1e-6)


def test_benchmark_script_runs_and_backends_agree(tmp_path):
    import json
    import pathlib
    import runpy
    script = pathlib.Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    runpy.run_path(str(script), run_name="bench")["main"](["--repeat", "1", "--json", str(tmp_path / "b.json")])
    rows = json.loads((tmp_path / "b.json").read_text())
    assert len(rows) == 5 and all(r["agree"] for r in rows)


@pytest.mark.parametrize("value, expected", [("numpy", "numpy"), ("numba", "numba"), ("NumPy ", "numpy")])
def test_environment_flag_selects_backend(value, expected):
    import os
    import subprocess
    import sys
    env = {**os.environ, "FLUOROSPEC_BACKEND": value}
    out = subprocess.run([sys.executable, "-c", "import fluorospec.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected


def test_environment_flag_rejects_unknown_backend():
    import os
    import subprocess
    import sys
    env = {**os.environ, "FLUOROSPEC_BACKEND": "cuda"}
    out = subprocess.run([sys.executable, "-c", "import fluorospec"], env=env, capture_output=True, text=True)
    assert out.returncode != 0 and "FLUOROSPEC_BACKEND" in out.stderr
