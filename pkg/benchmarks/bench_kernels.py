"""Time every hot kernel under the numba and numpy backends.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Inputs are shaped like the reference workload (432 training spectra of 1024
channels). Each kernel is warmed up once (numba compilation) before timing;
the best of ``--repeat`` runs is reported, together with a check that both
backends returned the same result.
"""
import argparse
import json
import timeit

import numpy as np

from fluorospec import kernels


def _cases(rng):
    n, d = 432, 1024
    X = rng.normal(size=(n, d))
    y = rng.integers(0, 3, size=n)
    idx = np.sort(rng.integers(0, n, size=n))
    feats = rng.permutation(d)[:32]
    Xq = rng.normal(size=(108, d))
    yy = np.where(y[:288] == 0, 1.0, -1.0)
    Xs = X[:288]
    sq = (Xs * Xs).sum(1)
    K = np.exp(-(sq[:, None] + sq[None, :] - 2 * Xs @ Xs.T) / d)
    params = rng.normal(size=34_000)
    grads = rng.normal(size=34_000)

    # a small tree so tree_apply has real paths to walk
    from fluorospec.classifiers.tree import grow_tree
    tree = grow_tree(X, y, 3)

    def adam(impl):
        p, m, v = params.copy(), np.zeros_like(params), np.zeros_like(params)
        for t in range(1, 51):
            impl.adam_update(p, grads, m, v, t, 1e-3, 0.9, 0.999, 1e-8)
        return p

    return {
        "best_split (432 rows x 32 features)": lambda impl: impl.best_split(X, y, idx, feats, 3),
        "tree_apply (432 rows)": lambda impl: impl.tree_apply(X, tree.feature, tree.threshold,
                                                              tree.left, tree.right),
        "knn_predict (108 queries, k=3)": lambda impl: impl.knn_predict(X, y, Xq, 3, 3),
        "smo_solve (288 x 288 kernel)": lambda impl: impl.smo_solve(K, yy, 1.0, 1e-3, 10_000),
        "adam_update x50 (34k params)": adam,
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, z) for x, z in zip(a, b))
    if isinstance(a, np.ndarray):
        return a.shape == b.shape and np.allclose(a, b, rtol=1e-10, atol=1e-12)
    return a == b or (isinstance(a, float) and abs(a - b) <= 1e-10 * max(1.0, abs(a)))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the timings to this file")
    args = ap.parse_args(argv)
    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    backends = {name: kernels.get_backend(name) for name in ("numba", "numpy")}
    rows = []
    print(f"{'kernel':40s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}  agree")
    for name, fn in _cases(np.random.default_rng(0)).items():
        out = {b: fn(impl) for b, impl in backends.items()}  # warm-up / compile
        best = {b: min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat)) * 1e3
                for b, impl in backends.items()}
        agree = _same(out["numba"], out["numpy"])
        rows.append({"kernel": name, "numba_ms": best["numba"], "numpy_ms": best["numpy"], "agree": agree})
        print(f"{name:40s} {best['numba']:10.3f} {best['numpy']:10.3f} "
              f"{best['numpy'] / best['numba']:7.1f}x  {'yes' if agree else 'NO'}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
            fh.write("\n")


if __name__ == "__main__":
    main()
