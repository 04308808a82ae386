"""Repeated 80/20 holdout evaluation and the multi-algorithm benchmark."""
from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import seeding
from .classifiers import PCA_COMPONENTS, ClassifierSpec, fit
from .core import NumericalError, RejectedInputError

AGGREGATIONS = ("spectrum", "sample")


@dataclass(frozen=True)
class SplitPlan:
    train_fraction: float = 0.8
    n_repetitions: int = 100
    stratified: bool = True
    group_by_sample: bool = False
    base_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise RejectedInputError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if int(self.n_repetitions) < 1:
            raise RejectedInputError("n_repetitions must be >= 1")
        object.__setattr__(self, "base_seed", seeding.check_seed(self.base_seed))

    def to_dict(self):
        return asdict(self)


def _round_half_up(x):
    return int(np.floor(x + 0.5))


def split_holdout(fm, plan, repetition_index):
    """Disjoint, exhaustive ``(train, validation)`` row indices, both sorted.

    Drawn from stream ``(base_seed, "split", repetition_index)``. In
    stratified mode every class contributes ``round(f * n_class)`` units to
    training; in group mode the units are whole samples instead of rows.
    """
    labels = np.asarray(fm.labels)
    if plan.group_by_sample:
        first = {}
        for i, sid in enumerate(fm.sample_ids):
            first.setdefault(sid, i)
        unit_ids = list(first)
        unit_labels = labels[list(first.values())]
        members = {sid: [] for sid in unit_ids}
        for i, sid in enumerate(fm.sample_ids):
            members[sid].append(i)
    else:
        unit_labels = labels
    n_units = unit_labels.shape[0]
    rng = seeding.stream(plan.base_seed, "split", repetition_index)
    if plan.stratified:
        train_units = []
        for c in np.unique(unit_labels):
            idx = np.nonzero(unit_labels == c)[0]
            k = _round_half_up(plan.train_fraction * idx.shape[0])
            train_units.append(idx[rng.permutation(idx.shape[0])[:k]])
        train_units = np.concatenate(train_units)
    else:
        train_units = rng.permutation(n_units)[:_round_half_up(plan.train_fraction * n_units)]
    mask = np.zeros(n_units, dtype=bool)
    mask[train_units] = True
    missing = sorted(set(np.unique(unit_labels)) - set(np.unique(unit_labels[mask])))
    if missing:
        raise RejectedInputError(f"repetition {repetition_index}: class(es) {missing} absent from "
                                 f"training with train_fraction={plan.train_fraction}")
    if mask.all():
        raise RejectedInputError(f"repetition {repetition_index}: validation set is empty")
    if plan.group_by_sample:
        train = sorted(i for u in np.nonzero(mask)[0] for i in members[unit_ids[u]])
        val = sorted(i for u in np.nonzero(~mask)[0] for i in members[unit_ids[u]])
        return np.array(train, dtype=np.int64), np.array(val, dtype=np.int64)
    return np.nonzero(mask)[0], np.nonzero(~mask)[0]


def accuracy(predictions, labels):
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape or labels.size == 0:
        raise RejectedInputError("predictions and labels must be non-empty and equally long")
    return float(np.mean(predictions == labels))


def sample_vote_accuracy(predictions, labels, sample_ids):
    """Accuracy after a per-sample majority vote (ties to the lowest class)."""
    votes = {}
    truth = {}
    for p, y, sid in zip(predictions, labels, sample_ids):
        votes.setdefault(sid, Counter())[int(p)] += 1
        truth[sid] = int(y)
    correct = 0
    for sid, c in votes.items():
        top = max(c.values())
        correct += min(k for k, v in c.items() if v == top) == truth[sid]
    return correct / len(votes)


def _tagged(exc, r):
    if type(exc) in (RejectedInputError, NumericalError, ValueError, RuntimeError):
        return type(exc)(f"repetition {r}: {exc}")
    return None


def run_splits(fn, fm, plan, threads=1):
    """``[fn(train_fm, val_fm, fit_seed) for each repetition]`` in repetition order.

    The fit seed of repetition ``r`` is ``sub_seed(base_seed, "fit", r)``, so a
    repetition can be reproduced in isolation and the output does not depend
    on ``threads``.
    """
    def one(r):
        try:
            tr, va = split_holdout(fm, plan, r)
            return fn(fm.subset(tr), fm.subset(va), seeding.sub_seed(plan.base_seed, "fit", r))
        except Exception as exc:
            tagged = _tagged(exc, r)
            if tagged is None or str(exc).startswith(f"repetition {r}:"):
                raise
            raise tagged from exc

    reps = range(int(plan.n_repetitions))
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, reps))
    return [one(r) for r in reps]


@dataclass(frozen=True)
class RepeatedResult:
    mean_accuracy: float
    std_accuracy: float
    accuracies: tuple


def summarize(accuracies):
    acc = np.asarray(accuracies, dtype=np.float64)
    std = float(acc.std()) if np.ptp(acc) > 0 else 0.0
    return RepeatedResult(float(acc.mean()), std, tuple(float(a) for a in acc))


def repeated_eval(spec, fm, plan, threads=1, aggregate="spectrum"):
    """Mean and population std of validation accuracy over the plan's repetitions.

    ``spec`` is a ClassifierSpec or any callable ``(train_fm, seed) -> model``
    whose result has ``predict(X)``.
    """
    if aggregate not in AGGREGATIONS:
        raise RejectedInputError(f"aggregate must be one of {AGGREGATIONS}")

    def one(train_fm, val_fm, seed):
        model = fit(spec, train_fm, seed) if isinstance(spec, ClassifierSpec) else spec(train_fm, seed)
        pred = model.predict(val_fm.rows)
        if aggregate == "sample":
            return sample_vote_accuracy(pred, val_fm.labels, val_fm.sample_ids)
        return accuracy(pred, val_fm.labels)

    return summarize(run_splits(one, fm, plan, threads))


@dataclass(frozen=True)
class EvalRow:
    algorithm: str
    params: dict
    mean_accuracy: float
    std_accuracy: float
    n_splits: int
    accuracies: tuple = ()

    @property
    def label(self):
        try:
            return ClassifierSpec(self.algorithm, self.params).label
        except RejectedInputError:
            return self.algorithm


@dataclass
class EvalReport:
    rows: list = field(default_factory=list)
    plan: dict = field(default_factory=dict)

    def find(self, algorithm, **params):
        for row in self.rows:
            if row.algorithm == algorithm and all(row.params.get(k) == v for k, v in params.items()):
                return row
        raise KeyError(algorithm)


def benchmark_specs(algorithms=None, pca_components=PCA_COMPONENTS, mlp_params=None):
    """Benchmark specs in reporting order; ``algorithms`` filters by tag."""
    wanted = None if algorithms is None else {ClassifierSpec(a).algorithm for a in algorithms}
    specs = []
    for alg in ("SVM", "NB", "MLR", "PCA_LDA", "DT", "MLP", "RF", "KNN"):
        if wanted is not None and alg not in wanted:
            continue
        if alg == "PCA_LDA":
            specs += [ClassifierSpec.make(alg, n_components=k) for k in pca_components]
        elif alg == "MLP":
            specs.append(ClassifierSpec(alg, dict(mlp_params or {})))
        else:
            specs.append(ClassifierSpec(alg))
    return specs


def benchmark_all(fm, plan, algorithms=None, pca_components=PCA_COMPONENTS, mlp_params=None,
                  threads=1, aggregate="spectrum", progress=None):
    """Repeated holdout for every benchmark algorithm; rows sorted by mean accuracy."""
    rows = []
    for spec in benchmark_specs(algorithms, pca_components, mlp_params):
        res = repeated_eval(spec, fm, plan, threads, aggregate)
        rows.append(EvalRow(spec.algorithm, spec.params, res.mean_accuracy, res.std_accuracy,
                            int(plan.n_repetitions), res.accuracies))
        if progress:
            progress(rows[-1])
    rows.sort(key=lambda r: r.mean_accuracy)
    return EvalReport(rows, {**plan.to_dict(), "aggregate": aggregate})


def save_split_audit(fm, plan, path):
    """Write every repetition's train/validation row indices as JSON."""
    splits = []
    for r in range(plan.n_repetitions):
        tr, va = split_holdout(fm, plan, r)
        splits.append({"repetition": r, "train": tr.tolist(), "validation": va.tolist()})
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"plan": plan.to_dict(), "splits": splits}, fh)
        fh.write("\n")
