import json
import math
import statistics

import numpy as np
import pytest

from fluorospec.classifiers import ClassifierSpec
from fluorospec.core import FeatureMatrix, RejectedInputError
from fluorospec.evaluation import (
    EvalReport, EvalRow, SplitPlan, accuracy, benchmark_all, benchmark_specs, repeated_eval,
    run_splits, sample_vote_accuracy, save_split_audit, split_holdout, summarize)


class Constant:
    def __init__(self, label):
        self.label = label

    def predict(self, X):
        return np.full(len(X), self.label)


def _labels_fm(counts, reps=1, d=2):
    labels = np.repeat(np.arange(len(counts)), counts)
    ids = tuple(f"c{c}-{i // reps}" for c, n in enumerate(counts) for i in range(n))
    return FeatureMatrix(np.zeros((len(labels), d)), labels, ids)


@pytest.mark.parametrize("r", range(5))
def test_reference_split_sizes(default_fm, r):
    tr, va = split_holdout(default_fm, SplitPlan(), r)
    assert (len(tr), len(va)) == (432, 108)
    assert np.bincount(default_fm.labels[va]).tolist() == [48, 32, 28]
    assert set(tr).isdisjoint(va) and sorted(np.r_[tr, va]) == list(range(540))


def test_split_deterministic_and_repetitions_differ(default_fm):
    plan = SplitPlan(base_seed=3)
    a = split_holdout(default_fm, plan, 7)
    assert all(np.array_equal(x, y) for x, y in zip(a, split_holdout(default_fm, plan, 7)))
    assert not np.array_equal(a[1], split_holdout(default_fm, plan, 8)[1])


@pytest.mark.parametrize("counts", [(7, 5, 3), (11, 13, 2), (50, 1, 9)])
@pytest.mark.parametrize("frac", [0.5, 0.63, 0.8])
def test_stratified_within_one_row(counts, frac):
    fm = _labels_fm(counts)
    try:
        tr, va = split_holdout(fm, SplitPlan(train_fraction=frac), 0)
    except RejectedInputError:
        pytest.skip("degenerate stratification for this combination")
    for c, n in enumerate(counts):
        assert abs((fm.labels[tr] == c).sum() - frac * n) <= 1


def test_one_row_class_absent_from_training():
    with pytest.raises(RejectedInputError, match="absent from training"):
        split_holdout(_labels_fm((10, 10, 1)), SplitPlan(train_fraction=0.4), 0)


def test_unstratified_split_sizes(default_fm):
    tr, va = split_holdout(default_fm, SplitPlan(stratified=False), 0)
    assert (len(tr), len(va)) == (432, 108)


def test_group_mode_keeps_samples_together(default_fm):
    plan = SplitPlan(group_by_sample=True)
    ids = np.array(default_fm.sample_ids)
    for r in range(10):
        tr, va = split_holdout(default_fm, plan, r)
        assert set(ids[tr]).isdisjoint(ids[va])
        assert len(tr) + len(va) == 540
        # 12/8/7 samples -> 10/6/6 in training (round half up)
        assert len(set(ids[tr])) == 22


def test_plan_validation():
    with pytest.raises(RejectedInputError):
        SplitPlan(train_fraction=1.0)
    with pytest.raises(RejectedInputError):
        SplitPlan(n_repetitions=0)


def test_accuracy_values():
    y = np.arange(108) % 3
    assert accuracy(y, y) == 1.0
    assert accuracy((y + 1) % 3, y) == 0.0
    pred = y.copy()
    pred[:11] = (pred[:11] + 1) % 3
    assert accuracy(pred, y) == 97 / 108
    with pytest.raises(RejectedInputError):
        accuracy([], [])


def test_sample_vote_accuracy():
    pred = [0, 0, 1, 2, 2, 1, 1, 0]
    lab = [0, 0, 0, 2, 2, 2, 1, 1]
    ids = ["a", "a", "a", "b", "b", "b", "c", "c"]
    # a -> 0 correct, b -> 2 correct, c -> tie 0/1 goes to 0, wrong
    assert sample_vote_accuracy(pred, lab, ids) == 2 / 3


def test_constant_classifier_baseline(default_fm):
    res = repeated_eval(lambda tr, seed: Constant(0), default_fm, SplitPlan(n_repetitions=20))
    assert res.mean_accuracy == pytest.approx(240 / 540, abs=1e-3)
    assert res.std_accuracy < 1e-3


def test_single_repetition_zero_std(small_fm):
    res = repeated_eval(ClassifierSpec("KNN"), small_fm, SplitPlan(n_repetitions=1))
    assert res.std_accuracy == 0.0 and len(res.accuracies) == 1


def test_summary_matches_streaming_oracle():
    acc = list(np.random.default_rng(2).uniform(0.3, 1.0, size=100))
    # Welford's streaming mean / population variance
    mean = m2 = 0.0
    for k, a in enumerate(acc, start=1):
        delta = a - mean
        mean += delta / k
        m2 += delta * (a - mean)
    res = summarize(acc)
    assert res.mean_accuracy == pytest.approx(mean, abs=1e-12)
    assert res.std_accuracy == pytest.approx(math.sqrt(m2 / len(acc)), abs=1e-12)
    assert res.std_accuracy == pytest.approx(statistics.pstdev(acc), abs=1e-12)
    assert summarize([0.5] * 10).std_accuracy == 0.0


def test_repetition_reproducible_in_isolation(small_fm):
    plan = SplitPlan(n_repetitions=6, base_seed=4)
    full = run_splits(lambda tr, va, seed: (tuple(va.sample_ids), seed), small_fm, plan)
    again = run_splits(lambda tr, va, seed: (tuple(va.sample_ids), seed), small_fm, plan, threads=3)
    assert full == again
    assert len({s for _, s in full}) == 6


def test_errors_tagged_with_repetition(small_fm):
    def boom(tr, va, seed):
        raise ValueError("bad fit")
    with pytest.raises(ValueError, match="repetition 0: bad fit"):
        run_splits(boom, small_fm, SplitPlan(n_repetitions=3))


def test_benchmark_specs_rows():
    specs = benchmark_specs()
    assert len(specs) == 7 + 9
    assert [s.params["n_components"] for s in specs if s.algorithm == "PCA_LDA"] == \
        [2, 3, 4, 5, 10, 15, 20, 25, 30]
    assert [s.algorithm for s in benchmark_specs(["knn", "rf"])] == ["RF", "KNN"]


def test_benchmark_sorted_and_in_range(small_fm):
    report = benchmark_all(small_fm, SplitPlan(n_repetitions=3),
                           algorithms=["NB", "KNN", "DT", "PCA_LDA"], pca_components=(2, 5))
    means = [r.mean_accuracy for r in report.rows]
    assert means == sorted(means)
    assert len(report.rows) == 5
    for row in report.rows:
        assert 0 <= row.mean_accuracy <= 1 and row.std_accuracy >= 0 and row.n_splits == 3
        assert (row.std_accuracy == 0) == (len(set(row.accuracies)) == 1)
    assert report.find("PCA_LDA", n_components=5).label == "PCA+LDA (5)"


def test_split_audit_file(small_fm, tmp_path):
    plan = SplitPlan(n_repetitions=4)
    save_split_audit(small_fm, plan, tmp_path / "a.json")
    doc = json.loads((tmp_path / "a.json").read_text())
    assert len(doc["splits"]) == 4
    tr, va = split_holdout(small_fm, plan, 2)
    assert doc["splits"][2]["validation"] == va.tolist()
