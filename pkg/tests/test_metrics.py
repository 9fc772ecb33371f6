import math
import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from slickseg.metrics import (
    ConfusionCounts,
    accuracy,
    batch_stats,
    confusion,
    precision,
    roc_sweep,
)


def naive_counts(mask, truth):
    tp = fp = tn = fn = 0
    for m, t in zip(mask.ravel().tolist(), truth.ravel().tolist()):
        if m and t:
            tp += 1
        elif m:
            fp += 1
        elif t:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, tn, fn)


def test_identity_mask():
    t = (np.arange(100).reshape(10, 10) % 3 == 0).astype(np.uint8)
    c = confusion(t, t)
    assert c.tp + c.tn == 100 and c.fp == 0 and c.fn == 0
    assert accuracy(c) == 1.0 and precision(c) == 1.0


def test_complement_mask():
    t = (np.arange(100).reshape(10, 10) % 3 == 0).astype(np.uint8)
    c = confusion(1 - t, t)
    assert c.tp == 0 and c.tn == 0
    assert accuracy(c) == 0.0


def test_random_pair_matches_loop():
    rng = np.random.default_rng(0)
    m, t = rng.integers(0, 2, size=(2, 16, 16))
    assert confusion(m, t) == naive_counts(m, t)


def test_accuracy_arithmetic():
    assert accuracy(ConfusionCounts(40, 5, 50, 5)) == pytest.approx(0.90)
    with pytest.raises(ValueError):
        accuracy(ConfusionCounts(0, 0, 0, 0))


def test_precision_conventions():
    assert precision(ConfusionCounts(90, 10, 0, 0)) == pytest.approx(0.90)
    assert precision(ConfusionCounts(5, 0, 3, 2)) == 1.0
    assert precision(ConfusionCounts(0, 0, 10, 3)) == 0.0
    assert precision(ConfusionCounts(0, 0, 10, 0)) == 1.0


def test_confusion_rejects_bad_input():
    with pytest.raises(ValueError):
        confusion(np.array([[0, 2]]), np.array([[0, 1]]))
    with pytest.raises(ValueError):
        confusion(np.zeros((2, 2)), np.zeros((2, 3)))


masks = st.tuples(st.integers(1, 12), st.integers(1, 12)).flatmap(
    lambda s: st.tuples(arrays(np.uint8, s, elements=st.integers(0, 1)),
                        arrays(np.uint8, s, elements=st.integers(0, 1))))


@settings(max_examples=100, deadline=None)
@given(masks)
def test_confusion_matches_naive_and_sums(pair):
    m, t = pair
    c = confusion(m, t)
    assert c == naive_counts(m, t)
    assert c.total == m.size


@settings(max_examples=100, deadline=None)
@given(masks)
def test_metrics_invariant_only_under_joint_flip(pair):
    m, t = pair
    c, f = confusion(m, t), confusion(1 - m, 1 - t)
    assert accuracy(c) == accuracy(f)
    assert (f.tp, f.fp, f.tn, f.fn) == (c.tn, c.fn, c.tp, c.fp)


def test_roc_separable_field():
    yy, xx = np.mgrid[0:40, 0:40].astype(float)
    d = np.hypot(xx - 20, yy - 20) - 10
    truth = (d < 0).astype(np.uint8)
    n = 64
    roc = roc_sweep(d, truth, oil_sign=-1, n_thresholds=n)
    # thresholds sit on a grid, so the corner is reached up to one grid step
    assert roc.auc() >= 1 - 1 / n
    assert max(t for f, t in roc.points if f == 0.0) >= 1 - 2 / n
    assert roc.points[0] == (0.0, 0.0) and roc.points[-1] == (1.0, 1.0)


def test_roc_random_field_auc_near_half():
    aucs = []
    for seed in range(10):
        rng = np.random.default_rng(seed)
        truth = rng.integers(0, 2, size=(64, 64))
        aucs.append(roc_sweep(rng.normal(size=(64, 64)), truth, n_thresholds=64).auc())
    assert abs(np.mean(aucs) - 0.5) <= 0.05


def test_roc_two_thresholds():
    phi = np.array([[-1.0, 0.0], [0.5, 1.0]])
    truth = np.array([[1, 1], [0, 0]])
    roc = roc_sweep(phi, truth, n_thresholds=2)
    assert len(roc.thresholds) == 4
    assert roc.points[0] == (0.0, 0.0) and roc.points[-1] == (1.0, 1.0)
    # threshold at the maximum score calls only the most oil-like pixel
    assert roc.points[1] == (0.0, 0.5)


def test_roc_constant_field_is_degenerate(caplog):
    roc = roc_sweep(np.zeros((4, 4)), np.eye(4, dtype=np.uint8))
    assert roc.degenerate and roc.points == [(0.0, 0.0), (1.0, 1.0)]
    assert roc.auc() == 0.5
    with pytest.raises(ValueError):
        roc_sweep(np.zeros((4, 4)), np.eye(4), n_thresholds=1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 40), st.sampled_from([-1, 1]))
def test_roc_monotone_and_bounded(seed, n, sign):
    rng = np.random.default_rng(seed)
    phi = np.round(rng.normal(size=(9, 11)), 1)
    truth = rng.integers(0, 2, size=(9, 11))
    roc = roc_sweep(phi, truth, oil_sign=sign, n_thresholds=n)
    assert np.all(np.diff(roc.fpr) >= 0) and np.all(np.diff(roc.tpr) >= 0)
    assert 0.0 <= roc.auc() <= 1.0


def test_roc_points_match_thresholded_masks():
    rng = np.random.default_rng(1)
    phi = rng.normal(size=(12, 12))
    truth = (rng.uniform(size=(12, 12)) < 0.3).astype(np.uint8)
    roc = roc_sweep(phi, truth, oil_sign=-1, n_thresholds=7)
    for t, fpr, tpr in zip(roc.thresholds, roc.fpr, roc.tpr):
        c = confusion((-phi >= t).astype(np.uint8), truth)
        assert tpr == c.tp / (c.tp + c.fn)
        assert fpr == c.fp / (c.fp + c.tn)


def test_batch_stats_basic():
    s = batch_stats([1, 1, 1])
    assert s.mean == 1 and s.sd == 0
    s = batch_stats([0, 1])
    assert s.mean == 0.5 and s.sd == 0.5
    with pytest.raises(ValueError):
        batch_stats([])


def test_batch_stats_two_pass_oracle():
    vals = np.random.default_rng(3).uniform(size=100).tolist()
    mean = sum(vals) / len(vals)
    sd = math.sqrt(sum((v - mean) ** 2 for v in vals) / len(vals))
    s = batch_stats(vals)
    assert s.mean == pytest.approx(mean, abs=1e-12)
    assert s.sd == pytest.approx(sd, abs=1e-12)
    assert s.sd == pytest.approx(statistics.pstdev(vals), abs=1e-12)
    assert s.quartiles[1] == pytest.approx(statistics.median(vals), abs=1e-12)
    assert (s.min, s.max, s.n) == (min(vals), max(vals), 100)
