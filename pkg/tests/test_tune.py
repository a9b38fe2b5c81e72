import math

import numpy as np
import pytest

from rcook.evaluation import roc
from rcook.pipeline import DetectorConfig, Method, detect
from rcook.raster import PixelMatrix
from rcook.rff import derive_seed
from rcook.synth import Pervasive, SceneSpec, generate
from rcook.tune import (GridSpec, _RFF_STREAM, cv_tune, default_grid, log_grid, sample_indices,
                        sample_pixels, split_half, split_indices, stratified_folds)


@pytest.fixture(scope="module")
def linear_scene():
    X, Y, truth = generate(SceneSpec(30, 30, 3, Pervasive.LINEAR, 0.0, 0.03, 3.0, 5))
    return X.data, Y.data, truth.data


@pytest.fixture(scope="module")
def quad_scene():
    X, Y, truth = generate(SceneSpec(30, 30, 3, Pervasive.QUADRATIC, 0.1, 0.04, 1.0, 2))
    return X.data, Y.data, truth.data


def test_log_grid_examples():
    assert log_grid(1, 100, 3) == [1.0, 10.0, 100.0]
    assert log_grid(2, 8, 3) == [2.0, 4.0, 8.0]
    with pytest.raises(ValueError):
        log_grid(1, 10, 1)
    with pytest.raises(ValueError):
        log_grid(10, 1, 3)


def test_default_grid_protocol():
    g = default_grid()
    assert len(g) == 50
    assert g[0] == 1e-5 and g[-1] == 1e4
    ratios = np.array(g[1:]) / np.array(g[:-1])
    expected = 10.0 ** (9 / 49)
    np.testing.assert_allclose(ratios, expected, rtol=1e-12)
    spec = GridSpec()
    assert spec.sigma_grid == g and spec.lambda_grid == g and spec.folds == 5


def test_sampling_identity_and_determinism():
    idx = sample_indices(50, 50, 3)
    assert sorted(idx.tolist()) == list(range(50))
    a, b = sample_indices(1000, 10, 42), sample_indices(1000, 10, 42)
    assert a.tolist() == b.tolist() and len(set(a.tolist())) == 10
    assert sample_indices(1000, 10, 43).tolist() != a.tolist()
    with pytest.raises(ValueError, match="cannot sample"):
        sample_indices(5, 6, 0)


def test_sample_pixels_aligned():
    X = np.arange(20.0).reshape(10, 2)
    Y = -X
    truth = np.arange(10) % 3 == 0
    Xs, Ys, ts = sample_pixels(X, Y, truth, 5, 1)
    np.testing.assert_array_equal(Ys, -Xs)
    np.testing.assert_array_equal(ts, (Xs[:, 0] / 2) % 3 == 0)


def test_sample_class_proportions():
    _, _, truth = generate(SceneSpec(128, 128, 1, anomaly_fraction=0.05, seed=1))
    _, _, sampled = sample_pixels(np.zeros((truth.n, 1)), np.zeros((truth.n, 1)), truth, 10_000, 7)
    assert abs(sampled.mean() - truth.data.mean()) * 100 <= 5


def test_split():
    idx = np.arange(10)
    train, test = split_half(idx)
    assert train.tolist() == [0, 1, 2, 3, 4] and test.tolist() == [5, 6, 7, 8, 9]
    train, test = split_indices(idx, 0.3)
    assert train.size == 3 and test.size == 7
    with pytest.raises(ValueError):
        split_indices(idx, 1.0)


def test_stratified_folds():
    labels = np.r_[np.ones(12, bool), np.zeros(40, bool)]
    folds = stratified_folds(labels, 4, 0)
    for f in range(4):
        assert labels[folds == f].sum() == 3
        assert (~labels[folds == f]).sum() == 10
    with pytest.raises(ValueError, match="2 positives and 50 negatives"):
        stratified_folds(np.r_[np.ones(2, bool), np.zeros(50, bool)], 5, 0)


def test_single_grid_point(quad_scene):
    r = cv_tune(*quad_scene, GridSpec([0.7], [0.01], folds=3, seed=1), D=10)
    assert (r.best_sigma, r.best_lambda) == (0.7, 0.01)
    assert len(r.table) == 1 and r.cv_auc == r.table[0][2]


def test_separable_point_wins(linear_scene):
    r = cv_tune(*linear_scene, GridSpec([1e-3, 100.0], [1e-5], folds=3, seed=1), D=20)
    assert r.best_sigma == 100.0 and r.cv_auc == 1.0
    assert r.table[0][2] < 0.9


def test_cook_uses_lambda_axis_only(linear_scene):
    r = cv_tune(*linear_scene, GridSpec([], [1e-5, 1e4], folds=3, seed=1), method="cook")
    assert r.best_sigma is None and r.D is None
    assert [row[0] for row in r.table] == [None, None]
    assert r.best_lambda == 1e-5 and r.cv_auc == 1.0


def test_result_invariants_and_determinism(quad_scene):
    grid = GridSpec(log_grid(0.1, 10, 3), log_grid(1e-4, 1, 3), folds=3, seed=4)
    a = cv_tune(*quad_scene, grid, D=15)
    b = cv_tune(*quad_scene, grid, D=15)
    assert a == b
    assert len(a.table) == 9
    assert 0 <= a.cv_auc <= 1
    assert a.cv_auc == max(row[2] for row in a.table)
    assert (a.best_sigma, a.best_lambda, a.cv_auc) in a.table


def test_grid_order_invariance(quad_scene):
    sig, lam = log_grid(0.1, 10, 3), log_grid(1e-4, 1, 3)
    a = cv_tune(*quad_scene, GridSpec(sig, lam, folds=3, seed=4), D=15)
    b = cv_tune(*quad_scene, GridSpec(sig[::-1], lam[::-1], folds=3, seed=4), D=15)
    assert {(s, l): v for s, l, v in a.table} == {(s, l): v for s, l, v in b.table}
    assert (a.best_sigma, a.best_lambda, a.cv_auc) == (b.best_sigma, b.best_lambda, b.cv_auc)


def test_matches_detect_per_fold(quad_scene):
    """Spectral fast path against refitting each fold with the pipeline."""
    X, Y, truth = quad_scene
    sigma, lam, seed, folds = 1.3, 0.02, 9, 2
    r = cv_tune(X, Y, truth, GridSpec([sigma], [lam], folds=folds, seed=seed), D=12)
    fold = stratified_folds(truth, folds, seed)
    aucs = []
    for f in range(folds):
        cfg = DetectorConfig(Method.RCOOK, lam=lam, sigma=sigma, D=12, seed=derive_seed(seed, _RFF_STREAM, f))
        det = detect(PixelMatrix(X, X.shape[0], 1), PixelMatrix(Y, Y.shape[0], 1), cfg, np.flatnonzero(fold != f))
        aucs.append(roc(det.scores.scores[fold == f], truth[fold == f]).auc)
    assert r.cv_auc == pytest.approx(np.mean(aucs), abs=1e-9)


def test_singular_points_are_skipped(linear_scene):
    X, Y, truth = linear_scene
    X = np.column_stack([X, X[:, :1]])  # duplicated band: singular at lambda = 0
    r = cv_tune(X, Y, truth, GridSpec([], [0.0, 1e-3], folds=3, seed=0), method="cook")
    assert math.isnan(r.table[0][2])
    assert r.best_lambda == 1e-3


def test_exports(quad_scene):
    r = cv_tune(*quad_scene, GridSpec([0.5, 2.0], [0.1], folds=3, seed=0), D=8)
    lines = r.to_csv().splitlines()
    assert lines[0] == "sigma,lambda,mean_auc" and len(lines) == 3
    import json
    doc = json.loads(r.to_json())
    assert doc["best_sigma"] == r.best_sigma and len(doc["table"]) == 2
