import numpy as np
import pytest
from scipy import ndimage

from rcook.cook import cook_scores
from rcook.evaluation import roc
from rcook.regression import augment, fit, leverages, predict
from rcook.synth import Pervasive, SceneSpec, generate, plant_blobs


def linear_cook_all(X, Y):
    Xd = augment(X.data)
    m = fit(Xd, Y.data, 0.0)
    return cook_scores(Y.data - predict(m, Xd), leverages(m, Xd), Y.bands, m.mse).scores


def test_same_seed_same_scene():
    spec = SceneSpec(24, 20, 3, Pervasive.QUADRATIC, 0.1, 0.02, 1.0, 11)
    a, b = generate(spec), generate(spec)
    for u, v in zip(a, b):
        assert u.data.tobytes() == v.data.tobytes()
    c = generate(SceneSpec(24, 20, 3, Pervasive.QUADRATIC, 0.1, 0.02, 1.0, 12))
    assert c[0].data.tobytes() != a[0].data.tobytes()


@pytest.mark.parametrize("kind", list(Pervasive))
def test_shapes_and_finiteness(kind):
    X, Y, truth = generate(SceneSpec(16, 12, 4, kind, 0.05, 0.05, 2.0, 3))
    assert X.data.shape == Y.data.shape == (192, 4)
    assert truth.n == 192 and (truth.rows, truth.cols) == (16, 12)
    assert np.all(np.isfinite(Y.data))


def test_field_is_standardized_and_smooth():
    X, _, _ = generate(SceneSpec(64, 64, 2, seed=4))
    np.testing.assert_allclose(X.data.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(X.data.std(axis=0), 1.0, rtol=1e-12)
    band = X.raster()[:, :, 0]
    # neighbours are strongly correlated at correlation length 8
    assert np.corrcoef(band[:, :-1].ravel(), band[:, 1:].ravel())[0, 1] > 0.9


@pytest.mark.parametrize("frac", [0.01, 0.037, 0.2])
def test_anomaly_count(frac):
    spec = SceneSpec(50, 40, 2, anomaly_fraction=frac, seed=2, blob_pixels=30)
    _, _, truth = generate(spec)
    target = round(frac * 2000)
    assert abs(int(truth.data.sum()) - target) <= spec.blob_pixels
    assert int(truth.data.sum()) == spec.n_anomalous


def test_blobs_are_contiguous():
    rng = np.random.default_rng(0)
    for blob in plant_blobs(rng, 40, 40, 300, 25):
        img = np.zeros(1600, dtype=bool)
        img[blob] = True
        _, count = ndimage.label(img.reshape(40, 40))
        assert count == 1


def test_anomaly_only_changes_y():
    X, Y, truth = generate(SceneSpec(30, 30, 3, Pervasive.LINEAR, 0.0, 0.05, 1.5, 8))
    normal = ~truth.data
    Xd = augment(X.data)
    m = fit(Xd[normal], Y.data[normal], 0.0)
    E = Y.data - predict(m, Xd)
    assert np.max(np.abs(E[normal])) < 1e-10
    np.testing.assert_allclose(np.linalg.norm(E[truth.data], axis=1), 1.5, rtol=1e-10)


def test_single_pixel_anomaly_is_strict_maximum():
    spec = SceneSpec(20, 20, 3, Pervasive.LINEAR, 0.0, 1 / 400, 1.0, 6)
    X, Y, truth = generate(spec)
    assert truth.data.sum() == 1
    scores = linear_cook_all(X, Y)
    top = np.argmax(scores)
    assert truth.data[top]
    assert scores[top] > np.max(np.delete(scores, top))


def test_linear_noise_free_auc_is_one():
    X, Y, truth = generate(SceneSpec(40, 40, 4, Pervasive.LINEAR, 0.0, 0.02, 1.0, 9))
    assert roc(linear_cook_all(X, Y), truth).auc == 1.0


@pytest.mark.parametrize("field, value", [
    ("anomaly_fraction", 0.0), ("anomaly_fraction", 1.0), ("anomaly_strength", 0.0),
    ("noise_sigma", -1.0), ("rows", 0), ("blob_pixels", 0),
])
def test_spec_validation(field, value):
    doc = SceneSpec(10, 10, 2).to_dict()
    doc[field] = value
    with pytest.raises(ValueError):
        SceneSpec.from_dict(doc)


def test_spec_needs_one_anomalous_pixel():
    with pytest.raises(ValueError, match=">= 1"):
        SceneSpec(10, 10, 2, anomaly_fraction=0.005)


def test_spec_json_round_trip():
    spec = SceneSpec(10, 12, 3, Pervasive.SINUSOID_MIX, 0.2, 0.1, 2.0, 4)
    import json
    assert SceneSpec.from_json(json.dumps(spec.to_dict())) == spec
