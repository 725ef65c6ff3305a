import math

import numpy as np
import pytest

from conftest import CountingPredictor
from faitheval import (
    CachingPredictor,
    ImageTensor,
    LinearSoftmaxModel,
    ParameterError,
    PredictionRecord,
    StdioPredictor,
    TransportError,
    ValidationError,
    apply_replacement,
    sample_mean,
)


def test_zero_weight_symmetry():
    model = LinearSoftmaxModel(np.zeros((3, 2, 2, 1)), np.zeros(3))
    record = model.predict(ImageTensor(np.random.default_rng(0).random((2, 2, 1))))
    np.testing.assert_allclose(record.probs, [1 / 3, 1 / 3, 1 / 3])
    assert record.predicted_class == 0


def test_one_pixel_closed_form():
    weights = np.array([2.0, 0.0]).reshape(2, 1, 1, 1)
    model = LinearSoftmaxModel(weights, [0.0, 0.0])
    record = model.predict(ImageTensor(np.array([[[1.0]]])))
    expected = math.exp(2) / (math.exp(2) + 1)
    assert record.probs[0] == pytest.approx(expected, abs=1e-12)
    assert record.probs[1] == pytest.approx(1 - expected, abs=1e-12)


def test_determinism():
    model = LinearSoftmaxModel.seeded((3, 3, 2), 4, seed=9)
    x = ImageTensor(np.random.default_rng(1).random((3, 3, 2)))
    a = model.predict(x)
    b = model.predict(x)
    np.testing.assert_array_equal(a.probs, b.probs)
    assert a.predicted_class == b.predicted_class


def test_predict_batch_matches_map():
    model = LinearSoftmaxModel.seeded((2, 2, 1), 3, seed=2)
    xs = [ImageTensor(np.random.default_rng(i).random((2, 2, 1))) for i in range(4)]
    batch = model.predict_batch(xs)
    single = [model.predict(x) for x in xs]
    assert batch == [] or len(batch) == 4
    for a, b in zip(batch, single):
        np.testing.assert_array_equal(a.probs, b.probs)
    assert model.predict_batch([]) == []


def test_bias_shift_invariance():
    weights = np.random.default_rng(3).normal(size=(3, 2, 2, 1))
    x = ImageTensor(np.random.default_rng(4).random((2, 2, 1)))
    a = LinearSoftmaxModel(weights, [0.0, 1.0, -2.0]).predict(x)
    b = LinearSoftmaxModel(weights, [5.0, 6.0, 3.0]).predict(x)
    np.testing.assert_allclose(a.probs, b.probs, atol=1e-12)


def test_subset_replacement_logit_oracle():
    # mean-replacing a pixel set changes each class logit by
    # sum_{p in S} (mean - x_p) . w_c[p]; probabilities must match within 1e-5
    rng = np.random.default_rng(6)
    model = LinearSoftmaxModel(rng.normal(size=(2, 4, 4, 1)), rng.normal(size=2))
    x = ImageTensor(rng.random((4, 4, 1)))
    mean = sample_mean(x)
    pixels = np.array([0, 3, 7, 9])
    perturbed = model.predict(apply_replacement(x, pixels, mean))

    flat_x = x.data.reshape(-1, 1)
    flat_w = model.weights.reshape(2, -1, 1)
    logits = model.logits(x)
    for c in range(2):
        logits[c] += float(np.sum((mean - flat_x[pixels]) * flat_w[c, pixels]))
    expected = np.exp(logits - logits.max())
    expected /= expected.sum()
    np.testing.assert_allclose(perturbed.probs, expected, atol=1e-5)


def test_shape_mismatch():
    model = LinearSoftmaxModel.seeded((2, 2, 1), 2, seed=0)
    with pytest.raises(ParameterError):
        model.predict(ImageTensor(np.ones((3, 3, 1))))


def test_record_validation():
    with pytest.raises(ValidationError):
        PredictionRecord.from_probs([0.9, 0.2])
    with pytest.raises(ValidationError):
        PredictionRecord.from_probs([1.2, -0.2])
    record = PredictionRecord.from_probs([0.25, 0.5, 0.25])
    assert record.predicted_class == 1
    tie = PredictionRecord.from_probs([0.4, 0.4, 0.2])
    assert tie.predicted_class == 0  # argmax ties break to the lowest index


def test_caching_predictor_dedupes():
    inner = CountingPredictor(LinearSoftmaxModel.seeded((2, 2, 1), 2, seed=1))
    cached = CachingPredictor(inner)
    x = ImageTensor(np.random.default_rng(7).random((2, 2, 1)))
    y = ImageTensor(np.random.default_rng(8).random((2, 2, 1)))
    cached.predict(x)
    cached.predict(x)
    cached.predict(y)
    assert inner.calls == 2


# --- stdio protocol --------------------------------------------------------


def test_stdio_round_trip(adapter_script):
    with StdioPredictor(adapter_script) as client:
        assert client.num_classes == 3
        assert client.input_shape == (4, 4, 1)
        assert client.model_id == "echo-adapter"
        x = ImageTensor(np.random.default_rng(0).random((4, 4, 1), dtype=np.float32))
        a = client.predict(x)
        b = client.predict(x)
        np.testing.assert_array_equal(a.probs, b.probs)
        assert a.probs.sum() == pytest.approx(1.0, abs=1e-9)


def test_stdio_shape_error(adapter_script):
    with StdioPredictor(adapter_script) as client:
        with pytest.raises(ParameterError):
            client.predict(ImageTensor(np.ones((2, 2, 1))))


def test_stdio_spawn_failure():
    with pytest.raises(TransportError):
        StdioPredictor(["/nonexistent/adapter"])
