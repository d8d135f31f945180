"""Hybrid model: shapes, counts, gradients and checkpoints."""

import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from autoansatz.data import Standardizer
from autoansatz.models import N_CLASSES, N_FEATURES, AnsatzSpec, EmbeddingKind, VariationalKind
from autoansatz.qnn import (
    PARAM_KEYS,
    _chunks,
    backward,
    forward,
    init_model,
    load_checkpoint,
    predict,
    probabilities,
    qnn_trainable_count,
    save_checkpoint,
    trainable_count,
)
from autoansatz.trainable import cross_entropy


def _numeric_grads(model, features, labels, h=1e-6):
    grads = {}
    params = model.get_params()
    for key in PARAM_KEYS:
        grad = np.zeros_like(params[key])
        for index in np.ndindex(params[key].shape):
            values = []
            for sign in (1.0, -1.0):
                shifted = {k: v.copy() for k, v in params.items()}
                shifted[key][index] += sign * h
                logits = model.with_params(shifted).logits(features)
                values.append(cross_entropy(logits, labels).mean())
            grad[index] = (values[0] - values[1]) / (2 * h)
        grads[key] = grad
    return grads


class TestQnnModel:
    def test_baseline_trainable_count(self):
        spec = AnsatzSpec(embedding=EmbeddingKind.ANGLE, variational=VariationalKind.S2D, n=10, L=1)
        assert qnn_trainable_count(spec) == 476
        assert trainable_count(init_model(spec, seed=0)) == 476

    def test_forward_shapes(self, rng):
        model = init_model(AnsatzSpec(n=4, L=1), seed=1)
        x = rng.normal(size=(5, N_FEATURES))
        assert forward(model, x).shape == (5, N_CLASSES)
        assert forward(model, x[0]).shape == (N_CLASSES,)
        assert_allclose(probabilities(model, x).sum(axis=-1), np.ones(5))
        assert predict(model, x).shape == (5,)

    def test_init_is_seeded(self):
        spec = AnsatzSpec(n=4, L=2)
        a, b = init_model(spec, seed=3), init_model(spec, seed=3)
        for key in PARAM_KEYS:
            assert_allclose(getattr(a, key), getattr(b, key))
        assert np.all(a.b_in == 0) and np.all(a.b_out == 0)
        assert np.all((a.theta >= 0) & (a.theta < 2 * np.pi))

    def test_rejects_bad_input(self):
        model = init_model(AnsatzSpec(n=3, L=1), seed=0)
        with pytest.raises(ValueError, match="36 features"):
            forward(model, np.zeros(35))
        bad = np.zeros(N_FEATURES)
        bad[4] = np.nan
        with pytest.raises(ValueError, match="finite"):
            forward(model, bad)

    def test_unknown_gradient_method(self, rng):
        model = init_model(AnsatzSpec(n=3, L=1), seed=0)
        with pytest.raises(ValueError):
            backward(model, rng.normal(size=(2, N_FEATURES)), np.array([0, 1]), method="spsa")

    @pytest.mark.parametrize("embedding,variational", list(itertools.product(EmbeddingKind, VariationalKind)))
    def test_backward_matches_numeric(self, embedding, variational, rng):
        spec = AnsatzSpec(embedding=embedding, variational=variational, n=5, L=1, structure_seed=2)
        features = rng.normal(size=(3, N_FEATURES))
        scaler = Standardizer.fit(rng.normal(size=(10, N_FEATURES)))
        model = init_model(spec, seed=4, scaler=scaler)
        # Keep IQP products moderate
        model = model.with_params({**model.get_params(), "w_in": model.w_in * 0.3})
        labels = np.array([0, 3, 7])

        expected = _numeric_grads(model, features, labels)
        for method in ("parameter-shift", "adjoint"):
            grads, mean_loss = backward(model, features, labels, method=method)
            assert mean_loss == pytest.approx(cross_entropy(model.logits(features), labels).mean())
            for key in PARAM_KEYS:
                assert_allclose(grads[key], expected[key], rtol=1e-4, atol=1e-7)

    def test_checkpoint_round_trip(self, tmp_path, rng):
        model = init_model(AnsatzSpec(embedding=EmbeddingKind.IQP, variational=VariationalKind.RANDOM, n=4, L=2))
        path = tmp_path / "model.json"
        save_checkpoint(model, path)
        restored = load_checkpoint(path)
        x = rng.normal(size=(4, N_FEATURES))
        assert restored.spec == model.spec
        assert_allclose(restored.logits(x), model.logits(x))

    def test_zero_output_weights_give_zero_theta_gradient(self, rng):
        model = init_model(AnsatzSpec(n=4, L=2), seed=1)
        model = model.with_params({**model.get_params(), "w_out": np.zeros_like(model.w_out)})
        grads, _ = backward(model, rng.normal(size=(3, N_FEATURES)), np.array([1, 2, 3]))
        assert np.all(grads["theta"] == 0.0)
        assert np.all(grads["w_in"] == 0.0)

    def test_duplicated_batch_matches_single_sample(self, rng):
        model = init_model(AnsatzSpec(n=4, L=1), seed=2)
        x = rng.normal(size=(1, N_FEATURES))
        single, single_loss = backward(model, x, np.array([5]))
        doubled, doubled_loss = backward(model, np.repeat(x, 2, axis=0), np.array([5, 5]))
        assert doubled_loss == pytest.approx(single_loss)
        for key in PARAM_KEYS:
            assert_allclose(doubled[key], single[key], rtol=1e-10, atol=1e-14)


class TestChunking:
    def test_chunk_boundaries(self):
        assert list(_chunks(100, 10)) == [slice(0, 64), slice(64, 100)]
        assert list(_chunks(3, 20)) == [slice(0, 1), slice(1, 2), slice(2, 3)]

    def test_chunked_logits_match_row_by_row(self, rng):
        model = init_model(AnsatzSpec(n=10, L=1), seed=0)
        x = rng.normal(size=(70, N_FEATURES))
        together = model.logits(x)
        for row in (0, 63, 64, 69):
            assert_allclose(together[row], model.logits(x[row : row + 1])[0], rtol=1e-12, atol=1e-12)
