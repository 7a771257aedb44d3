"""Fully connected sequencer: forward/backward math, training, checkpoints."""

import numpy as np
import pytest

from blockseq import mlp
from blockseq.dataset import enumerate_configs, make_pairs
from blockseq.model import parse_config


@pytest.fixture(scope="module")
def small_records():
    configs = list(enumerate_configs(2, "relational"))
    return make_pairs(configs, {1: 6, 2: 4}, seed=5)


def zero_model(widths=(8, 6, 5, 8)):
    m = mlp.init_model(widths, seed=0)
    return mlp.MlpModel(
        [np.zeros_like(w) for w in m.weights], [np.zeros_like(b) for b in m.biases]
    )


class TestForward:
    def test_zero_model_outputs_half(self):
        out = mlp.forward(zero_model(), np.zeros(8))
        assert np.allclose(out, 0.5)

    def test_output_shape_and_range(self):
        model = mlp.init_model(seed=1)
        out = mlp.forward(model, np.random.default_rng(0).random(80))
        assert out.shape == (128,)
        assert ((out > 0) & (out < 1)).all()

    def test_deterministic(self):
        model = mlp.init_model(seed=2)
        x = np.random.default_rng(1).random(80)
        assert np.array_equal(mlp.forward(model, x), mlp.forward(model, x))

    def test_default_widths(self):
        assert mlp.init_model().widths == (80, 512, 512, 256, 256, 128)


class TestLoss:
    def test_uniform_half_gives_log_two(self):
        assert mlp.bce_loss(np.full(128, 0.5), np.zeros(128)) == pytest.approx(np.log(2))

    def test_perfect_prediction_is_tiny(self):
        y = np.zeros(128)
        y[::3] = 1.0
        assert mlp.bce_loss(y, y) <= -np.log(1 - mlp.CLIP_EPS) + 1e-12

    def test_nonnegative(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            pred = rng.random(128)
            truth = (rng.random(128) > 0.5).astype(float)
            assert mlp.bce_loss(pred, truth) >= 0.0


class TestGradCheck:
    def test_random_small_model(self):
        model = mlp.init_model((8, 6, 6, 5, 5, 8), seed=0)
        rng = np.random.default_rng(3)
        x = rng.random(8)
        y = (rng.random(8) > 0.5).astype(float)
        err, violations = mlp.grad_check(model, x, y)
        assert violations == []
        assert err <= 1e-4

    def test_zero_model(self):
        err, violations = mlp.grad_check(zero_model(), np.ones(8) * 0.3, np.ones(8))
        assert violations == []
        assert err <= 1e-4


class TestTrain:
    def test_overfits_ten_records(self, small_records):
        model = mlp.init_model(seed=0)
        trained, curve = mlp.train(model, small_records, epochs=300, seed=0)
        assert curve[-1] < 0.01
        for r in small_records:
            assert mlp.predict(trained, r.src, r.tgt) in r.plans

    def test_deterministic_given_seed(self, small_records):
        model = mlp.init_model(seed=0)
        a, ca = mlp.train(model, small_records, epochs=30, seed=4)
        b, cb = mlp.train(model, small_records, epochs=30, seed=4)
        assert ca == cb
        assert all(np.array_equal(x, y) for x, y in zip(a.weights, b.weights))

    def test_empty_records_leave_model_unchanged(self):
        model = mlp.init_model(seed=0)
        trained, curve = mlp.train(model, [], epochs=10, seed=0)
        assert curve == []
        assert all(np.array_equal(a, b) for a, b in zip(model.weights, trained.weights))

    def test_input_model_not_mutated(self, small_records):
        model = mlp.init_model(seed=0)
        before = [w.copy() for w in model.weights]
        mlp.train(model, small_records, epochs=5, seed=0)
        assert all(np.array_equal(a, b) for a, b in zip(before, model.weights))

    def test_record_order_barely_matters(self, small_records):
        model = mlp.init_model(seed=0)
        _, ca = mlp.train(model, small_records, epochs=150, seed=0)
        _, cb = mlp.train(model, list(reversed(small_records)), epochs=150, seed=0)
        assert abs(ca[-1] - cb[-1]) / ca[-1] < 0.10


class TestPredict:
    def test_confident_encoding_round_trips(self, small_records):
        r = small_records[0]
        x = mlp.encode_pair(r.src, r.tgt)
        assert x.shape == (80,)

    def test_pair_encoding_layout(self):
        src, tgt = parse_config("R.G"), parse_config("B")
        x = mlp.encode_pair(src, tgt)
        from blockseq.model import config_bits

        assert np.array_equal(x[:40], config_bits(src).astype(float))
        assert np.array_equal(x[40:], config_bits(tgt).astype(float))


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        model = mlp.init_model((8, 6, 5, 8), seed=7)
        path = tmp_path / "model.bin"
        mlp.save_model(model, path)
        back = mlp.load_model(path)
        assert back.widths == model.widths
        assert all(np.array_equal(a, b) for a, b in zip(model.weights, back.weights))
        assert all(np.array_equal(a, b) for a, b in zip(model.biases, back.biases))

    def test_rejects_garbage(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"not a checkpoint")
        with pytest.raises(ValueError):
            mlp.load_model(path)
