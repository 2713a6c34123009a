import math

import numpy as np
import pytest

from stgat.checkpoint import (
    CheckpointError,
    dumps,
    load_checkpoint,
    loads,
    save_checkpoint,
)
from stgat.data import GeneratorSpec, generate_engagement, stack_windows, windowize
from stgat.model import ModelConfig, init_weights, predict_step
from stgat.tensor import Tape, Tensor
from stgat.training import (
    AdamState,
    NumericalError,
    TrainConfig,
    TrainReport,
    adam_step,
    clip_grad_norm,
    gradient_step,
    make_batches,
    mse_loss,
    train,
)

CFG = ModelConfig()


@pytest.fixture(scope="module")
def windows():
    e = generate_engagement(GeneratorSpec(2, 2, duration_s=30, seed=3, noise_sigma=0.002))
    return windowize(e, 8)


class TestLoss:
    def test_identity(self, rng):
        x = rng.normal(size=(2, 3))
        assert mse_loss(x, x).item() == 0.0

    def test_hand_value(self):
        pred = Tensor([[3.0, 4.0, 0.0]])
        assert mse_loss(pred, np.zeros((1, 3))).item() == pytest.approx(25 / 3, rel=1e-15)

    def test_mask_removes_fighter(self, rng):
        target = rng.normal(size=(3, 3))
        pred = target.copy()
        pred[1] += 100.0
        pred[0] += [3.0, 4.0, 0.0]
        assert mse_loss(pred, target, mask=[1, 0, 0]).item() == pytest.approx(25 / 3, abs=1e-12)
        assert mse_loss(pred, target, mask=[0, 0, 1]).item() == 0.0
        with pytest.raises(ValueError):
            mse_loss(pred, target, mask=[0, 0, 0])

    def test_batched_mask_matches_loop(self, rng):
        p, t = rng.normal(size=(4, 3, 3)), rng.normal(size=(4, 3, 3))
        m = np.array([1.0, 0.0, 1.0])
        ref = np.mean([((p[b, i] - t[b, i]) ** 2).mean() for b in range(4) for i in (0, 2)])
        assert mse_loss(p, t, m).item() == pytest.approx(ref, abs=1e-14)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            mse_loss(np.zeros((2, 3)), np.zeros((3, 3)))


class TestAdam:
    def test_zero_gradient_fixed_point(self):
        w = Tensor([1.5, -2.0])
        w.grad = np.zeros(2)
        adam_step({"w": w}, AdamState(), TrainConfig())
        assert w.data.tolist() == [1.5, -2.0]

    def test_first_step_magnitude(self):
        cfg = TrainConfig(learning_rate=1e-3)
        w = Tensor([1.0, 1.0, 1.0])
        g = np.array([0.5, -3.0, 1e-2])
        w.grad = g.copy()
        adam_step({"w": w}, AdamState(), cfg)
        delta = w.data - 1.0
        # bias-corrected moments at t=1 are g and g^2, so the step is lr * g / (|g| + eps)
        assert np.allclose(delta, -cfg.learning_rate * g / (np.abs(g) + cfg.eps), atol=1e-15)
        assert np.all(np.sign(delta) == -np.sign(g))

    def test_scalar_quadratic_converges_monotonically(self):
        w = Tensor([1.0])
        state, cfg = AdamState(), TrainConfig()
        history = [abs(w.data[0])]
        for _ in range(100):
            w.grad = 2.0 * w.data
            adam_step({"w": w}, state, cfg)
            history.append(abs(w.data[0]))
        assert all(b < a for a, b in zip(history, history[1:]))
        assert state.step == 100

    def test_nan_gradient_names_tensor(self):
        w = Tensor([1.0])
        w.grad = np.array([np.nan])
        with pytest.raises(NumericalError, match="fc9"):
            adam_step({"fc9": w}, AdamState(), TrainConfig())
        assert w.data.tolist() == [1.0]

    def test_skips_tensors_without_grad(self):
        a, b = Tensor([1.0]), Tensor([2.0])
        a.grad = np.array([1.0])
        adam_step({"a": a, "b": b}, AdamState(), TrainConfig())
        assert b.data.tolist() == [2.0] and a.data[0] < 1.0


def test_clip_grad_norm():
    a, b = Tensor([0.0, 0.0]), Tensor([0.0])
    a.grad, b.grad = np.array([3.0, 0.0]), np.array([4.0])
    assert clip_grad_norm([a, b], 1.0) == pytest.approx(5.0)
    assert math.sqrt((a.grad ** 2).sum() + (b.grad ** 2).sum()) == pytest.approx(1.0, abs=1e-9)
    a.grad = np.array([0.3, 0.0])
    b.grad = np.array([0.4])
    clip_grad_norm([a, b], 1.0)
    assert a.grad.tolist() == [0.3, 0.0]


def test_batches_never_mix_fighter_counts(windows):
    other = windowize(generate_engagement(GeneratorSpec(1, 1, duration_s=20, seed=1)), 8)
    data = windows + other
    batches = make_batches(data, 7, np.random.default_rng(0))
    assert sorted(int(k) for b in batches for k in b) == list(range(len(data)))
    for b in batches:
        assert len({data[k].history.shape[1] for k in b}) == 1
        assert len(b) <= 7


def test_full_batch_gradient_is_mean_of_sample_gradients(windows):
    w = init_weights(CFG, "full", 0)
    subset = windows[:6]
    hist, tgt = stack_windows(subset)
    gradient_step(w, hist, tgt, CFG, "full", train=False)
    full = {k: t.grad.copy() for k, t in w.named().items()}
    acc = {k: np.zeros_like(v) for k, v in full.items()}
    for s in subset:
        gradient_step(w, s.history[None], s.target[None], CFG, "full", train=False)
        for k, t in w.named().items():
            acc[k] += t.grad / len(subset)
    assert max(np.max(np.abs(full[k] - acc[k])) for k in full) < 1e-9


class TestTrain:
    def test_epochs_zero_returns_initial(self, windows):
        w, rep = train(windows, TrainConfig(epochs=0, seed=4), CFG)
        ref = init_weights(CFG, "full", np.random.default_rng([4, 1]))
        assert all(np.array_equal(a.data, b.data) for a, b in zip(w.parameters(), ref.parameters()))
        assert rep.epochs == [] and rep.step_losses == []

    def test_deterministic_and_learning(self, windows):
        cfg = TrainConfig(epochs=2, seed=1)
        w1, r1 = train(windows, cfg, CFG)
        w2, r2 = train(windows, cfg, CFG)
        assert r1 == r2 and r1.to_jsonl() == r2.to_jsonl()
        assert all(np.array_equal(a.data, b.data) for a, b in zip(w1.parameters(), w2.parameters()))
        assert np.mean(r1.step_losses[-3:]) < r1.step_losses[0]
        assert all(math.isfinite(v) and v >= 0 for v in r1.step_losses)
        w3, _ = train(windows, TrainConfig(epochs=2, seed=2), CFG)
        assert not np.array_equal(w1.fc3_w1.data, w3.fc3_w1.data)

    def test_max_steps_and_validation(self, windows):
        e = generate_engagement(GeneratorSpec(2, 2, duration_s=10, seed=9))
        _, rep = train(windows, TrainConfig(epochs=50, max_steps=3, batch_size=8), CFG, "gat", validation=[e])
        assert len(rep.step_losses) == 3 and rep.epochs[-1].steps == 3
        assert rep.epochs[-1].val_ade_km > 0
        assert TrainReport.from_jsonl(rep.to_jsonl()).epochs == rep.epochs
        assert "wall_time_s" in rep.to_jsonl(timing=True) and "wall_time_s" not in rep.to_jsonl()

    def test_errors(self, windows):
        with pytest.raises(ValueError):
            train([], TrainConfig(), CFG)
        with pytest.raises(ValueError):
            train(windows, TrainConfig(), ModelConfig(history_len=6))
        with pytest.raises(NumericalError), np.errstate(over="ignore", invalid="ignore"):
            train(windows, TrainConfig(learning_rate=1e300, epochs=1), CFG)

    @pytest.mark.parametrize("kw", [{"learning_rate": 0}, {"beta1": 1.0}, {"beta2": 0.0}, {"batch_size": 0},
                                    {"grad_clip": -1.0}])
    def test_config_validation(self, kw):
        with pytest.raises(ValueError):
            TrainConfig(**kw)


class TestCheckpoint:
    def test_round_trip_bytes_and_predictions(self, tmp_path, rng):
        w = init_weights(CFG, "full", 7)
        for t in w.parameters():
            t.data = t.data + rng.normal(scale=1e-3, size=t.shape) / 3.0  # non-representable decimals
        save_checkpoint(tmp_path / "a.json", w, CFG, "full", seed=7, train_config={"epochs": 3})
        ck = load_checkpoint(tmp_path / "a.json")
        save_checkpoint(tmp_path / "b.json", ck.weights, ck.model_config, ck.variant, ck.seed, ck.train_config)
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        x = rng.normal(size=(8, 3, 3))
        assert np.array_equal(predict_step(x, w, CFG).data, predict_step(x, ck.weights, CFG).data)
        assert ck.seed == 7 and ck.train_config == {"epochs": 3}

    @pytest.mark.parametrize("variant", ["transformer", "gat"])
    def test_variants(self, variant):
        w = init_weights(CFG, variant, 0)
        ck = loads(_dump(w, variant))
        assert ck.variant.value.startswith(variant)
        assert list(ck.weights.named()) == list(w.named())

    def test_truncated(self, tmp_path):
        text = _dump(init_weights(CFG, "full", 0), "full")
        (tmp_path / "t.json").write_text(text[: len(text) // 2])
        with pytest.raises(CheckpointError, match="truncated"):
            load_checkpoint(tmp_path / "t.json")

    def test_tampered(self):
        text = _dump(init_weights(CFG, "full", 0), "full")
        with pytest.raises(CheckpointError, match="checksum"):
            loads(text.replace('"seed":0', '"seed":1'))

    def test_missing_file_and_wrong_format(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "nope.json")
        with pytest.raises(CheckpointError):
            loads('{"format": "other"}')

    def test_config_weight_mismatch(self):
        import json

        from stgat.checkpoint import _digest

        payload = json.loads(_dump(init_weights(CFG, "full", 0), "full"))
        payload.pop("sha256")
        payload["model_config"]["history_len"] = 9
        payload["sha256"] = _digest(payload)
        with pytest.raises(CheckpointError, match="shapes"):
            loads(json.dumps(payload))

    def test_non_finite_rejected(self):
        w = init_weights(CFG, "gat", 0)
        w.fc3_b2.data[0] = np.nan
        with pytest.raises(CheckpointError):
            _dump(w, "gat")


def _dump(w, variant):
    from stgat.checkpoint import Checkpoint
    from stgat.model import Variant

    return dumps(Checkpoint(w, CFG, Variant.parse(variant), 0, {}))
