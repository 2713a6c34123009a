"""Teacher-forced single-step training with Adam."""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .data import Engagement, WindowSample
from .metrics import evaluate_model
from .model import ModelConfig, ModelWeights, Variant, init_weights, predict_step
from .tensor import Tape, Tensor, as_tensor


class NumericalError(FloatingPointError):
    """A gradient, weight or loss became NaN/Inf."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    epochs: int = 10
    seed: int = 0
    grad_clip: float | None = 5.0
    max_steps: int | None = None
    scale: float = 1.0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")
        if self.grad_clip is not None and not self.grad_clip > 0:
            raise ValueError("grad_clip must be positive or None")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown train config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class EpochRecord:
    epoch: int
    steps: int
    train_loss: float
    val_ade_km: float | None = None
    val_fde_km: float | None = None
    wall_time_s: float = field(default=0.0, compare=False)


@dataclass
class TrainReport:
    epochs: list[EpochRecord] = field(default_factory=list)
    step_losses: list[float] = field(default_factory=list)
    wall_time_s: float = field(default=0.0, compare=False)

    def to_jsonl(self, timing: bool = False) -> str:
        """One JSON record per epoch. Timing is off by default so reruns are byte-identical."""
        lines = []
        for rec in self.epochs:
            d = asdict(rec)
            if not timing:
                d.pop("wall_time_s")
            lines.append(json.dumps(d, sort_keys=True))
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_jsonl(cls, text: str) -> "TrainReport":
        return cls([EpochRecord(**json.loads(line)) for line in text.splitlines() if line.strip()])


def mse_loss(pred, target, mask=None) -> Tensor:
    """Mean squared error over (batch,) fighters and axes; ``mask`` selects fighters."""
    pred, target = as_tensor(pred), as_tensor(target)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: pred {pred.shape} vs target {target.shape}")
    diff = pred - target
    if mask is None:
        return (diff * diff).mean()
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape != (pred.shape[-2],):
        raise ValueError(f"mask must have one entry per fighter, got {mask.shape}")
    if not mask.any():
        raise ValueError("fighter mask is empty")
    weight = mask[:, None] / (mask.sum() * pred.shape[-1] * (pred.size // (pred.shape[-2] * pred.shape[-1])))
    return (diff * diff * Tensor(weight)).sum()


@dataclass
class AdamState:
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(named: dict[str, Tensor], state: AdamState, cfg: TrainConfig) -> AdamState:
    """In-place bias-corrected Adam update of every tensor with a gradient."""
    for name, t in named.items():
        if t.grad is not None and not np.all(np.isfinite(t.grad)):
            raise NumericalError(f"non-finite gradient in {name}")
    state.step += 1
    b1, b2 = cfg.beta1, cfg.beta2
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    for name, t in named.items():
        g = t.grad
        if g is None:
            continue
        m = state.m.get(name)
        v = state.v.get(name)
        m = (1 - b1) * g if m is None else b1 * m + (1 - b1) * g
        v = (1 - b2) * g * g if v is None else b2 * v + (1 - b2) * g * g
        state.m[name], state.v[name] = m, v
        t.data = t.data - cfg.learning_rate * (m / c1) / (np.sqrt(v / c2) + cfg.eps)
        if not np.all(np.isfinite(t.data)):
            raise NumericalError(f"non-finite weights in {name} after step {state.step}")
    return state


def clip_grad_norm(tensors: Sequence[Tensor], max_norm: float) -> float:
    total = math.sqrt(sum(float((t.grad * t.grad).sum()) for t in tensors if t.grad is not None))
    if total > max_norm:
        scale = max_norm / (total + 1e-12)
        for t in tensors:
            if t.grad is not None:
                t.grad = t.grad * scale
    return total


def make_batches(dataset: Sequence[WindowSample], batch_size: int, rng: np.random.Generator):
    """Shuffled batches; samples with different fighter counts never share a batch."""
    groups: dict[int, list[int]] = {}
    for k, s in enumerate(dataset):
        groups.setdefault(s.history.shape[1], []).append(k)
    batches = []
    for n in sorted(groups):
        idx = np.array(groups[n])[rng.permutation(len(groups[n]))]
        batches.extend(idx[k:k + batch_size] for k in range(0, len(idx), batch_size))
    order = rng.permutation(len(batches))
    return [batches[k] for k in order]


def gradient_step(weights: ModelWeights, history, target, mcfg: ModelConfig, variant, train: bool = True,
                  rng: np.random.Generator | None = None, mask=None) -> float:
    """Forward + backward on one batch; leaves gradients on the weights and returns the loss."""
    weights.zero_grad()
    weights.requires_grad_(True)
    with Tape() as tape:
        loss = mse_loss(predict_step(history, weights, mcfg, variant, train, rng), target, mask)
    tape.backward(loss)
    value = loss.item()
    if not math.isfinite(value):
        raise NumericalError("training loss is not finite")
    return value


def train(dataset: Sequence[WindowSample], cfg: TrainConfig = TrainConfig(), mcfg: ModelConfig = ModelConfig(),
          variant=Variant.FULL, validation: Sequence[Engagement] | None = None,
          weights: ModelWeights | None = None) -> tuple[ModelWeights, TrainReport]:
    """Train on windowed samples; deterministic for a fixed ``cfg.seed``.

    ``validation`` engagements, when given, are scored with single-step ADE/FDE
    after every epoch. ``cfg.max_steps`` stops training early at a step budget.
    """
    variant = Variant.parse(variant)
    if not dataset:
        raise ValueError("training dataset is empty")
    l = dataset[0].history.shape[0]
    if l != mcfg.history_len:
        raise ValueError(f"windows have history length {l}, model expects {mcfg.history_len}")
    rng = np.random.default_rng(cfg.seed)
    if weights is None:
        weights = init_weights(mcfg, variant, np.random.default_rng([cfg.seed, 1]))
    report = TrainReport()
    state = AdamState()
    started = time.perf_counter()
    params = weights.named()
    stop = False
    for epoch in range(cfg.epochs):
        t0 = time.perf_counter()
        total, count = 0.0, 0
        for idx in make_batches(dataset, cfg.batch_size, rng):
            hist = np.stack([dataset[k].history for k in idx])
            tgt = np.stack([dataset[k].target for k in idx])
            value = gradient_step(weights, hist, tgt, mcfg, variant, True, rng)
            if cfg.grad_clip is not None:
                clip_grad_norm(params.values(), cfg.grad_clip)
            adam_step(params, state, cfg)
            report.step_losses.append(value)
            total += value * len(idx)
            count += len(idx)
            if cfg.max_steps is not None and state.step >= cfg.max_steps:
                stop = True
                break
        rec = EpochRecord(epoch, state.step, total / max(count, 1))
        if validation:
            m = evaluate_model(weights, mcfg, variant, validation, 1, cfg.scale).group("all")
            rec.val_ade_km, rec.val_fde_km = m.ade_km, m.fde_km
        rec.wall_time_s = time.perf_counter() - t0
        report.epochs.append(rec)
        if stop:
            break
    weights.requires_grad_(False)
    weights.zero_grad()
    report.wall_time_s = time.perf_counter() - started
    return weights, report
