"""The spatio-temporal graph attention predictor.

Two encoder branches run in parallel on an ``[l, n, 3]`` normalized history:

* temporal: ``FC1`` (3 -> d) then Transformer encoder block(s), attention over time;
* spatial: ``FC2`` (3 -> 3) then a multi-head GAT layer over fighters per time step.

Both emit ``[l, n, d]``; they are concatenated to ``[l, n, 2d]``, each
fighter's sequence is flattened and the ``FC3`` MLP decodes the next-step
displacement ``[n, 3]``. Multi-step forecasts slide the window forward.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .data import denormalize, normalize_window
from .layers import (
    GatLayerWeights,
    TransformerBlockWeights,
    gat_layer_forward,
    transformer_encoder_block,
)
from .tensor import ShapeError, Tensor, as_tensor, concat_axis, relu, swapaxes


class Variant(str, Enum):
    FULL = "full"
    TRANSFORMER = "transformer_only"
    GAT = "gat_only"

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, cls):
            return value
        aliases = {"transformer": cls.TRANSFORMER, "gat": cls.GAT}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            raise ValueError(f"unknown variant {value!r}; use full, transformer or gat") from None

    @property
    def uses_temporal(self) -> bool:
        return self is not Variant.GAT

    @property
    def uses_spatial(self) -> bool:
        return self is not Variant.TRANSFORMER


@dataclass(frozen=True)
class ModelConfig:
    history_len: int = 8
    d_model: int = 24
    heads: int = 4
    dropout: float = 0.1
    encoder_blocks: int = 1
    gat_heads: int = 4
    gat_dropout: float = 0.1
    d_ff: int = 96
    decoder_hidden: int = 64
    n_max: int = 8
    input_dim: int = 3

    def __post_init__(self):
        for name in ("history_len", "d_model", "heads", "encoder_blocks", "gat_heads", "d_ff",
                     "decoder_hidden", "n_max", "input_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"ModelConfig.{name} must be positive, got {getattr(self, name)}")
        if self.d_model % self.heads:
            raise ValueError(f"d_model {self.d_model} is not divisible by heads {self.heads}")
        if self.d_model % 2:
            raise ValueError(f"d_model {self.d_model} must be even for positional encoding")
        for name in ("dropout", "gat_dropout"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ValueError(f"ModelConfig.{name} must lie in [0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**d)

    def decoder_input(self, variant: Variant) -> int:
        per_step = 2 * self.d_model if variant is Variant.FULL else self.d_model
        return self.history_len * per_step


@dataclass
class ModelWeights:
    """All learnable tensors. Branch weights are ``None`` when the variant drops the branch."""

    fc3_w1: Tensor
    fc3_b1: Tensor
    fc3_w2: Tensor
    fc3_b2: Tensor
    fc1_w: Tensor | None = None
    fc1_b: Tensor | None = None
    blocks: list[TransformerBlockWeights] = field(default_factory=list)
    fc2_w: Tensor | None = None
    fc2_b: Tensor | None = None
    gat: GatLayerWeights | None = None

    def named(self) -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        if self.fc1_w is not None:
            out["fc1.w"], out["fc1.b"] = self.fc1_w, self.fc1_b
        for k, blk in enumerate(self.blocks):
            for name, t in blk.named().items():
                out[f"encoder.{k}.{name}"] = t
        if self.fc2_w is not None:
            out["fc2.w"], out["fc2.b"] = self.fc2_w, self.fc2_b
        if self.gat is not None:
            out["gat.w"], out["gat.a"] = self.gat.w, self.gat.a
        out["fc3.w1"], out["fc3.b1"] = self.fc3_w1, self.fc3_b1
        out["fc3.w2"], out["fc3.b2"] = self.fc3_w2, self.fc3_b2
        return out

    def parameters(self) -> list[Tensor]:
        return list(self.named().values())

    def zero_grad(self) -> None:
        for t in self.parameters():
            t.grad = None

    def requires_grad_(self, flag: bool = True) -> "ModelWeights":
        for t in self.parameters():
            t.requires_grad = flag
        return self

    @classmethod
    def from_named(cls, tensors: dict[str, Tensor]) -> "ModelWeights":
        """Rebuild from :meth:`named` output."""
        t = dict(tensors)
        try:
            w = cls(t.pop("fc3.w1"), t.pop("fc3.b1"), t.pop("fc3.w2"), t.pop("fc3.b2"))
        except KeyError as exc:
            raise KeyError(f"missing weight tensor {exc}") from None
        if "fc1.w" in t:
            w.fc1_w, w.fc1_b = t.pop("fc1.w"), t.pop("fc1.b")
        k = 0
        names = TransformerBlockWeights.__dataclass_fields__
        while f"encoder.{k}.wq" in t:
            w.blocks.append(TransformerBlockWeights(**{n: t.pop(f"encoder.{k}.{n}") for n in names}))
            k += 1
        if "fc2.w" in t:
            w.fc2_w, w.fc2_b = t.pop("fc2.w"), t.pop("fc2.b")
        if "gat.w" in t:
            w.gat = GatLayerWeights(t.pop("gat.w"), t.pop("gat.a"))
        if t:
            raise KeyError(f"unexpected weight tensors: {sorted(t)}")
        return w

    def copy(self) -> "ModelWeights":
        return ModelWeights.from_named({k: Tensor(v.data.copy()) for k, v in self.named().items()})


def _glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> Tensor:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-limit, limit, size=shape))


def init_weights(cfg: ModelConfig, variant=Variant.FULL, rng: np.random.Generator | int = 0) -> ModelWeights:
    """Glorot-uniform matrices, zero biases, unit layer-norm gains."""
    variant = Variant.parse(variant)
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    d, dh, din = cfg.d_model, cfg.d_model // cfg.heads, cfg.input_dim
    zeros = lambda *s: Tensor(np.zeros(s))  # noqa: E731

    w = ModelWeights(
        fc3_w1=_glorot(rng, (cfg.decoder_input(variant), cfg.decoder_hidden),
                       cfg.decoder_input(variant), cfg.decoder_hidden),
        fc3_b1=zeros(cfg.decoder_hidden),
        fc3_w2=_glorot(rng, (cfg.decoder_hidden, din), cfg.decoder_hidden, din),
        fc3_b2=zeros(din),
    )
    if variant.uses_temporal:
        w.fc1_w, w.fc1_b = _glorot(rng, (din, d), din, d), zeros(d)
        for _ in range(cfg.encoder_blocks):
            w.blocks.append(TransformerBlockWeights(
                wq=_glorot(rng, (cfg.heads, d, dh), d, dh),
                wk=_glorot(rng, (cfg.heads, d, dh), d, dh),
                wv=_glorot(rng, (cfg.heads, d, dh), d, dh),
                wo=_glorot(rng, (d, d), d, d),
                bo=zeros(d),
                w1=_glorot(rng, (d, cfg.d_ff), d, cfg.d_ff),
                b1=zeros(cfg.d_ff),
                w2=_glorot(rng, (cfg.d_ff, d), cfg.d_ff, d),
                b2=zeros(d),
                ln_gain=Tensor(np.ones(d)),
                ln_bias=zeros(d),
            ))
    if variant.uses_spatial:
        w.fc2_w, w.fc2_b = _glorot(rng, (din, din), din, din), zeros(din)
        w.gat = GatLayerWeights(
            w=_glorot(rng, (cfg.gat_heads, din, d), din, d),
            a=_glorot(rng, (cfg.gat_heads, 2 * d), 2 * d, 1),
        )
    return w


def count_parameters(w: ModelWeights) -> int:
    return int(sum(t.size for t in w.parameters()))


def _check_history(history: Tensor, cfg: ModelConfig) -> None:
    if history.ndim < 3 or history.shape[-3] != cfg.history_len or history.shape[-1] != cfg.input_dim:
        raise ShapeError(
            f"history shape {history.shape} does not match [..., {cfg.history_len}, n, {cfg.input_dim}]"
        )
    if history.shape[-2] < 1:
        raise ShapeError("history needs at least one fighter")


def encode(history, w: ModelWeights, cfg: ModelConfig, variant=Variant.FULL, train: bool = False,
           rng: np.random.Generator | None = None) -> dict[str, Tensor]:
    """Run the encoder branches; returns ``temporal``, ``spatial`` and ``fused`` features."""
    variant = Variant.parse(variant)
    history = as_tensor(history)
    _check_history(history, cfg)
    out: dict[str, Tensor] = {}
    parts = []
    if variant.uses_temporal:
        # embedding scaled by sqrt(d) before the positional encoding is added
        h = (history @ w.fc1_w + w.fc1_b) * float(np.sqrt(cfg.d_model))
        for k, blk in enumerate(w.blocks):
            h = transformer_encoder_block(h, blk, train, cfg.dropout, rng, add_pe=(k == 0))
        out["temporal"] = h
        parts.append(h)
    if variant.uses_spatial:
        g = gat_layer_forward(history @ w.fc2_w + w.fc2_b, w.gat, train, cfg.gat_dropout, rng)
        out["spatial"] = g
        parts.append(g)
    out["fused"] = concat_axis(parts, -1)
    return out


def predict_step(history, w: ModelWeights, cfg: ModelConfig, variant=Variant.FULL, train: bool = False,
                 rng: np.random.Generator | None = None) -> Tensor:
    """Next-step displacement ``[..., n, 3]`` from a normalized history ``[..., l, n, 3]``."""
    fused = encode(history, w, cfg, variant, train, rng)["fused"]
    per_fighter = swapaxes(fused, -3, -2)  # [..., n, l, F]
    flat = per_fighter.reshape(per_fighter.shape[:-2] + (per_fighter.shape[-2] * per_fighter.shape[-1],))
    if flat.shape[-1] != w.fc3_w1.shape[0]:
        raise ShapeError(f"decoder expects {w.fc3_w1.shape[0]} inputs, got {flat.shape[-1]}")
    hidden = relu(flat @ w.fc3_w1 + w.fc3_b1)
    return hidden @ w.fc3_w2 + w.fc3_b2


def rollout(history_km, horizon: int, w: ModelWeights, cfg: ModelConfig, variant=Variant.FULL,
            scale: float = 1.0) -> np.ndarray:
    """Sliding-window forecast of ``horizon`` absolute positions ``[..., H, n, 3]`` km.

    Each predicted point is appended to the window and the oldest point dropped.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    window = np.array(history_km, dtype=np.float64)
    if window.ndim < 3 or window.shape[-3] != cfg.history_len:
        raise ShapeError(f"history shape {window.shape} does not match [..., {cfg.history_len}, n, 3]")
    preds = []
    for _ in range(horizon):
        hist, norm = normalize_window(window, scale)
        step = denormalize(predict_step(hist, w, cfg, variant).data, norm)
        preds.append(step)
        window = np.concatenate([window[..., 1:, :, :], step[..., None, :, :]], axis=-3)
    return np.stack(preds, axis=-3)


def predict_next_km(history_km, w: ModelWeights, cfg: ModelConfig, variant=Variant.FULL,
                    scale: float = 1.0) -> np.ndarray:
    """Single de-normalized next position ``[..., n, 3]`` km."""
    return rollout(history_km, 1, w, cfg, variant, scale)[..., 0, :, :]


__all__ = [
    "ModelConfig",
    "ModelWeights",
    "Variant",
    "count_parameters",
    "encode",
    "init_weights",
    "predict_next_km",
    "predict_step",
    "rollout",
]
