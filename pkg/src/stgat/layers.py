"""Encoder layers: sinusoidal positional encoding, temporal multi-head
self-attention, position-wise feed-forward, the Transformer encoder block and
the multi-head graph attention (GAT) layer.

All layers accept arbitrary leading batch dimensions in front of the
``[l, n, features]`` block (time steps, fighters, features).
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .tensor import (
    LEAKY_SLOPE,
    ShapeError,
    Tensor,
    as_tensor,
    dropout,
    layer_norm,
    leaky_relu,
    permute_last,
    relu,
    sigmoid,
    softmax_axis,
    swapaxes,
)


@dataclass
class TransformerBlockWeights:
    """Weights of one encoder block.

    ``wq``, ``wk`` and ``wv`` are stored per head with shape ``[heads, d, d // heads]``.
    """

    wq: Tensor
    wk: Tensor
    wv: Tensor
    wo: Tensor
    bo: Tensor
    w1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor
    ln_gain: Tensor
    ln_bias: Tensor

    def __post_init__(self):
        heads, d, dh = self.wq.shape
        if d != heads * dh:
            raise ShapeError(f"model width {d} is not divisible by {heads} heads")
        for name in ("wk", "wv"):
            if getattr(self, name).shape != self.wq.shape:
                raise ShapeError(f"{name} shape {getattr(self, name).shape} != wq shape {self.wq.shape}")

    @property
    def heads(self) -> int:
        return self.wq.shape[0]

    @property
    def width(self) -> int:
        return self.wq.shape[1]

    def named(self) -> dict[str, Tensor]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class GatHead:
    """One attention head: projection ``w`` [in, d] and score vector ``a`` [2d]."""

    w: Tensor
    a: Tensor


@dataclass
class GatLayerWeights:
    """Per-head projections ``w`` [K, in, d] and attention vectors ``a`` [K, 2d]."""

    w: Tensor
    a: Tensor

    def __post_init__(self):
        k, _, d = self.w.shape
        if self.a.shape != (k, 2 * d):
            raise ShapeError(f"attention vectors {self.a.shape} do not match projections {self.w.shape}")

    @property
    def heads(self) -> int:
        return self.w.shape[0]

    def head(self, k: int) -> GatHead:
        return GatHead(self.w[k], self.a[k])

    def named(self) -> dict[str, Tensor]:
        return {"w": self.w, "a": self.a}


def positional_encoding(length: int, width: int) -> Tensor:
    """Sinusoidal table ``[length, width]``: sin on even columns, cos on odd."""
    if length < 1:
        raise ValueError(f"sequence length must be >= 1, got {length}")
    if width % 2:
        raise ValueError(f"positional encoding width must be even, got {width}")
    t = np.arange(length, dtype=np.float64)[:, None]
    freq = 10000.0 ** (np.arange(0, width, 2, dtype=np.float64) / width)
    pe = np.empty((length, width))
    pe[:, 0::2] = np.sin(t / freq)
    pe[:, 1::2] = np.cos(t / freq)
    return Tensor(pe)


def multi_head_self_attention(
    x: Tensor,
    w: TransformerBlockWeights,
    train: bool = False,
    rate: float = 0.0,
    rng: np.random.Generator | None = None,
    return_attention: bool = False,
):
    """Self-attention over the time axis, independently for each fighter.

    ``x`` is ``[..., l, n, d]``; the result has the same shape. With
    ``return_attention`` the softmax weights ``[..., n, heads, l, l]`` are
    returned as a second value.
    """
    if x.shape[-1] != w.width:
        raise ShapeError(f"attention input width {x.shape[-1]} != weight width {w.width}")
    d, heads = w.width, w.heads
    dh = d // heads

    def project(weight):
        # [H, d, dh] -> [d, H*dh] so every head comes out of one GEMM
        q = x @ permute_last(weight, (1, 0, 2)).reshape((d, d))
        q = q.reshape(q.shape[:-1] + (heads, dh))
        return permute_last(q, (1, 2, 0, 3))  # [..., n, H, l, dh]

    q, k, v = project(w.wq), project(w.wk), project(w.wv)
    scores = (q @ swapaxes(k, -1, -2)) * (1.0 / np.sqrt(dh))
    attn = softmax_axis(scores, -1)
    ctx = permute_last(attn @ v, (2, 0, 1, 3))  # [..., l, n, H, dh]
    ctx = ctx.reshape(ctx.shape[:-2] + (d,))
    out = ctx @ w.wo + w.bo
    out = dropout(out, rate, train, rng)
    return (out, attn) if return_attention else out


def feed_forward(
    x: Tensor,
    w: TransformerBlockWeights,
    train: bool = False,
    rate: float = 0.0,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Position-wise ``Linear -> ReLU -> Linear`` with output dropout."""
    hidden = relu(x @ w.w1 + w.b1)
    return dropout(hidden @ w.w2 + w.b2, rate, train, rng)


def transformer_encoder_block(
    x: Tensor,
    w: TransformerBlockWeights,
    train: bool = False,
    rate: float = 0.0,
    rng: np.random.Generator | None = None,
    add_pe: bool = True,
) -> Tensor:
    """PE -> MHA (+residual) -> FFN (+residual) -> LayerNorm.

    Stacked blocks after the first are called with ``add_pe=False``.
    """
    l, d = x.shape[-3], x.shape[-1]
    h1 = x + positional_encoding(l, d).reshape((l, 1, d)) if add_pe else x
    h2 = h1 + multi_head_self_attention(h1, w, train, rate, rng)
    h3 = h2 + feed_forward(h2, w, train, rate, rng)
    return layer_norm(h3, w.ln_gain, w.ln_bias)


def gat_attention_coefficients(h: Tensor, head: GatHead, slope: float = LEAKY_SLOPE) -> Tensor:
    """Attention of every fighter over every fighter (self included), per time step.

    ``h`` is ``[..., l, n, in]``; returns ``[..., l, n, n]`` whose rows sum to 1.
    """
    h = as_tensor(h)
    if h.shape[-2] == 0:
        raise ValueError("graph attention needs at least one fighter")
    d = head.w.shape[-1]
    z = h @ head.w  # [..., l, n, d]
    src = z @ head.a[:d].reshape((d, 1))
    dst = z @ head.a[d:].reshape((d, 1))
    # a^T [z_i || z_j] splits into a source term for i and a target term for j
    e = leaky_relu(src + swapaxes(dst, -1, -2), slope)
    return softmax_axis(e, -1)


def gat_layer_forward(
    h: Tensor,
    w: GatLayerWeights,
    train: bool = False,
    rate: float = 0.0,
    rng: np.random.Generator | None = None,
    slope: float = LEAKY_SLOPE,
    return_attention: bool = False,
):
    """Multi-head graph attention, heads fused by mean then sigmoid.

    ``h`` is ``[..., l, n, in]``; the output is ``[..., l, n, d]`` in (0, 1).
    With ``return_attention`` also returns coefficients ``[..., l, K, n, n]``.
    """
    h = as_tensor(h)
    if h.shape[-2] == 0:
        raise ValueError("graph attention needs at least one fighter")
    if h.shape[-1] != w.w.shape[1]:
        raise ShapeError(f"GAT input width {h.shape[-1]} != projection input {w.w.shape[1]}")
    k, din, d = w.w.shape
    z = h @ permute_last(w.w, (1, 0, 2)).reshape((din, k * d))
    z = permute_last(z.reshape(z.shape[:-1] + (k, d)), (1, 0, 2))  # [..., l, K, n, d]
    src = (z * w.a[:, :d].reshape((k, 1, d))).sum(axis=-1, keepdims=True)
    dst = (z * w.a[:, d:].reshape((k, 1, d))).sum(axis=-1, keepdims=True)
    e = leaky_relu(src + swapaxes(dst, -1, -2), slope)
    alpha = softmax_axis(e, -1)  # [..., l, K, n, n]
    agg = dropout(alpha, rate, train, rng) @ z
    out = sigmoid(agg.mean(axis=-3))
    return (out, alpha) if return_attention else out
