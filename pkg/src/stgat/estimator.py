"""scikit-learn style wrappers around the predictor and the preprocessing steps.

    >>> from stgat import STGATRegressor, LowPassFilter
    >>> from sklearn.pipeline import make_pipeline
    >>> model = make_pipeline(LowPassFilter(window=5), STGATRegressor(epochs=2))
    >>> model.fit(engagements)                       # doctest: +SKIP
    >>> model[-1].predict(histories_km)              # doctest: +SKIP
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .data import Engagement, low_pass_filter, windowize
from .metrics import evaluate_model
from .model import ModelConfig, Variant, rollout
from .training import TrainConfig, train


def check_engagements(X) -> list[Engagement]:
    """Accept one engagement, a list of engagements, or raw ``[T, n, 3]`` km arrays."""
    if isinstance(X, Engagement):
        return [X]
    if isinstance(X, np.ndarray):
        X = [X] if X.ndim == 3 else list(X)
    out = []
    for k, item in enumerate(X):
        if isinstance(item, Engagement):
            out.append(item)
            continue
        pos = np.asarray(item, dtype=np.float64)
        if pos.ndim != 3 or pos.shape[-1] != 3:
            raise ValueError(f"trajectory {k} must be [T, n, 3], got {pos.shape}")
        T, n, _ = pos.shape
        out.append(Engagement(f"array-{k}", n, 0, 1.0, np.arange(T, dtype=np.float64), pos,
                              np.zeros_like(pos), np.zeros((T, n))))
    if not out:
        raise ValueError("no trajectories given")
    return out


def check_history(X, history_len: int) -> np.ndarray:
    """Validate ``[l, n, 3]`` or ``[B, l, n, 3]`` absolute-km histories."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim not in (3, 4) or X.shape[-3] != history_len or X.shape[-1] != 3:
        raise ValueError(f"histories must be [B, {history_len}, n, 3] or [{history_len}, n, 3], got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("histories contain NaN or Inf")
    return X


class LowPassFilter(BaseEstimator, TransformerMixin):
    """Centred moving-average smoothing of engagement positions (stateless)."""

    def __init__(self, window: int = 5):
        self.window = window

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return [low_pass_filter(e, self.window) for e in check_engagements(X)]


class STGATRegressor(BaseEstimator):
    """Spatio-temporal graph attention next-position regressor.

    ``fit`` takes engagements (or ``[T, n, 3]`` km arrays) and trains on all
    sliding windows; ``predict`` maps km histories to next positions in km.
    """

    def __init__(self, variant="full", history_len=8, d_model=24, heads=4, dropout=0.1, encoder_blocks=1,
                 gat_heads=4, gat_dropout=0.1, d_ff=96, decoder_hidden=64, learning_rate=1e-3, batch_size=32,
                 epochs=10, max_steps=None, grad_clip=5.0, scale=1.0, random_state=0):
        self.variant = variant
        self.history_len = history_len
        self.d_model = d_model
        self.heads = heads
        self.dropout = dropout
        self.encoder_blocks = encoder_blocks
        self.gat_heads = gat_heads
        self.gat_dropout = gat_dropout
        self.d_ff = d_ff
        self.decoder_hidden = decoder_hidden
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.max_steps = max_steps
        self.grad_clip = grad_clip
        self.scale = scale
        self.random_state = random_state

    def _configs(self) -> tuple[ModelConfig, TrainConfig]:
        mcfg = ModelConfig(history_len=self.history_len, d_model=self.d_model, heads=self.heads,
                           dropout=self.dropout, encoder_blocks=self.encoder_blocks, gat_heads=self.gat_heads,
                           gat_dropout=self.gat_dropout, d_ff=self.d_ff, decoder_hidden=self.decoder_hidden)
        tcfg = TrainConfig(learning_rate=self.learning_rate, batch_size=self.batch_size, epochs=self.epochs,
                           seed=self.random_state, grad_clip=self.grad_clip, max_steps=self.max_steps,
                           scale=self.scale)
        return mcfg, tcfg

    def fit(self, X, y=None, validation: Sequence[Engagement] | None = None):
        engagements = check_engagements(X)
        mcfg, tcfg = self._configs()
        samples = [s for e in engagements for s in windowize(e, mcfg.history_len, self.scale)]
        self.variant_ = Variant.parse(self.variant)
        self.model_config_ = mcfg
        self.train_config_ = tcfg
        self.weights_, self.report_ = train(samples, tcfg, mcfg, self.variant_, validation)
        self.n_features_in_ = 3
        return self

    def predict(self, X) -> np.ndarray:
        """Next absolute position ``[B, n, 3]`` (or ``[n, 3]``) for km histories."""
        check_is_fitted(self, "weights_")
        X = check_history(X, self.model_config_.history_len)
        return rollout(X, 1, self.weights_, self.model_config_, self.variant_, self.scale)[..., 0, :, :]

    def forecast(self, X, horizon: int = 8) -> np.ndarray:
        """Sliding-window forecast ``[B, H, n, 3]`` (or ``[H, n, 3]``) in km."""
        check_is_fitted(self, "weights_")
        X = check_history(X, self.model_config_.history_len)
        return rollout(X, horizon, self.weights_, self.model_config_, self.variant_, self.scale)

    def evaluate(self, X, horizon: int = 1, blue_only: bool = False):
        check_is_fitted(self, "weights_")
        return evaluate_model(self.weights_, self.model_config_, self.variant_, check_engagements(X), horizon,
                              self.scale, blue_only=blue_only)

    def score(self, X, y=None) -> float:
        """Negative single-step ADE (km) over every window, so that higher is better."""
        return -self.evaluate(X, 1).group("all").ade_km
