"""Spatio-temporal graph attention trajectory prediction for multi-fighter engagements."""

__version__ = "0.1.0"

from .data import Engagement, GeneratorSpec, generate_engagement, low_pass_filter, read_csv, windowize  # noqa: E402
from .estimator import LowPassFilter, STGATRegressor  # noqa: E402
from .metrics import ade, fde  # noqa: E402
from .model import ModelConfig, Variant, init_weights, predict_step, rollout  # noqa: E402
from .tensor import Tape, Tensor  # noqa: E402
from .training import TrainConfig, train  # noqa: E402

__all__ = [
    "Engagement", "GeneratorSpec", "generate_engagement", "low_pass_filter", "read_csv", "windowize",
    "LowPassFilter", "STGATRegressor", "ade", "fde", "ModelConfig", "Variant", "init_weights",
    "predict_step", "rollout", "Tape", "Tensor", "TrainConfig", "train",
]
