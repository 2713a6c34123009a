"""Self-describing JSON checkpoints.

Float values are written with ``repr`` so a save/load round trip is bit-exact,
and a SHA-256 over the canonical payload detects truncation or edits.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import ModelConfig, ModelWeights, Variant, init_weights
from .tensor import Tensor

FORMAT = "stgat-checkpoint"
VERSION = 1


class CheckpointError(ValueError):
    """Unreadable, corrupt or inconsistent checkpoint."""


@dataclass
class Checkpoint:
    weights: ModelWeights
    model_config: ModelConfig
    variant: Variant
    seed: int = 0
    train_config: dict = field(default_factory=dict)


def _payload(ckpt: Checkpoint) -> dict:
    return {
        "format": FORMAT,
        "version": VERSION,
        "variant": ckpt.variant.value,
        "seed": int(ckpt.seed),
        "model_config": ckpt.model_config.to_dict(),
        "train_config": ckpt.train_config,
        "tensors": [
            {"name": name, "shape": list(t.shape), "values": t.data.reshape(-1).tolist()}
            for name, t in ckpt.weights.named().items()
        ],
    }


def _digest(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def dumps(ckpt: Checkpoint) -> str:
    payload = _payload(ckpt)
    for entry in payload["tensors"]:
        if not all(np.isfinite(entry["values"])):
            raise CheckpointError(f"tensor {entry['name']} holds non-finite values")
    payload["sha256"] = _digest(payload)
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_checkpoint(path: str | Path, weights: ModelWeights, model_config: ModelConfig, variant=Variant.FULL,
                    seed: int = 0, train_config: dict | None = None) -> None:
    ckpt = Checkpoint(weights, model_config, Variant.parse(variant), seed, dict(train_config or {}))
    atomic_write(path, dumps(ckpt))


def loads(text: str) -> Checkpoint:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"checkpoint is not valid JSON (truncated?): {exc}") from None
    if not isinstance(payload, dict) or payload.get("format") != FORMAT:
        raise CheckpointError("not an stgat checkpoint")
    if payload.get("version") != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {payload.get('version')!r}")
    stored = payload.pop("sha256", None)
    if stored != _digest(payload):
        raise CheckpointError("checkpoint checksum mismatch; file is corrupt or was edited")
    try:
        cfg = ModelConfig.from_dict(payload["model_config"])
        variant = Variant.parse(payload["variant"])
        tensors = {}
        for entry in payload["tensors"]:
            values = np.array(entry["values"], dtype=np.float64)
            tensors[entry["name"]] = Tensor(values.reshape(entry["shape"]))
        weights = ModelWeights.from_named(tensors)
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed checkpoint: {exc}") from None
    expected = {k: v.shape for k, v in init_weights(cfg, variant, 0).named().items()}
    actual = {k: v.shape for k, v in weights.named().items()}
    if expected != actual:
        raise CheckpointError(f"weight shapes do not match the stored {variant.value} config")
    return Checkpoint(weights, cfg, variant, int(payload.get("seed", 0)), payload.get("train_config", {}))


def load_checkpoint(path: str | Path) -> Checkpoint:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from None
    return loads(text)
