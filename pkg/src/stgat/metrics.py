"""Average and final displacement errors, and grouped evaluation reports."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .data import Engagement


def _check(true, pred) -> tuple[np.ndarray, np.ndarray]:
    true = np.asarray(true, dtype=np.float64)
    pred = np.asarray(pred, dtype=np.float64)
    if true.shape != pred.shape:
        raise ValueError(f"shape mismatch: true {true.shape} vs pred {pred.shape}")
    if true.ndim < 3 or true.shape[-1] != 3 or true.shape[-3] < 1:
        raise ValueError(f"expected [..., H, n, 3] with H >= 1, got {true.shape}")
    return true, pred


def _mask_mean(dist: np.ndarray, mask) -> np.ndarray:
    if mask is None:
        return dist.mean(axis=-1)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("fighter mask selects no fighters")
    return dist[..., mask].mean(axis=-1)


def ade(true, pred, mask=None) -> float | np.ndarray:
    """Mean Euclidean error over fighters and predicted steps, km.

    Inputs are ``[..., H, n, 3]``; leading dims are kept (one value per window).
    ``mask`` optionally restricts the mean to a subset of fighters.
    """
    true, pred = _check(true, pred)
    dist = np.sqrt(((true - pred) ** 2).sum(axis=-1))  # [..., H, n]
    out = _mask_mean(dist, mask).mean(axis=-1)
    return float(out) if out.ndim == 0 else out


def fde(true, pred, mask=None) -> float | np.ndarray:
    """Mean Euclidean error over fighters at the last predicted step, km."""
    true, pred = _check(true, pred)
    dist = np.sqrt(((true[..., -1, :, :] - pred[..., -1, :, :]) ** 2).sum(axis=-1))
    out = _mask_mean(dist, mask)
    return float(out) if out.ndim == 0 else out


@dataclass
class GroupMetrics:
    scenario: str
    horizon: int
    ade_km: float
    fde_km: float
    windows: int
    engagements: int


@dataclass
class MetricsReport:
    groups: list[GroupMetrics] = field(default_factory=list)
    fingerprint: str = ""
    meta: dict = field(default_factory=dict)

    def group(self, scenario: str, horizon: int | None = None) -> GroupMetrics:
        for g in self.groups:
            if g.scenario == scenario and (horizon is None or g.horizon == horizon):
                return g
        raise KeyError(f"no group {scenario!r} (horizon {horizon})")

    def to_dict(self) -> dict:
        return {"fingerprint": self.fingerprint, "meta": self.meta,
                "groups": [asdict(g) for g in self.groups]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "MetricsReport":
        d = json.loads(text)
        return cls([GroupMetrics(**g) for g in d["groups"]], d.get("fingerprint", ""), d.get("meta", {}))

    def table(self) -> str:
        lines = [f"{'scenario':<10}{'H':>4}{'ADE km':>12}{'FDE km':>12}{'windows':>9}"]
        for g in self.groups:
            lines.append(f"{g.scenario:<10}{g.horizon:>4}{g.ade_km:>12.5f}{g.fde_km:>12.5f}{g.windows:>9}")
        return "\n".join(lines)


def fingerprint(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# predictor(engagement, starts) -> [len(starts), H, n, 3] km
Predictor = Callable[[Engagement, np.ndarray], np.ndarray]


def evaluate_predictions(
    engagements: Sequence[Engagement],
    predictor: Predictor,
    history_len: int,
    horizon: int,
    stride: int = 1,
    blue_only: bool = False,
    meta: dict | None = None,
) -> MetricsReport:
    """Score ``predictor`` on every window start of every engagement.

    Per-window ADE/FDE are averaged within each scenario group (``"1v1"``,
    ``"2v2"`` ...) and over everything (``"all"``).
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    per_group: dict[str, list] = {}
    for e in engagements:
        T = len(e)
        if T < history_len + horizon:
            raise ValueError(f"engagement {e.id} has {T} samples, needs {history_len + horizon}")
        starts = np.arange(0, T - history_len - horizon + 1, stride)
        future = np.stack([e.pos[s + history_len:s + history_len + horizon] for s in starts])
        pred = np.asarray(predictor(e, starts))
        mask = e.blue_mask if blue_only else None
        a = np.atleast_1d(ade(future, pred, mask))
        f = np.atleast_1d(fde(future, pred, mask))
        for key in (e.scenario, "all"):
            per_group.setdefault(key, []).append((a, f, e.id))

    def sort_key(name):
        return (name == "all", name)

    report = MetricsReport(meta=dict(meta or {}))
    for name in sorted(per_group, key=sort_key):
        rows = per_group[name]
        a = np.concatenate([r[0] for r in rows])
        f = np.concatenate([r[1] for r in rows])
        report.groups.append(GroupMetrics(name, horizon, float(a.mean()), float(f.mean()),
                                          int(a.size), len(rows)))
    report.fingerprint = fingerprint({
        "meta": report.meta, "horizon": horizon, "history_len": history_len, "stride": stride,
        "blue_only": blue_only, "engagements": [e.id for e in engagements],
    })
    return report


def evaluate_model(w, cfg, variant, engagements: Sequence[Engagement], horizon: int, scale: float = 1.0,
                   stride: int = 1, blue_only: bool = False, batch: int = 512,
                   meta: dict | None = None) -> MetricsReport:
    """Sliding-window rollout of a trained model over every test window."""
    from .model import Variant, rollout

    variant = Variant.parse(variant)
    l = cfg.history_len

    def predictor(e: Engagement, starts: np.ndarray) -> np.ndarray:
        out = []
        for k in range(0, len(starts), batch):
            hist = np.stack([e.pos[s:s + l] for s in starts[k:k + batch]])
            out.append(rollout(hist, horizon, w, cfg, variant, scale))
        return np.concatenate(out)

    info = {"variant": variant.value, "model": cfg.to_dict(), "scale": scale}
    info.update(meta or {})
    return evaluate_predictions(engagements, predictor, l, horizon, stride, blue_only, info)


def ground_truth_predictor(history_len: int, horizon: int) -> Predictor:
    """A perfect oracle that returns the recorded future."""

    def predictor(e: Engagement, starts: np.ndarray) -> np.ndarray:
        return np.stack([e.pos[s + history_len:s + history_len + horizon] for s in starts])

    return predictor
