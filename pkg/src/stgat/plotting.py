"""Deterministic SVG trajectory plots (no plotting library needed).

Two panels: a top-down view (x, y) and a side profile (x, z = altitude).
History is drawn red, ground truth blue and the prediction green dashed.
"""

from __future__ import annotations

import numpy as np

from .data import Engagement

PANEL_W, PANEL_H, MARGIN = 420, 320, 40
STYLES = {
    "history": 'stroke="#d62728" stroke-width="1.5" fill="none"',
    "truth": 'stroke="#1f77b4" stroke-width="1.5" fill="none"',
    "prediction": 'stroke="#2ca02c" stroke-width="1.5" fill="none" stroke-dasharray="5,3"',
}


def polyline_engagement(e: Engagement, name: str, positions: np.ndarray, t0: float) -> Engagement:
    """Wrap a ``[k, n, 3]`` position block as an engagement sampled like ``e``."""
    pos = np.asarray(positions, dtype=np.float64)
    k = len(pos)
    dt = 1.0 / e.sample_rate_hz
    t = t0 + dt * np.arange(k, dtype=np.float64)
    if k >= 2:
        step = np.linalg.norm(np.diff(pos, axis=0), axis=-1) / dt
        speed = np.concatenate([step[:1], step], axis=0)
    else:
        speed = np.zeros((k, pos.shape[1]))
    return Engagement(f"{e.id}-{name}", e.blue, e.red, e.sample_rate_hz, t, pos, np.zeros_like(pos), speed)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _panel(series: dict[str, np.ndarray], axes: tuple[int, int], x0: float, label: str) -> list[str]:
    a, b = axes
    pts = np.concatenate([s[..., [a, b]].reshape(-1, 2) for s in series.values()], axis=0)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(max(np.max(hi - lo), 1e-9))
    mid = (lo + hi) / 2
    inner_w, inner_h = PANEL_W - 2 * MARGIN, PANEL_H - 2 * MARGIN
    scale = min(inner_w, inner_h) / span

    def xy(p):
        px = x0 + PANEL_W / 2 + (p[0] - mid[0]) * scale
        py = PANEL_H / 2 - (p[1] - mid[1]) * scale
        return f"{_fmt(px)},{_fmt(py)}"

    out = [f'<rect x="{_fmt(x0)}" y="0" width="{PANEL_W}" height="{PANEL_H}" fill="white" stroke="#999"/>',
           f'<text x="{_fmt(x0 + 8)}" y="16" font-size="12">{label} (span {span:.3f} km)</text>']
    for name, s in series.items():
        for f in range(s.shape[1]):
            path = " ".join(xy(p) for p in s[:, f, [a, b]])
            out.append(f'<polyline class="{name}" points="{path}" {STYLES[name]}/>')
    return out


def render_svg(history: np.ndarray, truth: np.ndarray, pred: np.ndarray, title: str = "") -> str:
    """Render ``[l, n, 3]`` history and ``[H, n, 3]`` truth/prediction as SVG text.

    Truth and prediction polylines start at the last history point so the
    segments join up.
    """
    history = np.asarray(history, dtype=np.float64)
    anchor = history[-1:]
    series = {
        "history": history,
        "truth": np.concatenate([anchor, np.asarray(truth, dtype=np.float64)]),
        "prediction": np.concatenate([anchor, np.asarray(pred, dtype=np.float64)]),
    }
    width = 2 * PANEL_W
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H + 24}" '
             f'viewBox="0 -24 {width} {PANEL_H + 24}">',
             f'<text x="8" y="-8" font-size="13">{title}</text>']
    lines += _panel(series, (0, 1), 0.0, "top-down x-y")
    lines += _panel(series, (0, 2), float(PANEL_W), "profile x-z")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
