"""Synthetic air-combat engagements, preprocessing, windowing and CSV I/O.

Blue fighters fly scripted maneuver primitives; red fighters fly bounded
pure pursuit against an assigned blue fighter. Positions are Cartesian km
with ``z`` as altitude.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

G_KMS2 = 0.00980665
CSV_COLUMNS = (
    "scenario_id",
    "t_s",
    "fighter_id",
    "team",
    "x_km",
    "y_km",
    "z_km",
    "roll_rad",
    "pitch_rad",
    "yaw_rad",
    "speed_kms",
)
MANEUVERS = ("straight", "level_turn", "climb", "descend", "break_turn")


class DataError(ValueError):
    """Invalid engagement data, generator spec or file contents."""


@dataclass(frozen=True)
class FighterState:
    t: float
    x: float
    y: float
    z: float
    roll: float
    pitch: float
    yaw: float
    speed: float


@dataclass
class Engagement:
    """One air battle: ``n`` fighters sampled at a fixed rate.

    ``pos`` is ``[T, n, 3]`` km, ``att`` is ``[T, n, 3]`` (roll, pitch, yaw)
    radians and ``speed`` is ``[T, n]`` km/s. Blue fighters come first.
    """

    id: str
    blue: int
    red: int
    sample_rate_hz: float
    t: np.ndarray
    pos: np.ndarray
    att: np.ndarray
    speed: np.ndarray

    def __post_init__(self):
        T, n = len(self.t), self.blue + self.red
        if self.pos.shape != (T, n, 3) or self.att.shape != (T, n, 3) or self.speed.shape != (T, n):
            raise DataError(
                f"engagement {self.id}: inconsistent shapes t={self.t.shape} pos={self.pos.shape} "
                f"att={self.att.shape} speed={self.speed.shape} for {n} fighters"
            )
        if T >= 2:
            dt = np.diff(self.t)
            if np.max(np.abs(dt - 1.0 / self.sample_rate_hz)) > 1e-9:
                raise DataError(f"engagement {self.id}: timestamps are not uniform at {self.sample_rate_hz} Hz")

    @property
    def n_fighters(self) -> int:
        return self.blue + self.red

    @property
    def scenario(self) -> str:
        return f"{self.blue}v{self.red}"

    @property
    def teams(self) -> list[str]:
        return ["blue"] * self.blue + ["red"] * self.red

    @property
    def blue_mask(self) -> np.ndarray:
        return np.arange(self.n_fighters) < self.blue

    def __len__(self):
        return len(self.t)

    def state(self, step: int, fighter: int) -> FighterState:
        x, y, z = self.pos[step, fighter]
        roll, pitch, yaw = self.att[step, fighter]
        return FighterState(
            float(self.t[step]), float(x), float(y), float(z),
            float(roll), float(pitch), float(yaw), float(self.speed[step, fighter]),
        )

    def with_positions(self, pos: np.ndarray) -> "Engagement":
        return Engagement(self.id, self.blue, self.red, self.sample_rate_hz, self.t.copy(),
                          pos, self.att.copy(), self.speed.copy())


# ---------------------------------------------------------------------------
# generation


@dataclass
class GeneratorSpec:
    """Parameters of one synthetic engagement.

    ``script`` is a list of maneuver segments flown by every blue fighter, a
    list of such lists (one per blue fighter), or ``None`` for a seeded random
    script. A segment is a dict with ``kind`` (one of ``MANEUVERS``),
    ``duration`` seconds and, depending on the kind, ``rate`` (rad/s) or
    ``angle`` (rad).
    """

    blue: int = 2
    red: int = 2
    duration_s: float = 150.0
    rate_hz: float = 2.0
    seed: int = 0
    noise_sigma: float = 0.0
    script: list | None = None
    blue_speed: float = 0.25
    red_speed: float = 0.28
    red_max_turn_rate: float = 0.2
    max_pitch_rate: float = 0.1
    red_max_pitch: float = 0.35
    origin: tuple[float, float, float] = (3590.0, 4100.0, 6.0)
    min_length: int = 9
    id: str | None = None

    def validate(self) -> None:
        if self.blue < 1 or self.red < 0:
            raise DataError(f"team sizes must be blue >= 1, red >= 0, got {self.blue}v{self.red}")
        if self.rate_hz <= 0 or self.duration_s <= 0:
            raise DataError("duration and sample rate must be positive")
        if self.duration_s * self.rate_hz + 1e-9 < self.min_length:
            raise DataError(
                f"duration {self.duration_s}s at {self.rate_hz} Hz gives fewer than {self.min_length} samples"
            )
        if self.noise_sigma < 0 or self.blue_speed <= 0 or self.red_speed <= 0:
            raise DataError("noise and speeds must be non-negative / positive")
        if self.script is not None:
            scripts = self.script if self.script and isinstance(self.script[0], list) else [self.script]
            if len(scripts) not in (1, self.blue):
                raise DataError(f"got {len(scripts)} scripts for {self.blue} blue fighters")
            for seg in (s for sc in scripts for s in sc):
                if not isinstance(seg, dict) or seg.get("kind") not in MANEUVERS:
                    raise DataError(f"bad maneuver segment {seg!r}; kinds are {MANEUVERS}")
                if float(seg.get("duration", 0)) <= 0:
                    raise DataError(f"maneuver segment {seg!r} needs a positive duration")

    @property
    def max_speed(self) -> float:
        return max(self.blue_speed, self.red_speed)


def _auto_script(rng: np.random.Generator, duration: float) -> list[dict]:
    script, total = [], 0.0
    while total < duration:
        kind = rng.choice(MANEUVERS, p=[0.3, 0.25, 0.15, 0.15, 0.15])
        seg = {"kind": str(kind), "duration": float(rng.uniform(5.0, 20.0))}
        sign = 1.0 if rng.random() < 0.5 else -1.0
        if kind == "level_turn":
            seg["rate"] = sign * float(rng.uniform(0.04, 0.12))
        elif kind == "break_turn":
            seg["rate"] = sign * float(rng.uniform(0.18, 0.28))
        elif kind in ("climb", "descend"):
            seg["angle"] = float(rng.uniform(0.08, 0.25))
        script.append(seg)
        total += seg["duration"]
    return script


def _segment_at(script: list[dict], t: float) -> dict:
    acc = 0.0
    for seg in script:
        acc += float(seg["duration"])
        if t < acc:
            return seg
    return {"kind": "straight", "duration": math.inf}


def _segment_command(seg: dict) -> tuple[float, float]:
    """(yaw rate, target flight-path angle) commanded by a maneuver segment."""
    kind = seg["kind"]
    if kind in ("level_turn", "break_turn"):
        return float(seg.get("rate", 0.1 if kind == "level_turn" else 0.25)), 0.0
    if kind == "climb":
        return 0.0, abs(float(seg.get("angle", 0.15)))
    if kind == "descend":
        return 0.0, -abs(float(seg.get("angle", 0.15)))
    return 0.0, 0.0


def _advance(p, yaw, gamma, v, omega, gamma_target, pitch_rate, dt):
    """Exact constant-rate arc in the horizontal plane, midpoint climb angle."""
    step = pitch_rate * dt
    g1 = gamma + float(np.clip(gamma_target - gamma, -step, step))
    gm = 0.5 * (gamma + g1)
    vh = v * math.cos(gm)
    y1 = yaw + omega * dt
    if abs(omega) > 1e-12:
        dx = vh / omega * (math.sin(y1) - math.sin(yaw))
        dy = vh / omega * (math.cos(yaw) - math.cos(y1))
    else:
        dx = vh * dt * math.cos(yaw)
        dy = vh * dt * math.sin(yaw)
    dz = v * math.sin(gm) * dt
    return p + np.array([dx, dy, dz]), y1, g1


def _wrap(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def generate_engagement(spec: GeneratorSpec) -> Engagement:
    """Simulate one engagement; deterministic for a given spec."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n = spec.blue + spec.red
    T = int(round(spec.duration_s * spec.rate_hz))
    dt = 1.0 / spec.rate_hz
    origin = np.asarray(spec.origin, dtype=np.float64)

    if spec.script is None:
        scripts = [_auto_script(rng, spec.duration_s) for _ in range(spec.blue)]
    elif spec.script and isinstance(spec.script[0], list):
        scripts = spec.script
    else:
        scripts = [spec.script] * spec.blue

    base_heading = float(rng.uniform(-math.pi, math.pi))
    pos = np.empty((T, n, 3))
    att = np.empty((T, n, 3))
    speed = np.empty((T, n))
    p = [None] * n
    yaw = [0.0] * n
    gamma = [0.0] * n
    v = [spec.blue_speed] * spec.blue + [spec.red_speed] * spec.red
    fwd = np.array([math.cos(base_heading), math.sin(base_heading), 0.0])
    side = np.array([-fwd[1], fwd[0], 0.0])
    for i in range(spec.blue):
        p[i] = origin + side * (1.5 * i) + np.array([0.0, 0.0, float(rng.uniform(0.0, 1.0))])
        yaw[i] = base_heading
    for j in range(spec.red):
        i = spec.blue + j
        back = float(rng.uniform(5.0, 9.0))
        p[i] = origin - fwd * back + side * (1.5 * j + float(rng.uniform(-1.0, 1.0)))
        p[i] = p[i] + np.array([0.0, 0.0, float(rng.uniform(-0.5, 0.5))])
        yaw[i] = base_heading + float(rng.uniform(-0.3, 0.3))
    omegas = [0.0] * n

    for k in range(T):
        for i in range(n):
            pos[k, i] = p[i]
            att[k, i] = (math.atan(v[i] * omegas[i] / G_KMS2), gamma[i], _wrap(yaw[i]))
            speed[k, i] = v[i]
        if k == T - 1:
            break
        t = k * dt
        cmds = []
        for i in range(spec.blue):
            cmds.append(_segment_command(_segment_at(scripts[i], t)))
        for j in range(spec.red):
            i = spec.blue + j
            d = p[j % spec.blue] - p[i]
            want_yaw = math.atan2(d[1], d[0])
            omega = float(np.clip(_wrap(want_yaw - yaw[i]) / dt, -spec.red_max_turn_rate, spec.red_max_turn_rate))
            want_gamma = float(np.clip(math.atan2(d[2], math.hypot(d[0], d[1])), -spec.red_max_pitch, spec.red_max_pitch))
            cmds.append((omega, want_gamma))
        for i in range(n):
            omegas[i] = cmds[i][0]
            p[i], yaw[i], gamma[i] = _advance(p[i], yaw[i], gamma[i], v[i], cmds[i][0], cmds[i][1],
                                              spec.max_pitch_rate, dt)

    if spec.noise_sigma > 0:
        noise = rng.normal(0.0, spec.noise_sigma, size=pos.shape)
        # clip each perturbation to 2 sigma so step lengths stay physically bounded
        norm = np.linalg.norm(noise, axis=-1, keepdims=True)
        noise *= np.minimum(1.0, 2.0 * spec.noise_sigma / np.maximum(norm, 1e-300))
        pos = pos + noise

    t = np.arange(T, dtype=np.float64) / spec.rate_hz
    eid = spec.id or f"{spec.blue}v{spec.red}-s{spec.seed}"
    return Engagement(eid, spec.blue, spec.red, float(spec.rate_hz), t, pos, att, speed)


DEFAULT_COMPOSITION = ((4, 4, 8), (2, 2, 12), (1, 1, 10))


def dataset_spec(
    seed: int = 0,
    duration_s: float = 150.0,
    rate_hz: float = 2.0,
    noise_sigma: float = 0.005,
    composition: Sequence[tuple[int, int, int]] = DEFAULT_COMPOSITION,
    **overrides,
) -> list[GeneratorSpec]:
    """Generator specs for a whole benchmark (default: 8 x 4v4, 12 x 2v2, 10 x 1v1)."""
    specs = []
    for blue, red, count in composition:
        for k in range(count):
            sub_seed = int(np.random.SeedSequence([seed, blue, red, k]).generate_state(1)[0])
            specs.append(GeneratorSpec(
                blue=blue, red=red, duration_s=duration_s, rate_hz=rate_hz, seed=sub_seed,
                noise_sigma=noise_sigma, id=f"{blue}v{red}-{k:03d}", **overrides,
            ))
    return specs


def load_generator_config(path: str | Path) -> list[GeneratorSpec]:
    """Read a JSON generator config into engagement specs.

    Keys: ``seed``, ``duration_s``, ``rate_hz``, ``noise_sigma`` and
    ``scenarios`` (list of ``{"blue", "red", "count"}``, optionally with a
    ``script``). Any other key is passed to :class:`GeneratorSpec`.
    """
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read generator config {path}: {exc}") from exc
    return generator_specs_from_dict(cfg)


def generator_specs_from_dict(cfg: dict) -> list[GeneratorSpec]:
    if not isinstance(cfg, dict):
        raise DataError("generator config must be a JSON object")
    cfg = dict(cfg)
    scenarios = cfg.pop("scenarios", None)
    known = set(GeneratorSpec.__dataclass_fields__) - {"blue", "red", "script", "id"}
    unknown = set(cfg) - known
    if unknown:
        raise DataError(f"unknown generator config keys: {sorted(unknown)}")
    if "origin" in cfg:
        cfg["origin"] = tuple(cfg["origin"])
    if scenarios is None:
        specs = dataset_spec(**cfg)
    else:
        base_seed = cfg.pop("seed", 0)
        specs = []
        for s in scenarios:
            try:
                blue, red, count = int(s["blue"]), int(s["red"]), int(s.get("count", 1))
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(f"bad scenario entry {s!r}") from exc
            for k in range(count):
                sub_seed = int(np.random.SeedSequence([base_seed, blue, red, k]).generate_state(1)[0])
                specs.append(GeneratorSpec(blue=blue, red=red, seed=sub_seed, script=s.get("script"),
                                           id=f"{blue}v{red}-{k:03d}", **cfg))
    for sp in specs:
        sp.validate()
    return specs


# ---------------------------------------------------------------------------
# preprocessing


def low_pass_filter(e: Engagement, window: int = 5) -> Engagement:
    """Zero-phase centred moving average of positions.

    Edge samples use the widest symmetric window that fits.
    """
    T = len(e)
    if not isinstance(window, (int, np.integer)) or window < 1 or window % 2 == 0 or window > T:
        raise DataError(f"filter window must be an odd integer in [1, {T}], got {window!r}")
    half = window // 2
    idx = np.arange(T)
    reach = np.minimum(half, np.minimum(idx, T - 1 - idx))
    # average offsets from the centre sample: neighbouring differences are
    # exact, so only the final addition rounds and translations commute
    acc = np.zeros_like(e.pos)
    for k in range(1, half + 1):
        use = reach >= k
        acc[use] += (e.pos[idx[use] + k] - e.pos[use]) + (e.pos[idx[use] - k] - e.pos[use])
    out = e.pos + acc / (2 * reach + 1)[:, None, None]
    return e.with_positions(out)


@dataclass
class NormRecord:
    """Per-fighter offset (last observed position, km) and scale (km)."""

    offset: np.ndarray
    scale: float = 1.0


def normalize_window(raw: np.ndarray, scale: float = 1.0) -> tuple[np.ndarray, NormRecord]:
    """Shift ``[..., l, n, 3]`` km so each fighter's last point is the origin, then scale."""
    if scale <= 0:
        raise DataError(f"normalization scale must be positive, got {scale}")
    raw = np.asarray(raw, dtype=np.float64)
    offset = raw[..., -1, :, :].copy()
    return (raw - offset[..., None, :, :]) / scale, NormRecord(offset, float(scale))


def denormalize(pred: np.ndarray, norm: NormRecord) -> np.ndarray:
    """Map normalized ``[..., n, 3]`` back to km."""
    return np.asarray(pred) * norm.scale + norm.offset


@dataclass
class WindowSample:
    """History ``[l, n, 3]`` and next-step target ``[n, 3]``, both normalized."""

    history: np.ndarray
    target: np.ndarray
    norm: NormRecord
    source: str = ""
    start: int = 0


def windowize(e: Engagement, l: int = 8, scale: float = 1.0, stride: int = 1) -> list[WindowSample]:
    """All stride-``stride`` windows: history ``[s, s+l)`` and target ``s+l``."""
    T = len(e)
    if l < 1:
        raise DataError(f"history length must be >= 1, got {l}")
    if T < l + 1:
        raise DataError(f"engagement {e.id} has {T} samples, needs at least {l + 1}")
    out = []
    for s in range(0, T - l, stride):
        hist, norm = normalize_window(e.pos[s:s + l], scale)
        target = (e.pos[s + l] - norm.offset) / scale
        out.append(WindowSample(hist, target, norm, e.id, s))
    return out


def stack_windows(samples: Sequence[WindowSample]) -> tuple[np.ndarray, np.ndarray]:
    """Stack histories ``[B, l, n, 3]`` and targets ``[B, n, 3]``."""
    return (np.stack([s.history for s in samples]), np.stack([s.target for s in samples]))


@dataclass
class DatasetSplit:
    train: list[Engagement] = field(default_factory=list)
    test: list[Engagement] = field(default_factory=list)


def split_dataset(engagements: Sequence[Engagement], seed: int = 0) -> DatasetSplit:
    """Seeded 4:1 train/test partition at engagement level (test gets ``max(1, N // 5)``)."""
    N = len(engagements)
    if N < 2:
        raise DataError(f"need at least 2 engagements to split, got {N}")
    order = np.random.default_rng(seed).permutation(N)
    n_test = max(1, N // 5)
    test_idx = set(order[:n_test].tolist())
    return DatasetSplit(
        train=[e for k, e in enumerate(engagements) if k not in test_idx],
        test=[e for k, e in enumerate(engagements) if k in test_idx],
    )


# ---------------------------------------------------------------------------
# CSV


def _fmt(x: float) -> str:
    return repr(float(x))


def engagement_to_csv(e: Engagement) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    teams = e.teams
    for k in range(len(e)):
        for i in range(e.n_fighters):
            w.writerow([
                e.id, _fmt(e.t[k]), i, teams[i],
                *map(_fmt, e.pos[k, i]), *map(_fmt, e.att[k, i]), _fmt(e.speed[k, i]),
            ])
    return buf.getvalue()


def write_csv(e: Engagement, path: str | Path) -> None:
    Path(path).write_text(engagement_to_csv(e), encoding="utf-8", newline="")


def read_csv(path: str | Path) -> Engagement:
    """Parse an engagement CSV, validating columns, rows and timestamp uniformity."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return engagement_from_csv(text, str(path))


def engagement_from_csv(text: str, where: str = "<string>") -> Engagement:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise DataError(f"{where}: empty file")
    for col in CSV_COLUMNS:
        if col not in header:
            raise DataError(f"{where}: missing column {col!r}")
    col = {name: header.index(name) for name in CSV_COLUMNS}

    rows: dict[tuple[float, int], list[float]] = {}
    teams: dict[int, str] = {}
    ids = set()
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"{where}: line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            t = float(row[col["t_s"]])
            fid = int(row[col["fighter_id"]])
            vals = [float(row[col[c]]) for c in CSV_COLUMNS[4:]]
        except ValueError as exc:
            raise DataError(f"{where}: line {lineno}: {exc}") from None
        team = row[col["team"]]
        if team not in ("blue", "red"):
            raise DataError(f"{where}: line {lineno}: team must be blue or red, got {team!r}")
        if not all(math.isfinite(v) for v in vals) or vals[-1] < 0:
            raise DataError(f"{where}: line {lineno}: non-finite value or negative speed")
        if teams.setdefault(fid, team) != team:
            raise DataError(f"{where}: line {lineno}: fighter {fid} changes team")
        if (t, fid) in rows:
            raise DataError(f"{where}: line {lineno}: duplicate record for fighter {fid} at t={t}")
        rows[(t, fid)] = vals
        ids.add(row[col["scenario_id"]])

    if not rows:
        raise DataError(f"{where}: no data rows")
    if len(ids) != 1:
        raise DataError(f"{where}: expected one scenario_id, found {sorted(ids)}")
    fighters = sorted(teams)
    if fighters != list(range(len(fighters))):
        raise DataError(f"{where}: fighter ids must be 0..n-1, got {fighters}")
    order = [teams[f] for f in fighters]
    blue = order.count("blue")
    if order != ["blue"] * blue + ["red"] * (len(order) - blue):
        raise DataError(f"{where}: blue fighters must precede red fighters")
    times = sorted({t for t, _ in rows})
    n, T = len(fighters), len(times)
    if len(rows) != n * T:
        raise DataError(f"{where}: fighters do not share identical timestamps")
    data = np.array([[rows[(t, f)] for f in fighters] for t in times])
    t_arr = np.array(times)
    if T >= 2:
        dt = np.diff(t_arr)
        if np.max(np.abs(dt - dt[0])) > 1e-9:
            raise DataError(f"{where}: timestamps are not uniformly spaced")
        rate = round(1.0 / dt[0], 6)
    else:
        rate = 1.0
    return Engagement(ids.pop(), blue, n - blue, rate, t_arr,
                      data[..., 0:3].copy(), data[..., 3:6].copy(), data[..., 6].copy())


def read_dir(path: str | Path) -> list[Engagement]:
    """Read every ``*.csv`` under ``path`` in sorted filename order."""
    files = sorted(Path(path).glob("*.csv"))
    return [read_csv(f) for f in files]
