"""Command-line entry point: ``stgat <command> ...``.

Exit codes: 0 success, 1 replay mismatch, 2 bad input or config, 3 I/O
failure, 4 numerical abort.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .checkpoint import CheckpointError, atomic_write, load_checkpoint, save_checkpoint
from .data import (
    DataError,
    Engagement,
    dataset_spec,
    engagement_to_csv,
    generate_engagement,
    generator_specs_from_dict,
    low_pass_filter,
    read_csv,
    read_dir,
    split_dataset,
    windowize,
)
from .metrics import evaluate_model, evaluate_predictions, ground_truth_predictor
from .model import ModelConfig, Variant, count_parameters, rollout
from .plotting import polyline_engagement, render_svg
from .training import NumericalError, TrainConfig, train

log = logging.getLogger("stgat")

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3, 4
DATA_ENV = "STGAT_DATA_DIR"


class InputError(ValueError):
    """Bad command-line input or config (exit code 2)."""


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    config: dict
    seeds: dict
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    wall_time_s: float = 0.0
    version: str = __version__


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path: Path, manifest: RunManifest) -> None:
    atomic_write(path, json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")


def _ensure_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {path} is not writable: {exc}") from exc
    return path


def _write(path: Path, text: str, outputs: dict) -> None:
    atomic_write(path, text)
    outputs[str(path)] = sha256_file(path)


def _read_json(path) -> dict:
    if path is None:
        return {}
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise InputError(f"config {path} must be a JSON object")
    return cfg


def _data_dir(arg) -> Path:
    path = arg or os.environ.get(DATA_ENV)
    if not path:
        raise InputError(f"no data directory given (use --data or set {DATA_ENV})")
    path = Path(path)
    if not path.is_dir():
        raise InputError(f"data directory {path} does not exist")
    return path


# ---------------------------------------------------------------------------
# configuration assembly


@dataclass
class RunConfig:
    model: ModelConfig
    train: TrainConfig
    filter_window: int = 5
    split_seed: int = 0

    def to_dict(self) -> dict:
        return {"model": self.model.to_dict(), "train": self.train.to_dict(),
                "data": {"filter_window": self.filter_window, "split_seed": self.split_seed}}


def build_run_config(args) -> RunConfig:
    raw = _read_json(getattr(args, "config", None))
    unknown = set(raw) - {"model", "train", "data"}
    if unknown:
        raise InputError(f"unknown config sections: {sorted(unknown)}")
    try:
        mcfg = ModelConfig.from_dict(raw.get("model", {}))
        tcfg = TrainConfig.from_dict(raw.get("train", {}))
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad config: {exc}") from None
    data = dict(raw.get("data", {}))
    if set(data) - {"filter_window", "split_seed"}:
        raise InputError(f"unknown data config keys: {sorted(set(data) - {'filter_window', 'split_seed'})}")
    try:
        if getattr(args, "history_len", None) is not None:
            mcfg = replace(mcfg, history_len=args.history_len)
        if getattr(args, "epochs", None) is not None:
            tcfg = replace(tcfg, epochs=args.epochs)
        if getattr(args, "max_steps", None) is not None:
            tcfg = replace(tcfg, max_steps=args.max_steps)
        if getattr(args, "seed", None) is not None:
            tcfg = replace(tcfg, seed=args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    split_seed = int(data.get("split_seed", tcfg.seed))
    return RunConfig(mcfg, tcfg, int(data.get("filter_window", 5)), split_seed)


def load_split(data_dir: Path, rc: RunConfig):
    engagements = read_dir(data_dir)
    if not engagements:
        raise InputError(f"no engagement CSVs in {data_dir}")
    if rc.filter_window > 1:
        engagements = [low_pass_filter(e, rc.filter_window) for e in engagements]
    return split_dataset(engagements, rc.split_seed), engagements


def _windows(engagements, mcfg: ModelConfig, tcfg: TrainConfig, stride: int = 1):
    return [s for e in engagements for s in windowize(e, mcfg.history_len, tcfg.scale, stride)]


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args) -> RunManifest:
    if args.spec:
        raw = _read_json(args.spec)
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.rate is not None:
            raw["rate_hz"] = args.rate
        specs = generator_specs_from_dict(raw)
    else:
        specs = dataset_spec(seed=args.seed or 0, rate_hz=args.rate or 2.0)
    out = _ensure_dir(Path(args.out))
    outputs: dict = {}
    for sp in specs:
        e = generate_engagement(sp)
        _write(out / f"{e.id}.csv", engagement_to_csv(e), outputs)
    log.info("wrote %d engagements to %s", len(specs), out)
    return RunManifest("generate", [], {"specs": [asdict(s) for s in specs]},
                       {"seed": args.seed or 0}, outputs=outputs)


def _train_arm(split, rc: RunConfig, variant: Variant):
    samples = _windows(split.train, rc.model, rc.train)
    if not samples:
        raise InputError("training split produced no windows")
    return train(samples, rc.train, rc.model, variant, validation=split.test)


def cmd_train(args) -> RunManifest:
    rc = build_run_config(args)
    variant = Variant.parse(args.variant)
    data_dir = _data_dir(args.data)
    split, _ = load_split(data_dir, rc)
    out = Path(args.out)
    _ensure_dir(out.parent)
    weights, report = _train_arm(split, rc, variant)
    outputs: dict = {}
    save_checkpoint(out, weights, rc.model, variant, rc.train.seed,
                    {**rc.train.to_dict(), "filter_window": rc.filter_window, "split_seed": rc.split_seed})
    outputs[str(out)] = sha256_file(out)
    _write(out.with_suffix(".report.jsonl"), report.to_jsonl(), outputs)
    for rec in report.epochs:
        log.info("epoch %d  steps %d  loss %.3e  val ADE %.5f km", rec.epoch, rec.steps, rec.train_loss,
                 rec.val_ade_km if rec.val_ade_km is not None else float("nan"))
    return RunManifest("train", [], {**rc.to_dict(), "variant": variant.value},
                       {"train": rc.train.seed, "split": rc.split_seed},
                       inputs={str(p): sha256_file(p) for p in sorted(data_dir.glob("*.csv"))},
                       outputs=outputs)


def cmd_evaluate(args) -> RunManifest:
    try:
        ckpt = load_checkpoint(args.checkpoint)
    except CheckpointError as exc:
        raise InputError(str(exc)) from None
    if args.history_len is not None and args.history_len != ckpt.model_config.history_len:
        raise InputError(f"--history-len {args.history_len} does not match checkpoint "
                         f"history length {ckpt.model_config.history_len}")
    if args.variant is not None and Variant.parse(args.variant) is not ckpt.variant:
        raise InputError(f"--variant {args.variant} does not match checkpoint variant {ckpt.variant.value}")
    tc = dict(ckpt.train_config)
    rc = RunConfig(ckpt.model_config, TrainConfig(), int(tc.get("filter_window", 5)), int(tc.get("split_seed", 0)))
    data_dir = _data_dir(args.data)
    split, _ = load_split(data_dir, rc)
    if not split.test:
        raise InputError("no test engagements")
    report = evaluate_model(ckpt.weights, ckpt.model_config, ckpt.variant, split.test, args.horizon,
                            float(tc.get("scale", 1.0)), blue_only=args.blue_only,
                            meta={"checkpoint": sha256_file(Path(args.checkpoint))[:16]})
    if args.horizon == 1:
        report.meta["note"] = "horizon 1: ADE equals FDE"
    out = Path(args.out)
    _ensure_dir(out.parent)
    outputs: dict = {}
    _write(out, report.to_json(), outputs)
    print(report.table())
    return RunManifest("evaluate", [], {"horizon": args.horizon, "blue_only": args.blue_only},
                       {"split": rc.split_seed},
                       inputs={args.checkpoint: sha256_file(Path(args.checkpoint))}, outputs=outputs)


def run_ablation(split, rc: RunConfig, horizon: int = 1) -> dict:
    """Train and score the three variants under identical seeds and budget."""
    arms = {}
    for variant in (Variant.FULL, Variant.TRANSFORMER, Variant.GAT):
        started = time.perf_counter()
        weights, report = _train_arm(split, rc, variant)
        m = evaluate_model(weights, rc.model, variant, split.test, horizon, rc.train.scale)
        arms[variant.value] = {
            "ade_km": m.group("all").ade_km,
            "fde_km": m.group("all").fde_km,
            "groups": {g.scenario: g.ade_km for g in m.groups},
            "parameters": count_parameters(weights),
            "final_train_loss": report.epochs[-1].train_loss if report.epochs else None,
            "wall_time_s": round(time.perf_counter() - started, 3),
        }
    best_branch = min(arms["transformer_only"]["ade_km"], arms["gat_only"]["ade_km"])
    return {
        "horizon": horizon,
        "seed": rc.train.seed,
        "arms": arms,
        "ranking": sorted(arms, key=lambda k: arms[k]["ade_km"]),
        "full_over_best_branch": arms["full"]["ade_km"] / best_branch,
        "ordering_ok": arms["full"]["ade_km"] <= 1.05 * best_branch,
    }


def cmd_ablate(args) -> RunManifest:
    rc = build_run_config(args)
    data_dir = _data_dir(args.data)
    split, _ = load_split(data_dir, rc)
    out = _ensure_dir(Path(args.out))
    result = run_ablation(split, rc, args.horizon)
    outputs: dict = {}
    timing_free = json.loads(json.dumps(result))
    for arm in timing_free["arms"].values():
        arm.pop("wall_time_s")
    _write(out / "ablation.json", json.dumps(timing_free, indent=2, sort_keys=True) + "\n", outputs)
    print(f"{'arm':<18}{'ADE km':>12}{'FDE km':>12}")
    for name in result["ranking"]:
        arm = result["arms"][name]
        print(f"{name:<18}{arm['ade_km']:>12.5f}{arm['fde_km']:>12.5f}")
    if args.check_ordering:
        verdict = "PASS" if result["ordering_ok"] else "FAIL"
        print(f"ordering check (full <= 1.05 x best branch): {verdict} "
              f"ratio={result['full_over_best_branch']:.4f}")
    return RunManifest("ablate", [], rc.to_dict(),
                       {"train": rc.train.seed, "split": rc.split_seed, "arms": {k: rc.train.seed for k in result["arms"]}},
                       outputs=outputs, wall_time_s=0.0)


def forward_macs(cfg: ModelConfig, n: int, variant=Variant.FULL) -> int:
    """Multiply-accumulate count of one forward pass for ``n`` fighters."""
    variant = Variant.parse(variant)
    l, d, dff, K, din = cfg.history_len, cfg.d_model, cfg.d_ff, cfg.gat_heads, cfg.input_dim
    total = n * (cfg.decoder_input(variant) * cfg.decoder_hidden + cfg.decoder_hidden * din)
    if variant.uses_temporal:
        total += l * n * din * d
        per_block = 4 * l * n * d * d + 2 * n * l * l * d + 2 * l * n * d * dff
        total += cfg.encoder_blocks * per_block
    if variant.uses_spatial:
        total += l * n * din * din + l * n * din * K * d + 2 * l * K * n * d + l * K * n * n * d
    return int(total)


def _downsample(e: Engagement, factor: int, rate: float) -> Engagement:
    return Engagement(e.id, e.blue, e.red, rate, e.t[::factor].copy(), e.pos[::factor].copy(),
                      e.att[::factor].copy(), e.speed[::factor].copy())


def run_freq_experiment(raw_cfg: dict, seed: int, epochs: int, max_steps: int | None = None) -> dict:
    """Matched 2 Hz / 50 Hz comparison with 4 s of history in both arms.

    Engagements are simulated once at 50 Hz; the 2 Hz arm sees every 25th
    sample. Both arms use the same window start times, so they are trained
    and tested on the same moments of the same flights.
    """
    history_s = float(raw_cfg.pop("history_s", 4.0))
    filter_window = int(raw_cfg.pop("filter_window", 5))
    model_over = raw_cfg.pop("model", {})
    train_over = raw_cfg.pop("train", {})
    raw_cfg.setdefault("scenarios", [{"blue": 2, "red": 2, "count": 5}])
    raw_cfg.setdefault("duration_s", 60.0)
    raw_cfg.setdefault("noise_sigma", 0.005)
    raw_cfg["rate_hz"] = 50.0
    raw_cfg["seed"] = seed
    specs = generator_specs_from_dict(raw_cfg)
    fine = [generate_engagement(sp) for sp in specs]
    split = split_dataset(fine, seed)

    arms = {}
    for rate in (2.0, 50.0):
        factor = int(round(50.0 / rate))
        l = int(round(history_s * rate))
        mcfg = ModelConfig.from_dict({**model_over, "history_len": l})
        tcfg = TrainConfig.from_dict({"epochs": epochs, "seed": seed, "max_steps": max_steps, **train_over})
        prep = lambda es: [low_pass_filter(_downsample(e, factor, rate), filter_window) for e in es]  # noqa: E731
        train_es, test_es = prep(split.train), prep(split.test)
        # one window every 0.5 s in both arms
        stride = max(1, int(round(rate / 2.0)))
        samples = [s for e in train_es for s in windowize(e, l, tcfg.scale, stride)]
        started = time.perf_counter()
        weights, _ = train(samples, tcfg, mcfg, Variant.FULL)
        train_time = time.perf_counter() - started
        started = time.perf_counter()
        m = evaluate_model(weights, mcfg, Variant.FULL, test_es, 1, tcfg.scale, stride=stride)
        eval_time = time.perf_counter() - started
        n = max(e.n_fighters for e in test_es)
        arms[f"{int(rate)}hz"] = {
            "rate_hz": rate,
            "history_len": l,
            "history_s": l / rate,
            "ade_km": m.group("all").ade_km,
            "windows_train": len(samples),
            "windows_test": m.group("all").windows,
            "parameters": count_parameters(weights),
            "forward_macs": forward_macs(mcfg, n),
            "train_time_s": round(train_time, 3),
            "eval_time_s": round(eval_time, 3),
        }
    ratio = arms["50hz"]["ade_km"] / arms["2hz"]["ade_km"]
    return {
        "seed": seed,
        "engagements": [e.id for e in fine],
        "arms": arms,
        "ratio_50hz_over_2hz": ratio,
        "higher_rate_better": arms["50hz"]["ade_km"] <= arms["2hz"]["ade_km"],
    }


def cmd_freq_experiment(args) -> RunManifest:
    raw = _read_json(args.spec)
    out = _ensure_dir(Path(args.out))
    result = run_freq_experiment(raw, args.seed or 0, args.epochs if args.epochs is not None else 3, args.max_steps)
    outputs: dict = {}
    stable = json.loads(json.dumps(result))
    for arm in stable["arms"].values():
        arm.pop("train_time_s")
        arm.pop("eval_time_s")
    _write(out / "freq_experiment.json", json.dumps(stable, indent=2, sort_keys=True) + "\n", outputs)
    for name, arm in result["arms"].items():
        print(f"{name:>5}: l={arm['history_len']:<4} ADE {arm['ade_km']:.5f} km  "
              f"MACs/forward {arm['forward_macs']:>10}  train {arm['train_time_s']:.1f}s")
    print(f"50 Hz / 2 Hz error ratio: {result['ratio_50hz_over_2hz']:.3f}")
    timing = {k: {"train_time_s": v["train_time_s"], "eval_time_s": v["eval_time_s"]}
              for k, v in result["arms"].items()}
    return RunManifest("freq-experiment", [], {"spec": raw, "epochs": args.epochs, "timing": timing},
                       {"seed": args.seed or 0}, outputs=outputs)


def cmd_plot(args) -> RunManifest:
    try:
        ckpt = None if args.oracle else load_checkpoint(args.checkpoint)
    except CheckpointError as exc:
        raise InputError(str(exc)) from None
    e = read_csv(args.csv)
    tc = dict(ckpt.train_config) if ckpt else {}
    fw = int(tc.get("filter_window", 5)) if args.filter_window is None else args.filter_window
    if fw > 1:
        e = low_pass_filter(e, fw)
    l = ckpt.model_config.history_len if ckpt else (args.history_len or 8)
    H, s = args.horizon, args.start
    if s < 0 or s + l + H > len(e):
        raise InputError(f"window start {s} with history {l} and horizon {H} does not fit {len(e)} samples")
    history = e.pos[s:s + l]
    truth = e.pos[s + l:s + l + H]
    if ckpt is None:
        pred = truth.copy()
    else:
        pred = rollout(history, H, ckpt.weights, ckpt.model_config, ckpt.variant, float(tc.get("scale", 1.0)))
    out = _ensure_dir(Path(args.out))
    outputs: dict = {}
    dt = 1.0 / e.sample_rate_hz
    series = {
        "history": polyline_engagement(e, "history", history, s * dt),
        "truth": polyline_engagement(e, "truth", truth, (s + l) * dt),
        "prediction": polyline_engagement(e, "prediction", pred, (s + l) * dt),
    }
    for name, pe in series.items():
        _write(out / f"{name}.csv", engagement_to_csv(pe), outputs)
    _write(out / "trajectory.svg", render_svg(history, truth, pred, title=f"{e.id} start={s}"), outputs)
    return RunManifest("plot", [], {"start": s, "horizon": H, "oracle": bool(args.oracle)}, {},
                       inputs={args.csv: sha256_file(Path(args.csv))}, outputs=outputs)


def cmd_replay(args) -> int:
    path = Path(args.manifest)
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
        argv = manifest["argv"]
        expected = manifest["outputs"]
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise InputError(f"cannot read manifest {path}: {exc}") from None
    code = main(argv + ["--manifest-out", str(path.with_suffix(".replay.json"))])
    if code != EXIT_OK:
        return code
    bad = [p for p, digest in expected.items() if not Path(p).exists() or sha256_file(Path(p)) != digest]
    for p in bad:
        print(f"checksum mismatch: {p}", file=sys.stderr)
    print("replay reproduced all artifacts" if not bad else f"{len(bad)} artifact(s) differ")
    return EXIT_OK if not bad else EXIT_MISMATCH


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stgat", description="Spatio-temporal graph attention trajectory predictor")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data=True, seed=True):
        if data:
            sp.add_argument("--data", help=f"engagement CSV directory (default: ${DATA_ENV})")
        if seed:
            sp.add_argument("--seed", type=int)
        sp.add_argument("--manifest-out", help=argparse.SUPPRESS)

    g = sub.add_parser("generate", help="simulate engagements to CSV")
    g.add_argument("--spec", help="JSON generator config (default: 8x4v4, 12x2v2, 10x1v1)")
    g.add_argument("--rate", type=float, choices=(2.0, 50.0))
    g.add_argument("--out", required=True)
    common(g, data=False)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train on the 4:1 train split")
    t.add_argument("--config", help="JSON with optional model/train/data sections")
    t.add_argument("--variant", choices=("full", "transformer", "gat"), default="full")
    t.add_argument("--history-len", type=int)
    t.add_argument("--epochs", type=int)
    t.add_argument("--max-steps", type=int)
    t.add_argument("--out", required=True, help="checkpoint path")
    common(t)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="ADE/FDE on the test split")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--horizon", type=int, default=1)
    e.add_argument("--history-len", type=int)
    e.add_argument("--variant", choices=("full", "transformer", "gat"))
    e.add_argument("--blue-only", action="store_true")
    e.add_argument("--out", required=True, help="report JSON path")
    common(e, seed=False)
    e.set_defaults(func=cmd_evaluate)

    a = sub.add_parser("ablate", help="full vs transformer-only vs GAT-only")
    a.add_argument("--config")
    a.add_argument("--history-len", type=int)
    a.add_argument("--epochs", type=int)
    a.add_argument("--max-steps", type=int)
    a.add_argument("--horizon", type=int, default=1)
    a.add_argument("--check-ordering", action="store_true")
    a.add_argument("--out", required=True)
    common(a)
    a.set_defaults(func=cmd_ablate)

    f = sub.add_parser("freq-experiment", help="2 Hz / l=8 vs 50 Hz / l=200 comparison")
    f.add_argument("--spec", help="JSON generator config plus optional model/train sections")
    f.add_argument("--epochs", type=int)
    f.add_argument("--max-steps", type=int)
    f.add_argument("--out", required=True)
    common(f, data=False)
    f.set_defaults(func=cmd_freq_experiment)

    pl = sub.add_parser("plot", help="SVG of history, truth and forecast")
    pl.add_argument("--checkpoint")
    pl.add_argument("--oracle", action="store_true", help="use the recorded future as the forecast")
    pl.add_argument("--csv", required=True)
    pl.add_argument("--start", type=int, default=0)
    pl.add_argument("--horizon", type=int, default=8)
    pl.add_argument("--history-len", type=int)
    pl.add_argument("--filter-window", type=int)
    pl.add_argument("--out", required=True)
    common(pl, data=False, seed=False)
    pl.set_defaults(func=cmd_plot)

    r = sub.add_parser("replay", help="rerun a manifest and verify artifact checksums")
    r.add_argument("manifest")
    r.set_defaults(func=cmd_replay)
    return p


def _manifest_path(args, manifest: RunManifest) -> Path:
    if getattr(args, "manifest_out", None):
        return Path(args.manifest_out)
    out = Path(args.out)
    if args.command in ("train", "evaluate"):
        return out.with_suffix(".manifest.json")
    return out / f"{args.command}.manifest.json"


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "plot" and not args.oracle and not args.checkpoint:
        print("error: plot needs --checkpoint or --oracle", file=sys.stderr)
        return EXIT_INPUT
    started = time.perf_counter()
    try:
        # non-finite values are detected explicitly and mapped to exit 4
        with np.errstate(over="ignore", invalid="ignore"):
            result = args.func(args)
        if isinstance(result, int):
            return result
        result.argv = [a for a in argv if a != "--manifest-out"]
        if "--manifest-out" in argv:
            k = argv.index("--manifest-out")
            result.argv = argv[:k] + argv[k + 2:]
        result.wall_time_s = round(time.perf_counter() - started, 3)
        write_manifest(_manifest_path(args, result), result)
        return EXIT_OK
    except NumericalError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, DataError, CheckpointError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
