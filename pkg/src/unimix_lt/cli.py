"""Command-line entry point and run-artifact persistence.

Every subcommand writes its outputs into a run directory, always
including `config.resolved.json` with every default made explicit;
re-running a command from that file reproduces the output files byte for
byte. All files are written atomically (temp file + rename). Exit codes:
0 success, 1 configuration or I/O error, 2 runtime invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import calibration
from .circles import SCENARIOS, run_all_scenarios, virtual_cloud
from .config import build_training_run, load_config, resolve_train_config
from .data import (TwoCircleSpec, gen_lt_gaussians, gen_two_circles, load_csv,
                   save_csv)
from .errors import ConfigError, InvariantViolation
from .mixing import MIX_MODES, MixConfig, mc_xi_aug_histogram
from .model import load_model, predict_proba, save_model, train_two_phase
from .theory import (LTSpec, discrete_lt_prior, emit_density_curves, factor_density,
                     unimix_density)

__all__ = ["main", "entrypoint"]


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_json(path: Path, obj) -> None:
    _atomic_write(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_resolved(out_dir: Path, command: str, resolved: dict) -> None:
    _write_json(out_dir / "config.resolved.json", {"command": command, **resolved})


def _claim_run_dir(out_dir: Path, command: str) -> None:
    """One command per run directory; replays of the same command are fine."""
    cfg = out_dir / "config.resolved.json"
    if not cfg.is_file():
        return
    try:
        with open(cfg) as fh:
            previous = json.load(fh).get("command")
    except (json.JSONDecodeError, OSError):
        return
    if previous is not None and previous != command:
        raise ConfigError(f"{out_dir} already holds a '{previous}' run; use a fresh --out")


def _merge(args, config_keys: dict, defaults: dict) -> dict:
    """defaults < config file < explicit flags."""
    resolved = dict(defaults)
    if getattr(args, "config", None):
        loaded = load_config(args.config)
        loaded.pop("command", None)
        unknown = set(loaded) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        resolved.update(loaded)
    for key, attr in config_keys.items():
        value = getattr(args, attr)
        if value is not None:
            resolved[key] = value
    return resolved


# ---------------------------------------------------------------- gen-data

_GEN_DEFAULTS = {
    "kind": "gaussians",
    "classes": 10, "rho": 100.0, "n_max": 500, "dims": 16, "cluster_spread": 1.0,
    "reverse": False,
    "x0": 2.0, "y0": 2.0, "radius": 1.5, "n_pos": 500, "n_neg": 10,
    "seed": 0,
}


def cmd_gen_data(args) -> int:
    keys = {k: k for k in _GEN_DEFAULTS}
    resolved = _merge(args, keys, _GEN_DEFAULTS)
    out = Path(args.out)
    _claim_run_dir(out, "gen-data")
    if resolved["kind"] == "gaussians":
        ds = gen_lt_gaussians(
            num_classes=int(resolved["classes"]), rho=float(resolved["rho"]),
            n_max=int(resolved["n_max"]), dims=int(resolved["dims"]),
            cluster_spread=float(resolved["cluster_spread"]),
            seed=int(resolved["seed"]), reverse=bool(resolved["reverse"]))
    elif resolved["kind"] == "circles":
        ds = gen_two_circles(TwoCircleSpec(
            center=(float(resolved["x0"]), float(resolved["y0"])),
            radius=float(resolved["radius"]), n_pos=int(resolved["n_pos"]),
            n_neg=int(resolved["n_neg"]), seed=int(resolved["seed"])))
    else:
        raise ConfigError(f"kind must be 'gaussians' or 'circles', got {resolved['kind']!r}")
    tmp = out / "data.csv.part"
    out.mkdir(parents=True, exist_ok=True)
    save_csv(ds, tmp)
    os.replace(tmp, out / "data.csv")
    _write_json(out / "meta.json", {**resolved,
                                    "num_samples": ds.num_samples,
                                    "class_counts": ds.class_counts.tolist()})
    _write_resolved(out, "gen-data", resolved)
    return 0


# -------------------------------------------------------------- verify-dist

_VERIFY_DEFAULTS = {
    "classes": 100, "rho": 200.0, "tau": -1.0, "alpha": 0.5,
    "mode": "full", "trials": 1_000_000, "seed": 7, "resolution": 0, "streams": 4,
}

_MODE_ALIASES = {"mixup": "vanilla_mixup", "factor": "unimix_factor_only",
                 "full": "unimix_full"}


def _closed_form_histogram(spec: LTSpec, mode: str) -> np.ndarray:
    """Per-class closed-form mass: the continuous density sampled at the
    integer class indices and renormalized over the grid."""
    if mode == "vanilla_mixup":
        return discrete_lt_prior(spec)
    grid = np.arange(1, spec.num_classes + 1, dtype=np.float64)
    fn = factor_density if mode == "unimix_factor_only" else unimix_density
    values = np.asarray(fn(grid, spec))
    return values / values.sum()


def cmd_verify_dist(args) -> int:
    keys = {k: k for k in _VERIFY_DEFAULTS}
    resolved = _merge(args, keys, _VERIFY_DEFAULTS)
    if resolved["mode"] not in _MODE_ALIASES and resolved["mode"] not in MIX_MODES:
        raise ConfigError(f"mode must be one of {sorted(_MODE_ALIASES)}")
    mode = _MODE_ALIASES.get(resolved["mode"], resolved["mode"])
    classes, rho, tau = int(resolved["classes"]), float(resolved["rho"]), float(resolved["tau"])
    resolution = int(resolved["resolution"]) or classes
    resolved["resolution"] = resolution
    spec = LTSpec(num_classes=classes, rho=rho, tau=tau)
    out = Path(args.out)
    _claim_run_dir(out, "verify-dist")

    curves = emit_density_curves(spec, resolution)
    curve_rows = [(c.kind, y, d) for c in curves for y, d in zip(c.y, c.density)]
    _write_csv(out / "curves.csv", ["kind", "y", "density"], curve_rows)

    config = MixConfig(alpha=float(resolved["alpha"]), mode=mode, tau=tau)
    hist = mc_xi_aug_histogram(discrete_lt_prior(spec), config,
                               int(resolved["trials"]), int(resolved["seed"]),
                               streams=int(resolved["streams"]))
    closed = _closed_form_histogram(spec, mode)
    hist_rows = [(k + 1, hist[k], closed[k]) for k in range(classes)]
    _write_csv(out / "histogram.csv",
               ["class", "empirical_prob", "closed_form_prob"], hist_rows)
    _write_resolved(out, "verify-dist", resolved)
    return 0


# -------------------------------------------------------------------- train

def cmd_train(args) -> int:
    if not args.config:
        raise ConfigError("train requires --config")
    raw = load_config(args.config)
    raw.pop("command", None)
    resolved = resolve_train_config(raw)
    out = Path(args.out)
    _claim_run_dir(out, "train")
    ds, cfg = build_training_run(resolved)
    params, log = train_two_phase(ds, cfg)
    out.mkdir(parents=True, exist_ok=True)
    tmp = out / "model.json.part"
    save_model(params, tmp)
    os.replace(tmp, out / "model.json")
    _write_csv(out / "train_log.csv", ["step", "phase", "loss", "lr"], log)
    _write_resolved(out, "train", resolved)
    return 0


# --------------------------------------------------------------------- eval

_EVAL_DEFAULTS = {"model": "", "data": "", "bins": 15, "ranges": 15,
                  "tace_threshold": 1e-3, "density_batch": 100}


def cmd_eval(args) -> int:
    keys = {k: k for k in _EVAL_DEFAULTS}
    resolved = _merge(args, keys, _EVAL_DEFAULTS)
    if not resolved["model"] or not resolved["data"]:
        raise ConfigError("eval requires --model and --data")
    _claim_run_dir(Path(args.out), "eval")
    params = load_model(resolved["model"])
    ds = load_csv(resolved["data"])
    if ds.dims != params.layer_dims[0]:
        raise ConfigError(f"data has {ds.dims} features but the model expects "
                          f"{params.layer_dims[0]}")
    if ds.num_classes > params.layer_dims[-1]:
        raise ConfigError(f"data has {ds.num_classes} classes but the model emits "
                          f"{params.layer_dims[-1]} logits")
    preds = predict_proba(params, ds.features)
    labels = ds.labels
    report = calibration.evaluate_predictions(
        preds, labels, num_bins=int(resolved["bins"]),
        num_ranges=int(resolved["ranges"]),
        tace_threshold=float(resolved["tace_threshold"]),
        density_batch=int(resolved["density_batch"]))
    out = Path(args.out)
    _write_json(out / "report.json", report.scalars())
    _write_csv(out / "reliability.csv", ["bin_lo", "bin_hi", "count", "acc", "conf"],
               report.reliability)
    c = report.confusion.shape[0]
    header = ["true"] + [f"pred_{k}" for k in range(c)]
    _write_csv(out / "confusion.csv", header,
               [(k, *report.confusion[k]) for k in range(c)])
    _write_csv(out / "confusion_log.csv", header,
               [(k, *report.confusion_log[k]) for k in range(c)])
    _write_csv(out / "density.csv", ["batch", "conf", "acc"],
               [(i, s.confidence, s.accuracy) for i, s in enumerate(report.density)])
    _write_resolved(out, "eval", resolved)
    return 0


# ------------------------------------------------------------- circles-demo

_CIRCLES_DEFAULTS = {
    "x0": 2.0, "y0": 2.0, "radius": 1.5, "n_pos": 500, "n_neg": 10, "seed": 0,
    "steps": 400, "batch_size": 64, "lr": 0.5, "cloud_points": 300,
}


def cmd_circles_demo(args) -> int:
    keys = {k: k for k in _CIRCLES_DEFAULTS}
    resolved = _merge(args, keys, _CIRCLES_DEFAULTS)
    _claim_run_dir(Path(args.out), "circles-demo")
    spec = TwoCircleSpec(center=(float(resolved["x0"]), float(resolved["y0"])),
                         radius=float(resolved["radius"]), n_pos=int(resolved["n_pos"]),
                         n_neg=int(resolved["n_neg"]), seed=int(resolved["seed"]))
    results = run_all_scenarios(spec, steps=int(resolved["steps"]),
                                batch_size=int(resolved["batch_size"]),
                                lr=float(resolved["lr"]))
    out = Path(args.out)
    _write_csv(out / "boundary.csv",
               ["scenario", "w0", "w1", "b", "angle_error_deg", "offset"],
               [(r.scenario, r.weight[0], r.weight[1], r.bias,
                 r.angle_error_deg, r.offset) for r in results])
    point_rows = []
    for scenario in SCENARIOS:
        data_spec = replace(spec, n_neg=spec.n_pos) if scenario == "balanced" else spec
        ds = gen_two_circles(data_spec)
        for (x, y), label in zip(ds.features, ds.labels):
            point_rows.append((scenario, x, y, int(label), 0))
        cloud = virtual_cloud(ds, scenario, int(resolved["cloud_points"]),
                              int(resolved["seed"]))
        for x, y, label in cloud:
            point_rows.append((scenario, x, y, int(label), 1))
    _write_csv(out / "points.csv", ["scenario", "x", "y", "label", "is_virtual"],
               point_rows)
    _write_resolved(out, "circles-demo", resolved)
    return 0


# ------------------------------------------------------------------- report

_SUMMARY_FIELDS = ["accuracy", "ece", "mce", "ace", "tace", "sce", "brier"]


def _training_metadata(run_dir: Path) -> tuple[str, str]:
    """Loss kind and mix mode for a run: from its own resolved config, or
    from the training run its eval config points at via the model path."""
    cfg_path = run_dir / "config.resolved.json"
    for _ in range(2):
        if not cfg_path.is_file():
            return "", ""
        try:
            with open(cfg_path) as fh:
                cfg = json.load(fh)
        except (json.JSONDecodeError, OSError):
            print(f"warning: {run_dir.name}: unreadable config.resolved.json",
                  file=sys.stderr)
            return "", ""
        if "loss" in cfg:
            return cfg.get("loss", ""), cfg.get("mix_mode", "")
        if not cfg.get("model"):
            return "", ""
        cfg_path = Path(cfg["model"]).parent / "config.resolved.json"
    return "", ""


def cmd_report(args) -> int:
    runs = Path(args.runs)
    if not runs.is_dir():
        raise ConfigError(f"{runs} is not a directory")
    rows = []
    for run_dir in sorted(p for p in runs.iterdir() if p.is_dir()):
        report_path = run_dir / "report.json"
        if not report_path.is_file():
            print(f"warning: {run_dir.name}: no report.json, skipped", file=sys.stderr)
            continue
        try:
            with open(report_path) as fh:
                scalars = json.load(fh)
        except (json.JSONDecodeError, OSError) as exc:
            print(f"warning: {run_dir.name}: unreadable report.json ({exc}), skipped",
                  file=sys.stderr)
            continue
        loss, mix_mode = _training_metadata(run_dir)
        rows.append({"run": run_dir.name, "loss": loss, "mix_mode": mix_mode,
                     **{k: scalars.get(k) for k in _SUMMARY_FIELDS}})
    if not rows:
        raise ConfigError(f"{runs} contains no completed runs")
    out = Path(args.out) if args.out else runs
    _write_csv(out / "summary.csv", ["run", "loss", "mix_mode", *_SUMMARY_FIELDS],
               [[r["run"], r["loss"], r["mix_mode"]]
                + [("" if r[k] is None else r[k]) for k in _SUMMARY_FIELDS]
                for r in rows])
    _write_json(out / "summary.json", rows)
    return 0


# ------------------------------------------------------------------ parsing

def _add_common(sub, with_config=True, with_out=True):
    if with_config:
        sub.add_argument("--config", help="JSON config (e.g. a config.resolved.json)")
    if with_out:
        sub.add_argument("--out", required=True, help="run directory for outputs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unimix-lt",
        description="Prior-aware mixing and prior-compensated margins on "
                    "long-tailed synthetic data.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("gen-data", help="synthesize a dataset CSV plus metadata")
    _add_common(p)
    p.add_argument("--kind", choices=["gaussians", "circles"])
    p.add_argument("--classes", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--dims", type=int)
    p.add_argument("--cluster-spread", dest="cluster_spread", type=float)
    p.add_argument("--reverse", action="store_const", const=True, default=None,
                   help="reverse the class counts (reversed-LT test sets)")
    p.add_argument("--x0", type=float)
    p.add_argument("--y0", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--n-pos", dest="n_pos", type=int)
    p.add_argument("--n-neg", dest="n_neg", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_gen_data)

    p = subs.add_parser("verify-dist",
                        help="emit density curves and a Monte Carlo histogram")
    _add_common(p)
    p.add_argument("--classes", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--mode", choices=sorted(_MODE_ALIASES))
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--resolution", type=int, help="curve grid points (default: classes)")
    p.add_argument("--streams", type=int, help="Monte Carlo stream count")
    p.set_defaults(func=cmd_verify_dist)

    p = subs.add_parser("train", help="train on synthetic LT Gaussians per a JSON config")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = subs.add_parser("eval", help="evaluate a model on a dataset CSV")
    _add_common(p)
    p.add_argument("--model", help="model.json from a training run")
    p.add_argument("--data", help="dataset CSV")
    p.add_argument("--bins", type=int)
    p.add_argument("--ranges", type=int)
    p.add_argument("--tace-threshold", dest="tace_threshold", type=float)
    p.add_argument("--density-batch", dest="density_batch", type=int)
    p.set_defaults(func=cmd_eval)

    p = subs.add_parser("circles-demo", help="run the decision-boundary study")
    _add_common(p)
    p.add_argument("--x0", type=float)
    p.add_argument("--y0", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--n-pos", dest="n_pos", type=int)
    p.add_argument("--n-neg", dest="n_neg", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--cloud-points", dest="cloud_points", type=int)
    p.set_defaults(func=cmd_circles_demo)

    p = subs.add_parser("report", help="summarize completed runs into one table")
    p.add_argument("--runs", required=True, help="directory containing run directories")
    p.add_argument("--out", help="output directory (default: --runs)")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if not exc.code else 1
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
