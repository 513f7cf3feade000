"""Command-line interface.

Subcommands ``simulate``, ``fit``, ``mc``, ``predict`` and ``noise-check``
share one strict JSON configuration document.  Exit codes: 0 success,
2 configuration error, 3 noise synthesis error, 4 estimation or Riccati
failure, 5 I/O error.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import (
    ConfigurationError,
    EstimationError,
    NotPSDError,
    OrderingError,
    SchemaError,
    SingularityError,
    SynthesisError,
    VasifitError,
)
from .estimate import EstimationConfig, FitResult, fit
from .experiment import McConfig, run_mc
from .noise import NoiseSpec, fbm_covariance_zscores, quadratic_variation_ratio, sample_increments
from .ratesio import extract_increments, holdout_start, hurst_sweep, load_csv, predict_one_step, prediction_metrics_json
from .simulate import ModelParams, PathGrid, simulate_path

EXIT_OK, EXIT_CONFIG, EXIT_SYNTHESIS, EXIT_ESTIMATION, EXIT_IO = 0, 2, 3, 4, 5

DEFAULTS = {
    "model": {"theta": [[0.5, 0.0], [0.0, 0.3]], "b": [0.0, 0.0], "sigma": [1.0, 1.0]},
    "noise": {"kind": "fbm", "hurst": 0.5, "jump_rate": None, "jump_std": None},
    "estimation": {"t_upper": 5.0, "lag_step": None, "qv_window": "all_increments",
                   "clip_eps": 1e-12, "care_tol": 1e-9},
    "simulation": {"n": 10_000, "h": 0.4, "r0": None, "seed": 0},
    "mc": {"replications": 100, "workers": 1},
    "data": {"date_column": "date", "value_columns": None, "h": 1.0, "holdout_fraction": 0.2,
             "fit_on": "train", "hurst_sweep": []},
    "noise_check": {"n": 100_000, "hurst_values": [0.35, 0.5, 0.8], "qv_tolerance": 0.05,
                    "fbm_grid": 1024, "fbm_replications": 5000, "z_limit": 4.0},
    "input": None,
    "out": None,
}


def merge_config(user: dict) -> dict:
    """Overlay a user document on the defaults, rejecting unknown keys."""
    if not isinstance(user, dict):
        raise ConfigurationError("configuration must be a JSON object")
    cfg = copy.deepcopy(DEFAULTS)
    for key, value in user.items():
        if key not in DEFAULTS:
            raise ConfigurationError(f"unknown configuration key {key!r}")
        if isinstance(DEFAULTS[key], dict):
            if not isinstance(value, dict):
                raise ConfigurationError(f"{key} must be an object")
            for sub, subvalue in value.items():
                if sub not in DEFAULTS[key]:
                    raise ConfigurationError(f"unknown configuration key {key}.{sub!r}")
                cfg[key][sub] = subvalue
        else:
            cfg[key] = value
    return cfg


def load_config(path):
    if path is None:
        return merge_config({})
    try:
        with open(path, encoding="utf-8") as fh:
            user = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    return merge_config(user)


def _number(cfg, section, key, kind=float, positive=False):
    value = cfg[section][key]
    try:
        if isinstance(value, bool):
            raise TypeError
        number = kind(value)
        if kind is int and number != value:
            raise TypeError
    except (TypeError, ValueError):
        raise ConfigurationError(f"{section}.{key} must be a {kind.__name__}, got {value!r}") from None
    if positive and not number > 0:
        raise ConfigurationError(f"{section}.{key} must be > 0, got {value!r}")
    return number


def model_from(cfg) -> ModelParams:
    m = cfg["model"]
    try:
        return ModelParams(theta=m["theta"], b=m["b"], sigma=m["sigma"])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"model: {exc}") from exc


def noise_from(cfg, d) -> NoiseSpec:
    n = cfg["noise"]
    try:
        return NoiseSpec(kind=n["kind"], d=d, hurst=n["hurst"], jump_rate=n["jump_rate"], jump_std=n["jump_std"])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"noise: {exc}") from exc


def estimation_from(cfg) -> EstimationConfig:
    e = cfg["estimation"]
    try:
        return EstimationConfig(
            t_upper=_number(cfg, "estimation", "t_upper", positive=True),
            lag_step=None if e["lag_step"] is None else _number(cfg, "estimation", "lag_step", positive=True),
            qv_window=e["qv_window"],
            clip_eps=_number(cfg, "estimation", "clip_eps"),
            care_tol=_number(cfg, "estimation", "care_tol", positive=True),
        )
    except TypeError as exc:
        raise ConfigurationError(f"estimation: {exc}") from exc


def _write_json(path, data):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _reproducible(cfg):
    # the worker count never changes results, so it is left out of the record
    cfg = copy.deepcopy(cfg)
    del cfg["mc"]["workers"]
    return cfg


def _sidecar(out_path, cfg, command):
    _write_json(str(out_path) + ".config.json", {"command": command, "config": _reproducible(cfg)})


def _resolve_out(args, cfg, default):
    return Path(args.out or cfg["out"] or default)


def cmd_simulate(cfg, out_path):
    params = model_from(cfg)
    spec = noise_from(cfg, params.d)
    n = _number(cfg, "simulation", "n", int, positive=True)
    h = _number(cfg, "simulation", "h", positive=True)
    seed = _number(cfg, "simulation", "seed", int)
    r0 = cfg["simulation"]["r0"]
    inc = sample_increments(spec, n, h, seed)
    path = simulate_path(params, inc, r0)
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    path.to_csv(out_path)
    _sidecar(out_path, cfg, "simulate")
    if path.diagnostics["stability_warning"]:
        print(f"warning: h*||theta|| = {path.diagnostics['stiffness']:.3g} >= 2, Euler scheme is unstable",
              file=sys.stderr)
    return EXIT_OK


def cmd_fit(cfg, in_path, out_path):
    path = PathGrid.from_csv(in_path)
    spec = noise_from(cfg, path.d)
    est = estimation_from(cfg)
    _sidecar(out_path, cfg, "fit")
    try:
        result = fit(path, spec, est)
    except (EstimationError, SingularityError, NotPSDError) as exc:
        _write_json(out_path, {"error": f"{type(exc).__name__}: {exc}",
                               "diagnostics": getattr(exc, "diagnostics", {})})
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    result.to_json(out_path)
    return EXIT_OK


def cmd_mc(cfg, out_dir):
    params = model_from(cfg)
    mc = McConfig(
        params=params,
        spec=noise_from(cfg, params.d),
        replications=_number(cfg, "mc", "replications", int, positive=True),
        n=_number(cfg, "simulation", "n", int, positive=True),
        h=_number(cfg, "simulation", "h", positive=True),
        cfg=estimation_from(cfg),
        master_seed=_number(cfg, "simulation", "seed", int),
        workers=_number(cfg, "mc", "workers", int, positive=True),
        r0=cfg["simulation"]["r0"],
    )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "config.json", {"command": "mc", "config": _reproducible(cfg)})
    report = run_mc(mc)
    report.to_json(out_dir / "report.json")
    report.write_table_csv(out_dir / "replications.csv")
    report.write_histograms_csv(out_dir / "histograms.csv")
    return EXIT_OK


def cmd_predict(cfg, data_path, out_path):
    data = cfg["data"]
    fraction = _number(cfg, "data", "holdout_fraction")
    if not 0 < fraction < 1:
        raise ConfigurationError(f"data.holdout_fraction must be in (0, 1), got {fraction}")
    if data["fit_on"] not in ("train", "all"):
        raise ConfigurationError(f"data.fit_on must be 'train' or 'all', got {data['fit_on']!r}")
    series = load_csv(data_path, data["date_column"], data["value_columns"],
                      _number(cfg, "data", "h", positive=True))
    spec = noise_from(cfg, series.d)
    est = estimation_from(cfg)
    out_path = Path(out_path)
    metrics_path = out_path.with_name(out_path.name + ".metrics.json")
    _sidecar(out_path, cfg, "predict")
    train = series.head(holdout_start(series.n + 1, fraction)) if data["fit_on"] == "train" else series
    try:
        result = fit(train.to_path(), spec, est)
    except (EstimationError, SingularityError, NotPSDError) as exc:
        _write_json(metrics_path, {"error": f"{type(exc).__name__}: {exc}",
                                   "diagnostics": getattr(exc, "diagnostics", {})})
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    report = predict_one_step(result, series, fraction)
    report.to_csv(out_path)
    increments = extract_increments(result, train)
    extra = {
        "fit": result.to_dict(),
        "dropped_rows": series.dropped,
        "fit_on": data["fit_on"],
        "increment_mean": increments.values.mean(axis=1).tolist(),
        "increment_std": increments.values.std(axis=1, ddof=1).tolist(),
    }
    if data["hurst_sweep"]:
        extra["hurst_sweep"] = {str(k): v for k, v in hurst_sweep(train, data["hurst_sweep"], est).items()}
    prediction_metrics_json(report, extra, metrics_path)
    return EXIT_OK


def cmd_noise_check(cfg, out_path, seed):
    nc = cfg["noise_check"]
    n = _number(cfg, "noise_check", "n", int, positive=True)
    tol = _number(cfg, "noise_check", "qv_tolerance", positive=True)
    z_limit = _number(cfg, "noise_check", "z_limit", positive=True)
    d = len(cfg["model"]["b"])
    results = {"qv_ratio": {}, "fbm_covariance": {}}
    for H in nc["hurst_values"]:
        spec = NoiseSpec(kind="fbm", d=d, hurst=H)
        ratio = quadratic_variation_ratio(spec, n, seed)
        dev = float(np.max(np.abs(ratio - np.eye(d))))
        results["qv_ratio"][str(H)] = {"ratio": ratio.tolist(), "max_abs_deviation": dev, "pass": dev <= tol}
        if nc["fbm_replications"]:
            z = fbm_covariance_zscores(H, _number(cfg, "noise_check", "fbm_grid", int, positive=True),
                                       _number(cfg, "noise_check", "fbm_replications", int, positive=True), seed)
            zmax = float(np.max(np.abs(z)))
            results["fbm_covariance"][str(H)] = {"max_abs_z": zmax, "pass": zmax <= z_limit}
    _write_json(out_path, results)
    _sidecar(out_path, cfg, "noise-check")
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--seed", type=int, help="master seed (overrides simulation.seed)")
    common.add_argument("--out", help="output file, or directory for mc")
    common.add_argument("--workers", type=int, help="worker processes for mc (default $VASIFIT_WORKERS)")
    common.add_argument("--replications", type=int, help="Monte Carlo replications")

    parser = argparse.ArgumentParser(prog="vasifit", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="simulate one path to CSV")
    p = sub.add_parser("fit", parents=[common], help="fit a path CSV")
    p.add_argument("input", nargs="?", help="path CSV (t,r1,...,rd)")
    sub.add_parser("mc", parents=[common], help="Monte Carlo replication study")
    p = sub.add_parser("predict", parents=[common], help="fit rate data and forecast the holdout")
    p.add_argument("input", nargs="?", help="rate CSV with a date column")
    sub.add_parser("noise-check", parents=[common], help="noise generator diagnostics")
    return parser


def _apply_overrides(cfg, args):
    if args.seed is not None:
        cfg["simulation"]["seed"] = args.seed
    if args.replications is not None:
        cfg["mc"]["replications"] = args.replications
    if args.workers is not None:
        cfg["mc"]["workers"] = args.workers
    elif os.environ.get("VASIFIT_WORKERS"):
        try:
            cfg["mc"]["workers"] = int(os.environ["VASIFIT_WORKERS"])
        except ValueError:
            raise ConfigurationError(f"VASIFIT_WORKERS must be an integer, got {os.environ['VASIFIT_WORKERS']!r}")
    return cfg


def _input_path(args, cfg):
    path = getattr(args, "input", None) or cfg["input"]
    if not path:
        raise ConfigurationError(f"{args.command} needs an input file")
    return path


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        if args.command == "simulate":
            return cmd_simulate(cfg, _resolve_out(args, cfg, "path.csv"))
        if args.command == "fit":
            return cmd_fit(cfg, _input_path(args, cfg), _resolve_out(args, cfg, "fit.json"))
        if args.command == "mc":
            return cmd_mc(cfg, _resolve_out(args, cfg, "mc_out"))
        if args.command == "predict":
            return cmd_predict(cfg, _input_path(args, cfg), _resolve_out(args, cfg, "predictions.csv"))
        seed = _number(cfg, "simulation", "seed", int)
        return cmd_noise_check(cfg, _resolve_out(args, cfg, "noise_check.json"), seed)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SynthesisError as exc:
        print(f"synthesis error: {exc}", file=sys.stderr)
        return EXIT_SYNTHESIS
    except (SchemaError, OrderingError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (EstimationError, SingularityError, NotPSDError) as exc:
        print(f"estimation error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except VasifitError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
