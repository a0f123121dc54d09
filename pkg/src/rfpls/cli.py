"""Command-line front end: ``rfpls {fit,predict,select,bootstrap,simulate,evaluate}``.

Every subcommand takes an optional ``--config`` JSON file whose keys mirror the
long flags (dashes become underscores); explicit flags win. The fully resolved
configuration is written to ``<out_dir>/<command>_manifest.json``, and that
file can be passed back through ``--config`` to repeat the run.

Exit codes: 0 success, 2 input/parse error, 3 numerical or fit error, 4 usage error.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Any, Callable, Optional

import numpy as np

from . import __version__
from .bootstrap import bootstrap_bands, coverage, cpd, interval_score
from .exceptions import DomainError, InvalidArgumentError, NumericalError, ParseError, RfplsError
from .fflr import METHODS, ModelSpec, predict_response, select_ncomp_tmape
from .funcdata import FunctionalSample, Grid, gcv_select_nbasis
from .io import (
    dump_json,
    load_json,
    load_model,
    read_curves,
    read_flags,
    save_model,
    write_band,
    write_curves,
    write_flags,
)
from .metrics import mape, mdape, mse_trimmed, r2
from .simlab import ScenarioConfig, gen_fpc_dataset, generate_case
from .simpls import IrsimplsConfig

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_USAGE = 0, 2, 3, 4


class UsageError(Exception):
    """Bad command-line usage or an out-of-range configuration value."""


# key validators -------------------------------------------------------------

def _int(lo=None):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, int):
            raise UsageError("must be an integer")
        if lo is not None and v < lo:
            raise UsageError(f"must be >= {lo}")
        return v
    return check


def _real(lo=None, hi=None, lo_open=False, hi_open=False):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise UsageError("must be a number")
        v = float(v)
        if not np.isfinite(v):
            raise UsageError("must be finite")
        if lo is not None and (v <= lo if lo_open else v < lo):
            raise UsageError(f"must be {'>' if lo_open else '>='} {lo}")
        if hi is not None and (v >= hi if hi_open else v > hi):
            raise UsageError(f"must be {'<' if hi_open else '<='} {hi}")
        return v
    return check


def _choice(*options):
    def check(v):
        if v not in options:
            raise UsageError(f"must be one of {', '.join(map(str, options))}")
        return v
    return check


def _optional(inner):
    return lambda v: None if v is None else inner(v)


def _bool(v):
    if not isinstance(v, bool):
        raise UsageError("must be true or false")
    return v


def _path(v):
    if not isinstance(v, str) or not v:
        raise UsageError("must be a non-empty path string")
    return v


def _paths(v):
    if isinstance(v, str):
        v = [v]
    if not isinstance(v, list) or not v or not all(isinstance(p, str) and p for p in v):
        raise UsageError("must be a non-empty list of paths")
    return list(v)


def _basis_count(v):
    if v == "gcv":
        return v
    if isinstance(v, list):
        return [_int(1)(x) for x in v]
    return _int(1)(v)


def _int_list(v):
    if not isinstance(v, list) or not v:
        raise UsageError("must be a non-empty list of integers")
    return [_int(1)(x) for x in v]


def _real_list(length=None):
    def check(v):
        if not isinstance(v, list) or (length is not None and len(v) != length):
            raise UsageError(f"must be a list of {length} numbers" if length else "must be a list of numbers")
        return [_real()(x) for x in v]
    return check


Key = tuple  # (default, validator, required)

MODEL_KEYS: dict[str, Key] = {
    "method": ("irsimpls", _choice(*METHODS), False),
    "k_y": (10, lambda v: v if v == "gcv" else _int(1)(v), False),
    "k_x": (10, _basis_count, False),
    "k_candidates": (None, _optional(_int_list), False),
    "order": (4, _int(1), False),
    "h": (None, _optional(_int(1)), False),
    "h_max": (10, _int(1), False),
    "q": (0.8, _real(0.0, 1.0, lo_open=True), False),
    "split_seed": (0, _int(0), False),
    "gamma": (1.0, _real(0.0, lo_open=True), False),
    "n_starts": (5, _int(1), False),
    "subsample_size": (None, _optional(_int(2)), False),
    "convergence_tol": (1e-4, _real(0.0, lo_open=True), False),
    "max_reweight_iters": (50, _int(0), False),
    "raf": ("plain", _choice("plain", "lindsay"), False),
}

SCHEMAS: dict[str, dict[str, Key]] = {
    "fit": {**MODEL_KEYS, "response": (None, _path, True), "predictors": (None, _paths, True),
            "seed": (0, _int(0), False), "out_dir": (".", _path, False)},
    "select": {**MODEL_KEYS, "response": (None, _path, True), "predictors": (None, _paths, True),
               "seed": (0, _int(0), False), "out_dir": (".", _path, False)},
    "predict": {"model": (None, _path, True), "predictors": (None, _paths, True),
                "t_grid": (None, _optional(_real_list()), False), "out_dir": (".", _path, False)},
    "bootstrap": {**MODEL_KEYS, "response": (None, _path, True), "predictors": (None, _paths, True),
                  "test_predictors": (None, _paths, True),
                  "test_response": (None, _optional(_path), False),
                  "alpha": (0.05, _real(0.0, 1.0, lo_open=True, hi_open=True), False),
                  "B": (200, _int(2), False),
                  "residuals": ("smoothed", _choice("smoothed", "raw"), False),
                  "reselect_h": (False, _bool, False),
                  "seed": (None, _int(0), True), "out_dir": (".", _path, False)},
    "simulate": {"scenario": ("independent", _choice("independent", "lagged", "fpc-s1", "fpc-s2"), False),
                 "n": (500, _int(2), False), "n_train": (200, _int(1), False),
                 "grid_size": (100, _int(2), False), "lag": (4, _int(0), False),
                 "contaminate": (0.0, _real(0.0, 0.5, hi_open=True), False),
                 "ou_params": ([0.0, 5.0, 2.0], _real_list(3), False),
                 "noise_sd": (2.0, _real(0.0), False),
                 "seed": (None, _int(0), True), "out_dir": (".", _path, False)},
    "evaluate": {"truth": (None, _path, True), "predictions": (None, _path, True),
                 "flags": (None, _optional(_path), False),
                 "contamination": (0.2, _real(0.0, 1.0, hi_open=True), False),
                 "out_dir": (".", _path, False)},
}


def resolve_config(command: str, file_config: Optional[dict], overrides: dict) -> dict:
    """Merge defaults, the config file and explicit flags (in that order) and validate."""
    schema = SCHEMAS[command]
    file_config = dict(file_config or {})
    if "command" in file_config and "config" in file_config:  # a manifest from an earlier run
        if file_config["command"] != command:
            raise UsageError(f"manifest was written by '{file_config['command']}', not '{command}'")
        file_config = dict(file_config["config"])
    unknown = sorted(set(file_config) - set(schema))
    if unknown:
        raise ParseError(f"unknown configuration key(s): {', '.join(unknown)}")
    merged = {k: spec[0] for k, spec in schema.items()}
    merged.update(file_config)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    out = {}
    for key, (_, check, required) in schema.items():
        value = merged[key]
        if value is None:
            if required:
                raise UsageError(f"'{key}' is required for '{command}'")
            out[key] = None
            continue
        try:
            out[key] = check(value)
        except UsageError as exc:
            raise UsageError(f"'{key}' {exc}") from None
    return out


# argument parsing -------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_numbers(cast: Callable) -> Callable:
    def parse(text):
        try:
            return [cast(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    return parse


def _basis_arg(text):
    if text == "gcv":
        return text
    vals = _csv_numbers(int)(text)
    return vals[0] if len(vals) == 1 else vals


def _add_model_flags(p):
    g = p.add_argument_group("model")
    g.add_argument("--method", choices=METHODS)
    g.add_argument("--k-y", type=_basis_arg, help="response basis size, or 'gcv'")
    g.add_argument("--k-x", type=_basis_arg, help="predictor basis size(s), comma list, or 'gcv'")
    g.add_argument("--k-candidates", type=_csv_numbers(int), help="candidate sizes for 'gcv'")
    g.add_argument("--order", type=int)
    g.add_argument("--h", type=int, help="number of components (default: chosen by trimmed MAPE)")
    g.add_argument("--h-max", type=int)
    g.add_argument("--q", type=float, help="trimming proportion kept by the selection criterion")
    g.add_argument("--split-seed", type=int)
    g.add_argument("--gamma", type=float)
    g.add_argument("--n-starts", type=int)
    g.add_argument("--subsample-size", type=int)
    g.add_argument("--convergence-tol", type=float)
    g.add_argument("--max-reweight-iters", type=int)
    g.add_argument("--raf", choices=("plain", "lindsay"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rfpls", description="Robust PLS for function-on-function regression.")
    parser.add_argument("--version", action="version", version=f"rfpls {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def command(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="JSON configuration or an earlier manifest")
        p.add_argument("--out-dir")
        return p

    p = command("fit", "Fit a model and write model.json, fit_report.json and fitted.csv.")
    p.add_argument("--response", "-y")
    p.add_argument("--predictor", "-x", dest="predictors", action="append")
    p.add_argument("--seed", type=int)
    _add_model_flags(p)

    p = command("select", "Choose the number of PLS components by trimmed MAPE.")
    p.add_argument("--response", "-y")
    p.add_argument("--predictor", "-x", dest="predictors", action="append")
    p.add_argument("--seed", type=int)
    _add_model_flags(p)

    p = command("predict", "Predict response curves from a saved model.")
    p.add_argument("--model", "-m")
    p.add_argument("--predictor", "-x", dest="predictors", action="append")
    p.add_argument("--t-grid", type=_csv_numbers(float), help="comma-separated output grid")

    p = command("bootstrap", "Pointwise bootstrap prediction bands for test curves.")
    p.add_argument("--response", "-y")
    p.add_argument("--predictor", "-x", dest="predictors", action="append")
    p.add_argument("--test-predictor", dest="test_predictors", action="append")
    p.add_argument("--test-response")
    p.add_argument("--alpha", type=float)
    p.add_argument("--B", "--n-boot", dest="B", type=int)
    p.add_argument("--residuals", choices=("smoothed", "raw"))
    p.add_argument("--reselect-h", action="store_const", const=True)
    p.add_argument("--seed", type=int)
    _add_model_flags(p)

    p = command("simulate", "Generate a simulated dataset.")
    p.add_argument("--scenario", choices=("independent", "lagged", "fpc-s1", "fpc-s2"))
    p.add_argument("--n", type=int)
    p.add_argument("--n-train", type=int)
    p.add_argument("--grid-size", type=int)
    p.add_argument("--lag", type=int)
    p.add_argument("--contaminate", type=float, help="outlier proportion in the training sample")
    p.add_argument("--ou-params", type=_csv_numbers(float), help="rho,theta,sigma")
    p.add_argument("--noise-sd", type=float)
    p.add_argument("--seed", type=int)

    p = command("evaluate", "Score predictions against observed curves.")
    p.add_argument("--truth")
    p.add_argument("--predictions")
    p.add_argument("--flags")
    p.add_argument("--contamination", type=float)
    return parser


# commands ------------------------------------------------------------------------

def _out(cfg, name):
    os.makedirs(cfg["out_dir"], exist_ok=True)
    return os.path.join(cfg["out_dir"], name)


def _read_predictors(paths) -> list:
    return [read_curves(p, label=f"X{i + 1}") for i, p in enumerate(paths)]


def _gcv_sizes(cfg, Y: FunctionalSample, X: list):
    """Replace 'gcv' basis sizes by their GCV choices; returns the sizes and the scores."""
    cands = cfg["k_candidates"] or list(range(max(cfg["order"], 4), 21))
    scores = {}
    k_y = cfg["k_y"]
    if k_y == "gcv":
        k_y, s = gcv_select_nbasis(Y, [k for k in cands if k >= cfg["order"]], cfg["order"])
        scores["response"] = {str(k): v for k, v in s.items()}
    k_x = cfg["k_x"]
    if k_x == "gcv":
        k_x = []
        for i, x in enumerate(X):
            k, s = gcv_select_nbasis(x, [c for c in cands if c >= cfg["order"]], cfg["order"])
            k_x.append(k)
            scores[f"X{i + 1}"] = {str(c): v for c, v in s.items()}
    return k_y, k_x, scores


def _irsimpls_config(cfg) -> IrsimplsConfig:
    return IrsimplsConfig(gamma=cfg["gamma"], subsample_size=cfg["subsample_size"],
                          n_starts=cfg["n_starts"], convergence_tol=cfg["convergence_tol"],
                          max_reweight_iters=cfg["max_reweight_iters"], raf=cfg["raf"])


def _load_training(cfg):
    Y = read_curves(cfg["response"], label="Y")
    X = _read_predictors(cfg["predictors"])
    for x in X:
        if x.n != Y.n:
            raise InvalidArgumentError(
                f"{cfg['response']} has {Y.n} curves but a predictor file has {x.n}")
    return Y, X


def _model_spec(cfg, Y, X, report) -> ModelSpec:
    """Resolve basis sizes and the component count into a refittable spec."""
    k_y, k_x, gcv = _gcv_sizes(cfg, Y, X)
    if gcv:
        report["gcv"] = gcv
    k_x = tuple(k_x) if isinstance(k_x, list) else k_x
    report["k_y"], report["k_x"] = k_y, (list(k_x) if isinstance(k_x, tuple) else k_x)
    ir = _irsimpls_config(cfg)
    h = cfg["h"]
    if cfg["method"] != "ls" and h is None:
        h, tm = select_ncomp_tmape(Y, X, cfg["method"], cfg["h_max"], cfg["q"], cfg["split_seed"],
                                   k_y=k_y, k_x=k_x, order=cfg["order"], irsimpls=ir, seed=cfg["seed"])
        report["tmape"] = [None if not np.isfinite(v) else float(v) for v in tm]
    report["h"] = None if cfg["method"] == "ls" else int(h)
    return ModelSpec(cfg["method"], None if cfg["method"] == "ls" else h, k_y, k_x,
                     cfg["order"], ir, cfg["seed"])


def _weight_summary(w) -> dict:
    w = np.asarray(w)
    return {"min": float(w.min()), "median": float(np.median(w)), "mean": float(w.mean()),
            "n_below_half": int(np.count_nonzero(w < 0.5))}


def cmd_fit(cfg) -> dict:
    Y, X = _load_training(cfg)
    report: dict = {"method": cfg["method"], "n": Y.n, "n_predictors": len(X)}
    spec = _model_spec(cfg, Y, X, report)
    model = spec.fit(Y, X)
    fit = model.fit
    if fit is not None:
        report.update(converged=bool(fit.converged), n_reweight_iters=int(fit.n_reweight_iters),
                      objective=float(fit.objective), weights=_weight_summary(fit.obs_weights),
                      diagnostics=list(fit.diagnostics))
    save_model(_out(cfg, "model.json"), model)
    write_curves(_out(cfg, "fitted.csv"), predict_response(model, X))
    dump_json(_out(cfg, "fit_report.json"), report)
    return report


def cmd_select(cfg) -> dict:
    if cfg["method"] == "ls":
        raise UsageError("component selection applies to simpls and irsimpls")
    Y, X = _load_training(cfg)
    report: dict = {"method": cfg["method"], "h_max": cfg["h_max"], "q": cfg["q"]}
    cfg = dict(cfg, h=None)
    _model_spec(cfg, Y, X, report)
    dump_json(_out(cfg, "select_report.json"), report)
    return report


def cmd_predict(cfg) -> dict:
    model = load_model(cfg["model"])
    X = _read_predictors(cfg["predictors"])
    if len(X) != model.n_predictors:
        raise InvalidArgumentError(f"model has {model.n_predictors} predictors, got {len(X)} files")
    t_grid = None if cfg["t_grid"] is None else Grid(np.asarray(cfg["t_grid"]))
    pred = predict_response(model, X, t_grid)
    write_curves(_out(cfg, "predictions.csv"), pred)
    return {"n": pred.n, "grid_size": len(pred.grid)}


def cmd_bootstrap(cfg) -> dict:
    Y, X = _load_training(cfg)
    Xt = _read_predictors(cfg["test_predictors"])
    if len(Xt) != len(X):
        raise InvalidArgumentError("training and test predictor counts differ")
    report: dict = {"method": cfg["method"], "alpha": cfg["alpha"], "B": cfg["B"]}
    spec = _model_spec(cfg, Y, X, report)
    band = bootstrap_bands(spec, Y, X, Xt, alpha=cfg["alpha"], B=cfg["B"], seed=cfg["seed"],
                           residuals=cfg["residuals"], reselect_h=cfg["reselect_h"],
                           H_max=cfg["h_max"], q=cfg["q"])
    write_band(_out(cfg, "band"), band, Xt[0].ids)
    if cfg["test_response"] is not None:
        Yt = read_curves(cfg["test_response"], label="Y")
        report.update(coverage=coverage(band, Yt), cpd=cpd(band, Yt),
                      interval_score=interval_score(band, Yt))
    dump_json(_out(cfg, "bootstrap_report.json"), report)
    return report


def cmd_simulate(cfg) -> dict:
    files = []

    def emit(name, sample, ids=None):
        s = sample if ids is None else FunctionalSample(sample.grid, sample.values, sample.label, ids)
        write_curves(_out(cfg, name), s)
        files.append(name)

    if cfg["scenario"].startswith("fpc"):
        ds = gen_fpc_dataset("S1" if cfg["scenario"] == "fpc-s1" else "S2", n=cfg["n"],
                             grid_size=cfg["grid_size"], seed=cfg["seed"],
                             contamination_rate=cfg["contaminate"])
        emit("Y_train.csv", ds.Y_train)
        emit("X1_train.csv", ds.X_train[0])
    else:
        ds = generate_case(ScenarioConfig(
            n=cfg["n"], n_train=cfg["n_train"], grid_size=cfg["grid_size"], scenario=cfg["scenario"],
            lag=cfg["lag"], contamination_rate=cfg["contaminate"], ou_params=tuple(cfg["ou_params"]),
            noise_sd=cfg["noise_sd"], seed=cfg["seed"]))
        emit("Y_train.csv", ds.Y_train)
        for m, x in enumerate(ds.X_train, start=1):
            emit(f"X{m}_train.csv", x)
        if ds.Y_test is not None:
            ids = tuple(str(i) for i in range(cfg["n_train"] + 1, cfg["n"] + 1))
            emit("Y_test.csv", ds.Y_test, ids)
            for m, x in enumerate(ds.X_test, start=1):
                emit(f"X{m}_test.csv", x, ids)
    write_flags(_out(cfg, "flags.csv"), ds.flags, ds.Y_train.ids)
    files.append("flags.csv")
    return {"files": files, "n_outliers": int(ds.flags.sum())}


def cmd_evaluate(cfg) -> dict:
    Y = read_curves(cfg["truth"], label="Y")
    Yh = read_curves(cfg["predictions"], label="prediction")
    if Y.grid != Yh.grid or Y.n != Yh.n:
        raise InvalidArgumentError("truth and predictions must share grid and curve count")
    metrics = {"n": Y.n, "mape": mape(Y, Yh), "mdape": mdape(Y, Yh),
               "r2": r2(Y, Yh) if Y.n > 1 else None}
    if cfg["flags"] is not None:
        metrics["mse_trimmed"] = mse_trimmed(Y, Yh, read_flags(cfg["flags"]), cfg["contamination"])
    dump_json(_out(cfg, "metrics.json"), metrics)
    return metrics


COMMANDS: dict[str, Callable[[dict], Any]] = {
    "fit": cmd_fit, "select": cmd_select, "predict": cmd_predict,
    "bootstrap": cmd_bootstrap, "simulate": cmd_simulate, "evaluate": cmd_evaluate,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        file_cfg = load_json(args.config) if args.config else None
        if file_cfg is not None and not isinstance(file_cfg, dict):
            raise ParseError("configuration must be a JSON object", args.config)
        cfg = resolve_config(command, file_cfg, overrides)
        result = COMMANDS[command](cfg)
        dump_json(_out(cfg, f"{command}_manifest.json"),
                  {"command": command, "config": cfg, "version": __version__})
    except UsageError as exc:
        print(f"rfpls {command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"rfpls {command}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DomainError, NumericalError) as exc:
        print(f"rfpls {command}: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidArgumentError, OSError) as exc:
        print(f"rfpls {command}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RfplsError as exc:
        print(f"rfpls {command}: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    summary = ", ".join(f"{k}={v}" for k, v in result.items() if not isinstance(v, (dict, list)))
    print(f"rfpls {command}: ok" + (f" ({summary})" if summary else ""))
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
