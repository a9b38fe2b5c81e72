"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 I/O error (unreadable,
unwritable or malformed files).
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources

import jsonschema
import numpy as np

from .cook import CookVariant
from .evaluation import apply_threshold, best_operating_point, export_roc_csv, roc
from .pipeline import (DEFAULT_SAMPLES, DEFAULT_TRAIN_FRAC, DetectorConfig, Method, detect,
                       experiment_split, run_experiment)
from .raster import FormatError, load_mask, load_matrix, save_heatmap, save_mask, save_matrix
from .regression import SingularGramError
from .synth import SceneSpec, generate
from .tune import DEFAULT_D, DEFAULT_FOLDS, GridSpec, cv_tune, default_grid, log_grid

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def load_schema(name: str) -> dict:
    return json.loads(resources.files("rcook").joinpath("schemas", f"{name}.schema.json").read_text())


def _read_json(path: str, schema: str):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
    try:
        jsonschema.validate(doc, load_schema(schema))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValueError(f"{path}: {where}: {exc.message}") from exc
    return doc


def _emit(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _same_raster(a, b, what: str) -> None:
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise ValueError(f"{what}: raster {a.rows}x{a.cols} does not match {b.rows}x{b.cols}")


def cmd_synth(args) -> None:
    spec = SceneSpec.from_dict(_read_json(args.spec, "scene_spec"))
    X, Y, truth = generate(spec)
    save_matrix(X, args.out_x)
    save_matrix(Y, args.out_y)
    save_mask(truth, args.out_truth)
    _emit({"schema": "rcook/synth_report/v1", "rows": spec.rows, "cols": spec.cols,
           "bands": spec.bands, "n_anomalous": int(truth.data.sum())})


def _detector_config(args) -> DetectorConfig:
    method = Method(args.method)
    if method is Method.RCOOK and args.sigma is None:
        raise ValueError("--sigma is required with --method rcook")
    return DetectorConfig(method, CookVariant(args.variant), args.lam,
                          args.sigma if method is Method.RCOOK else None, args.D, args.seed,
                          not args.no_standardize)


def _parse_threshold(text):
    if text is None or text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"--threshold must be 'auto' or a number, got {text!r}") from None


def cmd_detect(args) -> None:
    cfg = _detector_config(args)
    threshold = _parse_threshold(args.threshold)
    if threshold == "auto" and args.truth is None:
        raise ValueError("--threshold auto requires --truth")
    if args.out_map is not None and threshold is None:
        raise ValueError("--out-map requires --threshold")
    X, Y = load_matrix(args.x), load_matrix(args.y)
    _same_raster(X, Y, "--y")
    if X.bands != Y.bands:
        raise ValueError(f"--y: {Y.bands} bands, --x has {X.bands}")

    if args.truth is not None:
        truth = load_mask(args.truth)
        _same_raster(X, truth, "--truth")
        rep = run_experiment(X, Y, truth, cfg, args.n_samples, cfg.seed, args.train_frac)
        det = rep.detection
        doc = rep.to_dict()
        if threshold == "auto":
            threshold = rep.threshold
    else:
        train, _ = experiment_split(X.n, args.n_samples, cfg.seed, args.train_frac)
        det = detect(X, Y, cfg, train)
        doc = {"config": cfg.to_dict(), "n_samples": min(args.n_samples, X.n),
               "n_train": int(train.size), "n_saturated": int(det.saturated.size), "s2": det.s2}

    doc["schema"] = "rcook/detect_report/v1"
    if threshold is not None:
        anomaly_map = apply_threshold(det.scores, threshold)
        doc["threshold"] = threshold if np.isfinite(threshold) else None
        doc["n_flagged"] = int(anomaly_map.data.sum())
        if args.out_map is not None:
            save_mask(anomaly_map, args.out_map)
    if args.out_scores is not None:
        save_matrix(det.scores.as_matrix(), args.out_scores)
    if args.out_heatmap is not None:
        save_heatmap(det.scores, args.out_heatmap)
    _emit(doc)


def _grid_axis(value) -> list[float]:
    if isinstance(value, dict):
        return log_grid(value["lo"], value["hi"], value["k"])
    return [float(v) for v in value]


def cmd_tune(args) -> None:
    method = Method(args.method)
    if args.grid is not None:
        doc = _read_json(args.grid, "grid")
        lambdas = _grid_axis(doc["lambda"])
        if "sigma" in doc:
            sigmas = _grid_axis(doc["sigma"])
        elif method is Method.RCOOK:
            raise ValueError(f"{args.grid}: rcook grid needs a 'sigma' axis")
        else:
            sigmas = []
    else:
        sigmas, lambdas = default_grid(), default_grid()
    grid = GridSpec(sigmas, lambdas, args.folds, args.seed)

    X, Y, truth = load_matrix(args.x), load_matrix(args.y), load_mask(args.truth)
    _same_raster(X, Y, "--y")
    _same_raster(X, truth, "--truth")
    train, _ = experiment_split(X.n, args.n_samples, args.seed, args.train_frac)
    result = cv_tune(X.data[train], Y.data[train], truth.data[train], grid, D=args.D,
                     method=method.value, variant=CookVariant(args.variant))
    with open(args.out, "w") as fh:
        fh.write(result.to_json())
    if args.out_csv is not None:
        with open(args.out_csv, "w", newline="") as fh:
            fh.write(result.to_csv())
    _emit({
        "schema": "rcook/tune_report/v1",
        "method": result.method,
        "best_sigma": result.best_sigma,
        "best_lambda": result.best_lambda,
        "cv_auc": result.cv_auc,
        "folds": result.folds,
        "seed": result.seed,
        "D": result.D,
        "n_sigma": 1 if method is Method.COOK else len(sigmas),
        "n_lambda": len(lambdas),
        "n_train": int(train.size),
    })


def _eval(args, require_out: bool) -> None:
    if require_out and args.out_roc is None:
        raise ValueError("--out-roc is required")
    scores, truth = load_matrix(args.scores), load_mask(args.truth)
    _same_raster(scores, truth, "--truth")
    if scores.bands != 1:
        raise ValueError(f"--scores: expected 1 band, found {scores.bands}")
    curve = roc(scores.data[:, 0], truth.data)
    if args.out_roc is not None:
        export_roc_csv(curve, args.out_roc)
    threshold, fpr, tpr = best_operating_point(curve)
    n_pos = int(truth.data.sum())
    _emit({
        "schema": "rcook/eval_report/v1",
        "auc": curve.auc,
        "n_vertices": int(curve.fpr.size),
        "n_positive": n_pos,
        "n_negative": truth.n - n_pos,
        "operating_point": {"threshold": threshold if np.isfinite(threshold) else None,
                            "fpr": fpr, "tpr": tpr},
    })


def cmd_eval(args) -> None:
    _eval(args, require_out=False)


def cmd_roc_export(args) -> None:
    _eval(args, require_out=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rcook", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic bi-temporal scene")
    p.add_argument("--spec", required=True, help="scene spec JSON (seed inside)")
    p.add_argument("--out-x", required=True)
    p.add_argument("--out-y", required=True)
    p.add_argument("--out-truth", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("detect", help="score every pixel with Cook or RCook")
    p.add_argument("--x", required=True, help="first image (CCMX)")
    p.add_argument("--y", required=True, help="second image (CCMX)")
    p.add_argument("--truth", help="ground-truth mask (PGM); enables AUC reporting")
    p.add_argument("--method", choices=[m.value for m in Method], default="cook")
    p.add_argument("--variant", choices=[v.value for v in CookVariant], default="classical")
    p.add_argument("--sigma", type=float)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--D", type=int, default=DEFAULT_D)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--train-frac", type=float, default=DEFAULT_TRAIN_FRAC)
    p.add_argument("--n-samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("--out-scores", help="score map (CCMX, 1 band)")
    p.add_argument("--out-map", help="thresholded anomaly map (PGM)")
    p.add_argument("--out-heatmap", help="score heatmap (PGM)")
    p.add_argument("--threshold", help="'auto' (nearest to (0,1), needs --truth) or a number")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("tune", help="cross-validated grid search for sigma and lambda")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--method", choices=[m.value for m in Method], default="rcook")
    p.add_argument("--variant", choices=[v.value for v in CookVariant], default="classical")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--grid-default", action="store_true",
                   help="50 log-spaced points on [1e-5, 1e4] per axis (the default)")
    g.add_argument("--grid", help="grid JSON")
    p.add_argument("--D", type=int, default=DEFAULT_D)
    p.add_argument("--folds", type=int, default=DEFAULT_FOLDS)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--train-frac", type=float, default=DEFAULT_TRAIN_FRAC)
    p.add_argument("--n-samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--out", required=True, help="tuning result JSON")
    p.add_argument("--out-csv", help="tuning table CSV (sigma, lambda, mean_auc)")
    p.set_defaults(func=cmd_tune)

    for name, func, helptext in (("eval", cmd_eval, "ROC/AUC of a score map"),
                                 ("roc-export", cmd_roc_export, "write the ROC curve as CSV")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--scores", required=True, help="score map (CCMX, 1 band)")
        p.add_argument("--truth", required=True, help="ground-truth mask (PGM)")
        p.add_argument("--out-roc", help="ROC CSV path")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except (FormatError, OSError) as exc:
        print(f"rcook: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, SingularGramError) as exc:
        print(f"rcook: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
