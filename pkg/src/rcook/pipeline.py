"""End-to-end chronochrome detection: standardize, map, fit, score, evaluate."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .cook import CookVariant, cook_scores
from .evaluation import apply_threshold, best_operating_point, roc
from .preprocess import build_design, fit_standardizers, floor_variance
from .raster import Mask, PixelMatrix, ScoreMap
from .regression import LinearModel, as_array, fit, leverages, predict
from .rff import RffMap, sample_map
from .tune import DEFAULT_D, GridSpec, TuneResult, cv_tune, sample_indices, split_indices

DEFAULT_SAMPLES = 10_000
DEFAULT_TRAIN_FRAC = 0.5


class Method(enum.Enum):
    COOK = "cook"
    RCOOK = "rcook"


@dataclass(frozen=True)
class DetectorConfig:
    method: Method = Method.COOK
    variant: CookVariant = CookVariant.CLASSICAL
    lam: float = 0.0
    sigma: float | None = None
    D: int = DEFAULT_D
    seed: int = 0
    standardize: bool = True

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "variant", CookVariant(self.variant))
        if not self.lam >= 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.method is Method.RCOOK:
            if self.sigma is None or not self.sigma > 0:
                raise ValueError(f"rcook needs sigma > 0, got {self.sigma}")
            if self.D < 1:
                raise ValueError(f"rcook needs D >= 1, got {self.D}")

    def to_dict(self) -> dict:
        rcook = self.method is Method.RCOOK
        return {
            "method": self.method.value,
            "variant": self.variant.value,
            "lambda": self.lam,
            "sigma": self.sigma if rcook else None,
            "D": self.D if rcook else None,
            "seed": self.seed,
            "standardize": self.standardize,
        }


@dataclass(frozen=True, eq=False)
class Detection:
    scores: ScoreMap
    saturated: np.ndarray  # pixel indices whose leverage was clamped
    model: LinearModel
    rff_map: RffMap | None
    s2: float


def detect(X: PixelMatrix, Y: PixelMatrix, cfg: DetectorConfig, train_idx) -> Detection:
    """Fit on ``train_idx`` and score every pixel of the image.

    Standardization statistics, the model and ``s2`` come from the training
    rows only; all other pixels get out-of-sample leverages.
    """
    Xa, Ya = as_array(X), as_array(Y)
    if Xa.shape[0] != Ya.shape[0]:
        raise ValueError(f"X has {Xa.shape[0]} pixels but Y has {Ya.shape[0]}")
    train_idx = np.asarray(train_idx)
    if train_idx.size == 0:
        raise ValueError("train_idx is empty")

    sx, sy = fit_standardizers(Xa[train_idx], Ya[train_idx], cfg.standardize)
    Xs, Ys = sx.apply(Xa), sy.apply(Ya)
    fmap = None
    if cfg.method is Method.RCOOK:
        fmap = sample_map(Xa.shape[1], cfg.D, cfg.sigma, cfg.seed)

    design = build_design(Xs, fmap)
    model = fit(design[train_idx], Ys[train_idx], cfg.lam)
    s2 = floor_variance(model.mse, Ys[train_idx])
    E = Ys - predict(model, design)
    h = leverages(model, design)
    del design
    result = cook_scores(E, h, model.d_out, s2, cfg.variant)
    rows = getattr(X, "rows", Xa.shape[0])
    cols = getattr(X, "cols", 1)
    return Detection(ScoreMap(result.scores, rows, cols), result.saturated, model, fmap, s2)


@dataclass(frozen=True, eq=False)
class Report:
    config: DetectorConfig
    n_samples: int
    n_train: int
    n_test: int
    auc_train: float
    auc_test: float
    auc_full: float
    threshold: float
    fpr: float
    tpr: float
    detection: Detection
    anomaly_map: Mask

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "n_samples": self.n_samples,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "auc_train": self.auc_train,
            "auc_test": self.auc_test,
            "auc_full": self.auc_full,
            "operating_point": {
                "curve": "full",
                "threshold": self.threshold if np.isfinite(self.threshold) else None,
                "fpr": self.fpr,
                "tpr": self.tpr,
            },
            "n_flagged": int(self.anomaly_map.data.sum()),
            "n_saturated": int(self.detection.saturated.size),
            "s2": self.detection.s2,
        }


def experiment_split(total: int, n_samples: int, seed: int,
                     train_frac: float = DEFAULT_TRAIN_FRAC) -> tuple[np.ndarray, np.ndarray]:
    """Sample ``min(n_samples, total)`` pixels and split them into train/test."""
    idx = sample_indices(total, min(n_samples, total), seed)
    return split_indices(idx, train_frac)


def run_experiment(X: PixelMatrix, Y: PixelMatrix, truth: Mask, cfg: DetectorConfig,
                   n_samples: int = DEFAULT_SAMPLES, seed: int | None = None,
                   train_frac: float = DEFAULT_TRAIN_FRAC) -> Report:
    """Sample, split, fit on the training half, score the whole image and evaluate.

    AUCs are reported separately on the training pixels, the held-out test
    pixels and the full image. The operating point (nearest to (0, 1)) is
    taken on the full-image curve and thresholds the full image.
    """
    seed = cfg.seed if seed is None else seed
    labels = np.asarray(getattr(truth, "data", truth)).astype(bool).ravel()
    train, test = experiment_split(labels.size, n_samples, seed, train_frac)
    det = detect(X, Y, cfg, train)
    s = det.scores.scores
    full = roc(s, labels)
    threshold, fpr, tpr = best_operating_point(full)
    return Report(
        config=cfg,
        n_samples=train.size + test.size,
        n_train=train.size,
        n_test=test.size,
        auc_train=roc(s[train], labels[train]).auc,
        auc_test=roc(s[test], labels[test]).auc,
        auc_full=full.auc,
        threshold=threshold,
        fpr=fpr,
        tpr=tpr,
        detection=det,
        anomaly_map=apply_threshold(det.scores, threshold),
    )


def tune_experiment(X: PixelMatrix, Y: PixelMatrix, truth: Mask, method: Method | str,
                    grid: GridSpec | None = None, D: int = DEFAULT_D, seed: int = 0,
                    n_samples: int = DEFAULT_SAMPLES, train_frac: float = DEFAULT_TRAIN_FRAC,
                    variant: CookVariant = CookVariant.CLASSICAL) -> TuneResult:
    """Cross-validate on the training part of the experiment sample for ``seed``."""
    method = Method(method)
    labels = np.asarray(getattr(truth, "data", truth)).astype(bool).ravel()
    train, _ = experiment_split(labels.size, n_samples, seed, train_frac)
    grid = grid or GridSpec(seed=seed)
    return cv_tune(as_array(X)[train], as_array(Y)[train], labels[train], grid, D=D,
                   method=method.value, variant=variant)


def config_from_tuning(result: TuneResult, seed: int, variant: CookVariant = CookVariant.CLASSICAL,
                       D: int = DEFAULT_D) -> DetectorConfig:
    if result.method == Method.COOK.value:
        return DetectorConfig(Method.COOK, variant, result.best_lambda, seed=seed)
    return DetectorConfig(Method.RCOOK, variant, result.best_lambda, result.best_sigma,
                          result.D or D, seed)
