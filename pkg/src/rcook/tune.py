"""Pixel sampling and AUC-maximizing cross-validated grid search over (sigma, lambda)."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .cook import CookVariant, cook_scores
from .evaluation import roc
from .preprocess import build_design, fit_standardizers, floor_variance
from .regression import RidgePath, SingularGramError, as_array
from .rff import derive_seed, sample_map

GRID_LO = 1e-5
GRID_HI = 1e4
GRID_POINTS = 50
DEFAULT_FOLDS = 5
DEFAULT_D = 100

# child-seed labels, see rff.derive_seed
_FOLD_STREAM = 0
_RFF_STREAM = 1
_SAMPLE_STREAM = 2


def log_grid(lo: float, hi: float, k: int) -> list[float]:
    """``k`` geometrically spaced values from ``lo`` to ``hi``, endpoints exact."""
    if k < 2:
        raise ValueError(f"log_grid needs k >= 2, got {k}")
    if not 0 < lo < hi:
        raise ValueError(f"need 0 < lo < hi, got lo={lo}, hi={hi}")
    ratio = hi / lo
    values = [lo * ratio ** (i / (k - 1)) for i in range(k)]
    values[0], values[-1] = float(lo), float(hi)
    return values


def default_grid() -> list[float]:
    return log_grid(GRID_LO, GRID_HI, GRID_POINTS)


@dataclass(frozen=True)
class GridSpec:
    sigma_grid: list = field(default_factory=default_grid)
    lambda_grid: list = field(default_factory=default_grid)
    folds: int = DEFAULT_FOLDS
    seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError(f"folds must be >= 2, got {self.folds}")
        if not self.lambda_grid:
            raise ValueError("lambda_grid is empty")
        if any(not s > 0 for s in self.sigma_grid):
            raise ValueError("sigma_grid values must be > 0")
        if any(not lam >= 0 for lam in self.lambda_grid):
            raise ValueError("lambda_grid values must be >= 0")


@dataclass(frozen=True)
class TuneResult:
    method: str
    best_sigma: float | None
    best_lambda: float
    cv_auc: float
    table: list  # (sigma or None, lambda, mean fold AUC or nan)
    folds: int
    seed: int
    D: int | None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "best_sigma": self.best_sigma,
            "best_lambda": self.best_lambda,
            "cv_auc": self.cv_auc,
            "folds": self.folds,
            "seed": self.seed,
            "D": self.D,
            "table": [
                {"sigma": s, "lambda": lam, "mean_auc": None if np.isnan(a) else a}
                for s, lam, a in self.table
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["sigma", "lambda", "mean_auc"])
        for s, lam, a in self.table:
            writer.writerow(["" if s is None else repr(s), repr(lam), "" if np.isnan(a) else repr(a)])
        return buf.getvalue()


def sample_indices(total: int, n: int, seed: int) -> np.ndarray:
    """``n`` distinct pixel indices drawn uniformly; reproducible per seed."""
    if n > total:
        raise ValueError(f"cannot sample {n} pixels from {total}")
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, _SAMPLE_STREAM)))
    return rng.choice(total, size=n, replace=False)


def split_indices(idx: np.ndarray, train_frac: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Leading ``train_frac`` of an (already shuffled) sample for training, the rest for test."""
    if not 0 < train_frac < 1:
        raise ValueError(f"train_frac must be in (0, 1), got {train_frac}")
    cut = int(round(train_frac * len(idx)))
    return idx[:cut], idx[cut:]


def split_half(idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return split_indices(idx, 0.5)


def sample_pixels(X, Y, truth, n: int, seed: int):
    """Subsample ``n`` aligned pixels of ``(X, Y, truth)`` without replacement."""
    X, Y = as_array(X), as_array(Y)
    labels = np.asarray(getattr(truth, "data", truth)).astype(bool).ravel()
    idx = sample_indices(X.shape[0], n, seed)
    return X[idx], Y[idx], labels[idx]


def stratified_folds(labels: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Fold id per sample; each class is shuffled then dealt round-robin."""
    labels = np.asarray(labels).astype(bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos < k or n_neg < k:
        raise ValueError(
            f"stratification failure: {k} folds need at least {k} samples per class, "
            f"have {n_pos} positives and {n_neg} negatives"
        )
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, _FOLD_STREAM)))
    fold = np.empty(labels.size, dtype=np.int64)
    for cls in (True, False):
        members = np.flatnonzero(labels == cls)
        fold[rng.permutation(members)] = np.arange(members.size) % k
    return fold


def _fold_aucs(path: RidgePath, rotated_test, Y_test, y_test, Y_train, lambdas, variant):
    out = np.full(len(lambdas), np.nan)
    d_out = Y_test.shape[1]
    for j, lam in enumerate(lambdas):
        try:
            s2 = path.train_variance(lam)
            E, h = path.out_of_sample_rotated(rotated_test, Y_test, lam)
        except SingularGramError:
            continue
        s2 = floor_variance(s2, Y_train)
        out[j] = roc(cook_scores(E, h, d_out, s2, variant).scores, y_test).auc
    return out


def cv_tune(X, Y, truth, grid: GridSpec | None = None, D: int = DEFAULT_D,
            method: str = "rcook", variant: CookVariant = CookVariant.CLASSICAL,
            standardize: bool = True) -> TuneResult:
    """Mean out-of-fold AUC for every grid point; returns the best one.

    For ``method="cook"`` only ``lambda_grid`` is searched. Each fold draws
    its own RFF frequencies from ``(seed, fold)``; all sigmas share that draw
    up to scale, so results do not depend on grid order. Grid points whose
    Gram is singular score NaN and are skipped. Ties go to the larger
    lambda, then the larger sigma.
    """
    grid = grid or GridSpec()
    method = method.lower()
    if method not in ("cook", "rcook"):
        raise ValueError(f"unknown method {method!r}")
    X, Y = as_array(X), as_array(Y)
    labels = np.asarray(getattr(truth, "data", truth)).astype(bool).ravel()
    if not (X.shape[0] == Y.shape[0] == labels.size):
        raise ValueError(f"misaligned inputs: X {X.shape[0]}, Y {Y.shape[0]}, truth {labels.size}")
    sigmas = [None] if method == "cook" else [float(s) for s in grid.sigma_grid]
    if not sigmas:
        raise ValueError("sigma_grid is empty")
    lambdas = [float(lam) for lam in grid.lambda_grid]
    folds = stratified_folds(labels, grid.folds, grid.seed)

    sums = np.zeros((len(sigmas), len(lambdas)))
    for f in range(grid.folds):
        test = folds == f
        sx, sy = fit_standardizers(X[~test], Y[~test], standardize)
        Xtr, Xte = sx.apply(X[~test]), sx.apply(X[test])
        Ytr, Yte = sy.apply(Y[~test]), sy.apply(Y[test])
        rff_seed = derive_seed(grid.seed, _RFF_STREAM, f)
        for i, sigma in enumerate(sigmas):
            fmap = None if sigma is None else sample_map(X.shape[1], D, sigma, rff_seed)
            path = RidgePath(build_design(Xtr, fmap), Ytr)
            rotated_test = build_design(Xte, fmap) @ path.V
            sums[i] += _fold_aucs(path, rotated_test, Yte, labels[test], Ytr, lambdas, variant)
    means = sums / grid.folds

    table = [(s, lam, float(means[i, j])) for i, s in enumerate(sigmas) for j, lam in enumerate(lambdas)]
    valid = [row for row in table if not np.isnan(row[2])]
    if not valid:
        raise SingularGramError(0.0, min(lambdas))
    best = max(valid, key=lambda row: (row[2], row[1], -np.inf if row[0] is None else row[0]))
    return TuneResult(method, best[0], best[1], best[2], table, grid.folds, grid.seed,
                      None if method == "cook" else D)
