"""Band standardization and design construction shared by detection and tuning."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .regression import augment
from .rff import RffMap, rff_design

# A residual variance below this fraction of the mean squared response is
# treated as an exact fit; it keeps Cook scores of a perfect fit near zero
# instead of 0/0 noise.
S2_FLOOR = 1e-16


@dataclass(frozen=True, eq=False)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, data: np.ndarray) -> "Standardizer":
        mean = data.mean(axis=0)
        scale = data.std(axis=0)
        # constant bands are centred only
        scale = np.where(scale > 0, scale, 1.0)
        return cls(mean, scale)

    @classmethod
    def identity(cls, d: int) -> "Standardizer":
        return cls(np.zeros(d), np.ones(d))

    def apply(self, data: np.ndarray) -> np.ndarray:
        return (data - self.mean) / self.scale


def fit_standardizers(X_train, Y_train, enabled: bool = True) -> tuple[Standardizer, Standardizer]:
    if not enabled:
        return Standardizer.identity(X_train.shape[1]), Standardizer.identity(Y_train.shape[1])
    return Standardizer.fit(X_train), Standardizer.fit(Y_train)


def build_design(X: np.ndarray, fmap: RffMap | None) -> np.ndarray:
    """Linear design ``[X, 1]`` or RFF design ``[z(X), 1]``."""
    return augment(X) if fmap is None else rff_design(fmap, X)


def floor_variance(s2: float, Y_train: np.ndarray) -> float:
    ref = float(np.mean(Y_train * Y_train))
    return max(s2, S2_FLOOR * ref, np.finfo(float).tiny)
