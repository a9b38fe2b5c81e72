"""Cook's distance scores from residuals and leverages, plus a refitting oracle."""
from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np

from .regression import as_array, fit, predict

SATURATION = 1.0 - 1e-12


class CookVariant(enum.Enum):
    # e^2 h / (d s2 (1-h)^2): satisfies the deletion identity
    CLASSICAL = "classical"
    # e^2 h / (d s2^2 (1-h^2)): alternative denominator, no deletion identity
    PAPER_LITERAL = "paper-literal"


class CookScores(NamedTuple):
    scores: np.ndarray
    saturated: np.ndarray  # indices whose leverage was clamped to SATURATION


def cook_scores(E, h, d_out: int, s2: float,
                variant: CookVariant = CookVariant.CLASSICAL) -> CookScores:
    """Per-row Cook's distance.

    ``E`` holds one residual vector per row; its squared Euclidean norm is
    used. Leverages at or above ``1 - 1e-12`` are clamped there and their
    indices returned in ``saturated``.
    """
    E = as_array(E)
    h = np.asarray(h, dtype=np.float64).ravel()
    if E.shape[0] != h.size:
        raise ValueError(f"{E.shape[0]} residual rows but {h.size} leverages")
    if not s2 > 0:
        raise ValueError(f"s2 must be > 0, got {s2}")
    if d_out < 1:
        raise ValueError(f"d_out must be >= 1, got {d_out}")
    variant = CookVariant(variant)

    saturated = np.flatnonzero(h >= SATURATION)
    h = np.clip(h, 0.0, SATURATION)
    sq = np.einsum("ij,ij->i", E, E)
    if variant is CookVariant.CLASSICAL:
        scores = sq * h / (d_out * s2 * (1.0 - h) ** 2)
    else:
        scores = sq * h / (d_out * s2 ** 2 * (1.0 - h * h))
    return CookScores(scores, saturated)


def cook_deletion_oracle(Xd, Y, i: int, d_out: int, s2: float) -> float:
    """Cook's distance of row ``i`` by refitting without it (no ridge).

    ``sum_j ||yhat_j - yhat_j(-i)||^2 / (d_out * s2)`` over all rows.
    """
    Xd, Y = as_array(Xd), as_array(Y)
    n, p = Xd.shape
    if n < p + 2:
        raise ValueError(f"oracle needs n >= p + 2, got n={n}, p={p}")
    full = predict(fit(Xd, Y, 0.0), Xd)
    keep = np.arange(n) != i
    reduced = predict(fit(Xd[keep], Y[keep], 0.0), Xd)
    diff = full - reduced
    return float(np.sum(diff * diff) / (d_out * s2))
