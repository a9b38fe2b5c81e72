"""Synthetic bi-temporal scenes with a known pervasive change and planted anomalous changes."""
from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage

from .raster import Mask, PixelMatrix

CORRELATION_LENGTH = 8.0
_STEPS = np.array([(-1, 0), (1, 0), (0, -1), (0, 1)])


class Pervasive(enum.Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    SINUSOID_MIX = "sinusoid-mix"


@dataclass(frozen=True)
class SceneSpec:
    rows: int
    cols: int
    bands: int
    pervasive: Pervasive = Pervasive.LINEAR
    noise_sigma: float = 0.0
    anomaly_fraction: float = 0.01
    anomaly_strength: float = 1.0
    seed: int = 0
    blob_pixels: int = 50

    def __post_init__(self):
        object.__setattr__(self, "pervasive", Pervasive(self.pervasive))
        if self.rows < 1 or self.cols < 1 or self.bands < 1:
            raise ValueError(f"rows, cols, bands must be >= 1: {self.rows}x{self.cols}x{self.bands}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not 0 < self.anomaly_fraction < 1:
            raise ValueError(f"anomaly_fraction must be in (0, 1), got {self.anomaly_fraction}")
        if self.anomaly_fraction * self.rows * self.cols < 1:
            raise ValueError("anomaly_fraction * rows * cols must be >= 1")
        if not self.anomaly_strength > 0:
            raise ValueError(f"anomaly_strength must be > 0, got {self.anomaly_strength}")
        if self.blob_pixels < 1:
            raise ValueError(f"blob_pixels must be >= 1, got {self.blob_pixels}")

    @property
    def n_anomalous(self) -> int:
        return max(1, int(np.floor(self.anomaly_fraction * self.rows * self.cols + 0.5)))

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["pervasive"] = self.pervasive.value
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "SceneSpec":
        return cls(**doc)

    @classmethod
    def from_json(cls, text: str) -> "SceneSpec":
        return cls.from_dict(json.loads(text))


def gaussian_field(rng: np.random.Generator, rows: int, cols: int, bands: int,
                   length: float = CORRELATION_LENGTH) -> np.ndarray:
    """Per-band smoothed white noise, rescaled to zero mean and unit variance."""
    out = np.empty((rows, cols, bands))
    for b in range(bands):
        field = ndimage.gaussian_filter(rng.standard_normal((rows, cols)), length, mode="wrap")
        field -= field.mean()
        sd = field.std()
        out[:, :, b] = field / sd if sd > 0 else field
    return out


def pervasive_change(kind: Pervasive, X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Apply the scene-wide map ``g`` row by row; coefficients come from ``rng``."""
    n, d = X.shape
    A = rng.standard_normal((d, d)) / np.sqrt(d)
    offset = rng.standard_normal(d)
    linear = X @ A.T + offset
    if kind is Pervasive.LINEAR:
        return linear
    if kind is Pervasive.QUADRATIC:
        # y_j = sum_k a_jk x_k + b_j (sum_k c_k x_k)^2
        b = rng.standard_normal(d)
        c = rng.standard_normal(d) / np.sqrt(d)
        return linear + np.outer((X @ c) ** 2, b)
    # y = A x + B sin(C x)
    B = rng.standard_normal((d, d)) / np.sqrt(d)
    C = 2.0 * rng.standard_normal((d, d)) / np.sqrt(d)
    return linear + np.sin(X @ C.T) @ B.T


def plant_blobs(rng: np.random.Generator, rows: int, cols: int, total: int,
                blob_pixels: int) -> list[np.ndarray]:
    """Random-walk blobs of up to ``blob_pixels`` pixels each, ``total`` pixels overall.

    Returns one array of flat pixel indices per blob. Blobs never overlap and
    each is 4-connected: the walk never steps onto another blob.
    """
    owner = np.full((rows, cols), -1, dtype=np.int64)
    blobs = []
    remaining = total
    while remaining > 0:
        label = len(blobs)
        free = np.flatnonzero(owner.ravel() < 0)
        r, c = divmod(int(free[rng.integers(free.size)]), cols)
        size = min(blob_pixels, remaining)
        owner[r, c] = label
        blob = [r * cols + c]
        stalled = 0
        while len(blob) < size and stalled < 50 * size:
            dr, dc = _STEPS[rng.integers(4)]
            nr, nc = min(max(r + dr, 0), rows - 1), min(max(c + dc, 0), cols - 1)
            if owner[nr, nc] == -1:
                owner[nr, nc] = label
                blob.append(nr * cols + nc)
                stalled = 0
            else:
                stalled += 1
            if owner[nr, nc] == label:
                r, c = nr, nc
        blobs.append(np.array(blob))
        remaining -= len(blob)
    return blobs


def generate(spec: SceneSpec) -> tuple[PixelMatrix, PixelMatrix, Mask]:
    """Draw ``(X, Y, truth)`` for ``spec``; identical specs give identical scenes."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n, d = spec.rows * spec.cols, spec.bands

    X = gaussian_field(rng, spec.rows, spec.cols, d).reshape(n, d)
    Y = pervasive_change(spec.pervasive, X, rng)
    if spec.noise_sigma > 0:
        Y = Y + spec.noise_sigma * rng.standard_normal((n, d))

    truth = np.zeros(n, dtype=bool)
    for blob in plant_blobs(rng, spec.rows, spec.cols, spec.n_anomalous, spec.blob_pixels):
        direction = rng.standard_normal(d)
        direction /= np.linalg.norm(direction)
        Y[blob] += spec.anomaly_strength * direction
        truth[blob] = True

    return (PixelMatrix(X, spec.rows, spec.cols), PixelMatrix(Y, spec.rows, spec.cols),
            Mask(truth, spec.rows, spec.cols))
