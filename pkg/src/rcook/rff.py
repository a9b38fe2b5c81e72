"""Random Fourier features for the Gaussian kernel ``exp(-||x - x'||^2 / (2 sigma^2))``.

The complex map ``exp(i w'x)`` is realised with real cos/sin pairs scaled by
``1/sqrt(D)``, so ``z(x)'z(x')`` is an unbiased kernel estimate and
``||z(x)||^2 = 1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .regression import as_array

# Frequencies come from numpy's PCG64 seeded directly with the integer seed.
# Bump this tag if the sampling recipe ever changes.
PRNG_VERSION = "numpy-pcg64-standard-normal-v1"


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit child seed of ``seed`` labelled by ``key`` (order-free, stable)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True, eq=False)
class RffMap:
    d: int
    D: int
    sigma: float
    seed: int
    prng_version: str = PRNG_VERSION
    frequencies: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.d < 1 or self.D < 1:
            raise ValueError(f"d and D must be >= 1, got d={self.d}, D={self.D}")
        if not (self.sigma > 0 and np.isfinite(self.sigma)):
            raise ValueError(f"sigma must be a positive finite number, got {self.sigma}")
        if self.prng_version != PRNG_VERSION:
            raise ValueError(f"unsupported PRNG version {self.prng_version!r} (have {PRNG_VERSION!r})")
        rng = np.random.Generator(np.random.PCG64(int(self.seed)))
        base = rng.standard_normal((self.D, self.d))
        object.__setattr__(self, "frequencies", base / self.sigma)

    @property
    def p(self) -> int:
        """Column count of the RFF design (cos/sin pairs plus bias)."""
        return 2 * self.D + 1

    def to_json(self) -> str:
        return json.dumps({"seed": int(self.seed), "sigma": float(self.sigma), "D": self.D,
                           "d": self.d, "prng_version": self.prng_version})

    @classmethod
    def from_json(cls, text: str) -> "RffMap":
        doc = json.loads(text)
        return cls(int(doc["d"]), int(doc["D"]), float(doc["sigma"]), int(doc["seed"]),
                   doc.get("prng_version", PRNG_VERSION))


def sample_map(d: int, D: int, sigma: float, seed: int) -> RffMap:
    return RffMap(d, D, float(sigma), int(seed))


def _fill_features(fmap: RffMap, X: np.ndarray, out: np.ndarray) -> None:
    if X.shape[1] != fmap.d:
        raise ValueError(f"X has {X.shape[1]} bands, map expects {fmap.d}")
    D = fmap.D
    proj = X @ fmap.frequencies.T
    np.cos(proj, out=out[:, 0:2 * D:2])
    np.sin(proj, out=out[:, 1:2 * D:2])
    out[:, :2 * D] *= 1.0 / np.sqrt(D)


def transform(fmap: RffMap, X) -> np.ndarray:
    """``(n, 2D)`` features ``[cos(w_1'x), sin(w_1'x), ...] / sqrt(D)``."""
    X = as_array(X)
    out = np.empty((X.shape[0], 2 * fmap.D))
    _fill_features(fmap, X, out)
    return out


def rff_design(fmap: RffMap, X) -> np.ndarray:
    """RFF features with a trailing bias column, ``(n, 2D + 1)``.

    Written in place into one buffer so the peak footprint stays near one
    design matrix plus one ``n x D`` projection.
    """
    X = as_array(X)
    out = np.empty((X.shape[0], fmap.p))
    _fill_features(fmap, X, out)
    out[:, -1] = 1.0
    return out


def gaussian_kernel(x, y, sigma: float) -> float:
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return float(np.exp(-diff @ diff / (2.0 * sigma ** 2)))
