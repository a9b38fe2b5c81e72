"""Augmented-design ridge least squares with leverages.

A design matrix here is a plain ``(n, p)`` float array; ``augment`` appends
the bias column. Every function that takes a matrix also accepts a
:class:`~rcook.raster.PixelMatrix`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import linalg

# rows per block when forming leverages; bounds the n x p temporaries
LEVERAGE_BLOCK = 8192


class SingularGramError(np.linalg.LinAlgError):
    """The (regularized) Gram matrix cannot be inverted reliably."""

    def __init__(self, rcond: float, lam: float):
        hint = " Use a positive ridge strength (lambda > 0)." if lam == 0 else ""
        super().__init__(
            f"Gram matrix is singular or indefinite (reciprocal condition estimate {rcond:.3e}, "
            f"lambda={lam:g}).{hint}"
        )
        self.rcond = rcond
        self.lam = lam


def as_array(m) -> np.ndarray:
    data = getattr(m, "data", m)
    a = np.asarray(data, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    return a


def augment(X) -> np.ndarray:
    """Append a column of ones: ``[X, 1]``."""
    X = as_array(X)
    out = np.empty((X.shape[0], X.shape[1] + 1))
    out[:, :-1] = X
    out[:, -1] = 1.0
    return out


@dataclass(frozen=True, eq=False)
class LinearModel:
    weights: np.ndarray       # (p, d_out)
    gram_inverse: np.ndarray  # (p, p), (Xd'Xd + lambda I)^-1
    lam: float
    mse: float

    @property
    def p(self) -> int:
        return self.weights.shape[0]

    @property
    def d_out(self) -> int:
        return self.weights.shape[1]

    def to_json(self) -> str:
        return json.dumps({
            "weights": self.weights.tolist(),
            "gram_inverse": self.gram_inverse.tolist(),
            "lambda": self.lam,
            "mse": self.mse,
            "p": self.p,
            "d_out": self.d_out,
        })

    @classmethod
    def from_json(cls, text: str) -> "LinearModel":
        doc = json.loads(text)
        weights = np.array(doc["weights"], dtype=np.float64).reshape(doc["p"], doc["d_out"])
        gram_inverse = np.array(doc["gram_inverse"], dtype=np.float64).reshape(doc["p"], doc["p"])
        return cls(weights, gram_inverse, float(doc["lambda"]), float(doc["mse"]))


def _rcond(gram: np.ndarray) -> float:
    ev = np.linalg.eigvalsh(gram)
    top = ev[-1]
    if top <= 0:
        return 0.0
    return max(ev[0], 0.0) / top


def fit(Xd, Y, lam: float = 0.0) -> LinearModel:
    """Solve ``(Xd'Xd + lam*I) W = Xd'Y`` through a Cholesky factorization.

    The ridge term is added to every diagonal entry, bias included.
    """
    Xd, Y = as_array(Xd), as_array(Y)
    if Xd.shape[0] != Y.shape[0]:
        raise ValueError(f"design has {Xd.shape[0]} rows but Y has {Y.shape[0]}")
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    n, p = Xd.shape

    gram = Xd.T @ Xd
    gram[np.diag_indices(p)] += lam
    rcond = _rcond(gram)
    if rcond <= np.finfo(float).eps:
        raise SingularGramError(rcond, lam)
    try:
        factor = linalg.cho_factor(gram, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularGramError(rcond, lam) from exc

    weights = linalg.cho_solve(factor, Xd.T @ Y, check_finite=False)
    gram_inverse = linalg.cho_solve(factor, np.eye(p), check_finite=False)
    gram_inverse = 0.5 * (gram_inverse + gram_inverse.T)
    mse = residual_variance(Y - Xd @ weights, p)
    return LinearModel(weights, gram_inverse, float(lam), mse)


def predict(m: LinearModel, Xd) -> np.ndarray:
    Xd = as_array(Xd)
    if Xd.shape[1] != m.p:
        raise ValueError(f"design has {Xd.shape[1]} columns, model expects {m.p}")
    return Xd @ m.weights


def residuals(Y, Yhat) -> np.ndarray:
    Y, Yhat = as_array(Y), as_array(Yhat)
    if Y.shape != Yhat.shape:
        raise ValueError(f"shape mismatch: {Y.shape} vs {Yhat.shape}")
    return Y - Yhat


def quadratic_diag(Xd: np.ndarray, M: np.ndarray, block: int = LEVERAGE_BLOCK) -> np.ndarray:
    """Row-wise ``x_i' M x_i``, computed in row blocks."""
    n = Xd.shape[0]
    out = np.empty(n)
    for start in range(0, n, block):
        rows = Xd[start:start + block]
        out[start:start + block] = np.einsum("ij,ij->i", rows @ M, rows)
    return out


def leverages(m: LinearModel, Xd) -> np.ndarray:
    """Hat-matrix diagonal ``h_i = x_i' (Xd'Xd + lam I)^-1 x_i``, clipped at 0.

    For rows outside the training set this is the out-of-sample leverage and
    may exceed 1.
    """
    Xd = as_array(Xd)
    if Xd.shape[1] != m.p:
        raise ValueError(f"design has {Xd.shape[1]} columns, model expects {m.p}")
    return np.maximum(quadratic_diag(Xd, m.gram_inverse), 0.0)


def residual_variance(E, p: int) -> float:
    """Per-output unbiased residual variance ``sum ||e_i||^2 / (d (n - p))``."""
    E = as_array(E)
    n, d = E.shape
    dof = d * (n - p)
    if n - p <= 0:
        raise ValueError(f"non-positive degrees of freedom: n={n}, p={p}")
    return float(np.sum(E * E) / dof)


class RidgePath:
    """Ridge fits of one design for many ``lambda`` from a single eigendecomposition.

    ``Xd'Xd = V diag(ev) V'`` so ``(Xd'Xd + lam I)^-1 = V diag(1/(ev + lam)) V'``.
    Each extra lambda then costs O(n p) instead of O(n p^2).
    """

    def __init__(self, Xd, Y):
        Xd, Y = as_array(Xd), as_array(Y)
        if Xd.shape[0] != Y.shape[0]:
            raise ValueError(f"design has {Xd.shape[0]} rows but Y has {Y.shape[0]}")
        self.n, self.p = Xd.shape
        ev, V = np.linalg.eigh(Xd.T @ Xd)
        self.eigvals = np.maximum(ev, 0.0)
        self.V = V
        self.rotated = Xd @ V                  # (n, p)
        self.proj_y = self.rotated.T @ Y       # V' Xd' Y, (p, d)
        self.Y = Y
        self._rotated_sq = None

    def _inv_spectrum(self, lam: float) -> np.ndarray:
        shifted = self.eigvals + lam
        if shifted[0] <= np.finfo(float).eps * shifted[-1]:
            raise SingularGramError(shifted[0] / shifted[-1], lam)
        return 1.0 / shifted

    def weights(self, lam: float) -> np.ndarray:
        return self.V @ (self._inv_spectrum(lam)[:, None] * self.proj_y)

    def train_fit(self, lam: float) -> tuple[np.ndarray, np.ndarray, float]:
        """Training residuals, leverages and residual variance at ``lam``."""
        inv = self._inv_spectrum(lam)
        coef = inv[:, None] * self.proj_y
        E = self.Y - self.rotated @ coef
        if self._rotated_sq is None:
            self._rotated_sq = self.rotated ** 2
        h = np.maximum(self._rotated_sq @ inv, 0.0)
        return E, h, residual_variance(E, self.p)

    def train_variance(self, lam: float) -> float:
        coef = self._inv_spectrum(lam)[:, None] * self.proj_y
        return residual_variance(self.Y - self.rotated @ coef, self.p)

    def out_of_sample(self, Xd_new, Y_new, lam: float) -> tuple[np.ndarray, np.ndarray]:
        """Residuals and leverages of new rows under the fit at ``lam``."""
        rotated = as_array(Xd_new) @ self.V
        return self.out_of_sample_rotated(rotated, as_array(Y_new), lam)

    def out_of_sample_rotated(self, rotated, Y_new, lam: float) -> tuple[np.ndarray, np.ndarray]:
        inv = self._inv_spectrum(lam)
        E = Y_new - rotated @ (inv[:, None] * self.proj_y)
        h = np.maximum((rotated ** 2) @ inv, 0.0)
        return E, h
