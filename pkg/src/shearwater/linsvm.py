"""Linear support-vector classifier trained with Pegasos.

Columns are z-scored with statistics from the training fold (constant
columns get unit scale, leaving their weights at zero), then a bias column
of ones is appended and the homogeneous-form Pegasos recursion minimizes

    reg/2 * ||u||^2 + mean_i max(0, 1 - y_i * (u . x_i))

over the augmented vector u = (w, b) with step 1/(reg * t). The averaged
iterate is returned; scores are raw margins w . x_std + b.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLabels


@dataclass
class SvmModel:
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    std: np.ndarray

    def score(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return (X - self.mean) / self.std @ self.weights + self.bias

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SvmModel":
        return cls(
            weights=np.asarray(doc["weights"], dtype=np.float64),
            bias=float(doc["bias"]),
            mean=np.asarray(doc["mean"], dtype=np.float64),
            std=np.asarray(doc["std"], dtype=np.float64),
        )


def standardize_stats(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column mean and standard deviation; constant columns get std 1."""
    X = np.asarray(X, dtype=np.float64)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0.0] = 1.0
    return mean, std


def hinge_subgradient(u: np.ndarray, x: np.ndarray, y: float, reg: float) -> np.ndarray:
    """Subgradient of the regularized per-sample objective at u.

    At margin > 1 (and exactly at 1) this is reg * u with no data term.
    """
    g = reg * u
    if y * (u @ x) < 1.0:
        g = g - y * x
    return g


def svm_objective(u: np.ndarray, X_aug: np.ndarray, y_signed: np.ndarray, reg: float) -> float:
    """Training objective in homogeneous form (bias inside the norm)."""
    margins = y_signed * (X_aug @ u)
    hinge = np.maximum(0.0, 1.0 - margins)
    return 0.5 * reg * float(u @ u) + float(hinge.mean())


def fit_pegasos(
    X: np.ndarray,
    y: np.ndarray,
    reg_lambda: float = 1e-2,
    epochs: int = 30,
    rng: np.random.Generator | None = None,
) -> SvmModel:
    """Averaged Pegasos on standardized features.

    ``y`` is 0/1 and mapped internally to -1/+1. Raises DegenerateLabels
    when one class is absent.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if y.size == 0 or len(np.unique(y)) < 2:
        raise DegenerateLabels("pegasos needs both classes present")
    if rng is None:
        rng = np.random.default_rng(0)
    y_signed = np.where(y == 1, 1.0, -1.0)
    mean, std = standardize_stats(X)
    X_aug = np.column_stack([(X - mean) / std, np.ones(len(X))])

    n, d = X_aug.shape
    u = np.zeros(d)
    u_sum = np.zeros(d)
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (reg_lambda * t)
            u *= 1.0 - eta * reg_lambda  # = 1 - 1/t
            if y_signed[i] * (u @ X_aug[i]) < 1.0:
                u += eta * y_signed[i] * X_aug[i]
            u_sum += u
    u_avg = u_sum / t
    return SvmModel(weights=u_avg[:-1], bias=float(u_avg[-1]), mean=mean, std=std)
