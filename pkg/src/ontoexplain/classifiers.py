"""Logistic regression and k-nearest-neighbour classifiers.

Both models expose what the evidence selection needs: LR its separating
hyperplane, kNN its labelled training points.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .data_model import Dataset, Standardizer
from .errors import DataError, TrainingError

log = logging.getLogger(__name__)


def sigmoid(y):
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    pos = y >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-y[pos]))
    e = np.exp(y[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _design(X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.hstack([np.ones((X.shape[0], 1)), X])


def log_likelihood(w, X, y, ridge=0.0):
    """Mean Bernoulli log-likelihood of ``y`` under weights ``w`` (intercept first)."""
    z = _design(X) @ w
    # log p = -log(1+e^-z), log(1-p) = -log(1+e^z)
    ll = -(y * np.logaddexp(0.0, -z) + (1 - y) * np.logaddexp(0.0, z))
    return float(ll.mean() - 0.5 * ridge * np.dot(w[1:], w[1:]))


def log_likelihood_grad(w, X, y, ridge=0.0):
    A = _design(X)
    g = A.T @ (y - sigmoid(A @ w)) / A.shape[0]
    g[1:] -= ridge * w[1:]
    return g


@dataclass(frozen=True)
class LRModel:
    weights: np.ndarray
    scaler: Standardizer | None = None
    iterations_run: int = 0
    converged: bool = False

    kind = "lr"

    @property
    def n(self) -> int:
        return len(self.weights) - 1

    def logits(self, X):
        return _design(X) @ self.weights

    def predict_labels(self, X) -> np.ndarray:
        return (sigmoid(self.logits(X)) >= 0.5).astype(int)

    def boundary_distances(self, X) -> np.ndarray:
        norm = np.linalg.norm(self.weights[1:])
        if norm == 0:
            raise TrainingError("all non-intercept weights are zero; decision boundary undefined")
        return np.abs(self.logits(X)) / norm


def lr_train(ds: Dataset, iterations: int = 5000, learning_rate: float = 0.1,
             ridge: float = 0.0, tol: float = 1e-4, scaler: Standardizer | None = None) -> LRModel:
    """Full-batch gradient ascent on the mean log-likelihood."""
    y = ds.labels.astype(float)
    if len(np.unique(ds.labels)) < 2:
        raise TrainingError("single-class training set")
    X = ds.points
    w = np.zeros(X.shape[1] + 1)
    converged = False
    it = 0
    for it in range(1, iterations + 1):
        g = log_likelihood_grad(w, X, y, ridge)
        if np.linalg.norm(g) < tol:
            converged = True
            break
        w = w + learning_rate * g
        if not np.all(np.isfinite(w)) or not np.isfinite(log_likelihood(w, X, y, ridge)):
            raise TrainingError(f"non-finite loss at iteration {it}")
    log.debug("lr_train: %d iterations, converged=%s", it, converged)
    return LRModel(w, scaler, it, converged)


def lr_predict(model: LRModel, x) -> tuple[float, int]:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise ValueError(f"dimension mismatch: model expects {model.n}, got {x.shape}")
    p = float(sigmoid(model.logits(x))[0])
    return p, int(p >= 0.5)


def lr_boundary_distance(model: LRModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise ValueError(f"dimension mismatch: model expects {model.n}, got {x.shape}")
    return float(model.boundary_distances(x)[0])


@dataclass(frozen=True)
class KNNModel:
    k: int
    points: np.ndarray
    labels: np.ndarray

    kind = "knn"

    def __post_init__(self):
        if len(self.points) == 0:
            raise DataError("empty training set")
        if not 1 <= self.k <= len(self.points):
            raise ValueError(f"k must lie in [1, {len(self.points)}], got {self.k}")

    def predict_labels(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([knn_predict(self, x) for x in X], dtype=int)


def knn_train(ds: Dataset, k: int = 5) -> KNNModel:
    return KNNModel(k, ds.points, ds.labels)


def knn_predict(model: KNNModel, x) -> int:
    """Majority vote of the k nearest points; ties go to label 0."""
    x = np.asarray(x, dtype=float)
    d = np.sqrt(((model.points - x) ** 2).sum(axis=1))
    nearest = np.argsort(d, kind="stable")[: model.k]
    ones = int(model.labels[nearest].sum())
    return int(ones > model.k - ones)


def predict_labels(model, X) -> np.ndarray:
    return model.predict_labels(X)
