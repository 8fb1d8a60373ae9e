from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputWarning
from ._types import Projection2D, as_points


@dataclass(frozen=True, eq=False)
class PCAFit:
    mean: np.ndarray
    components: np.ndarray  # p x d, orthonormal rows
    singular_values: np.ndarray
    explained_variance: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) @ self.components.T

    def inverse_transform(self, Y: np.ndarray) -> np.ndarray:
        return Y @ self.components + self.mean


def fit_pca(X: np.ndarray, p: int = 2) -> PCAFit:
    """Top-``p`` principal axes of ``X`` from a thin SVD of the centred data.

    Signs are fixed so that each component's largest-magnitude loading is
    positive (first index wins ties).
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if n < 2 or d < p:
        raise ValueError(f"PCA to {p} dimensions needs n >= 2 and d >= {p}; got {X.shape}")
    mean = X.mean(axis=0)
    _, s, vt = np.linalg.svd(X - mean, full_matrices=False)
    components = vt[:p].copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return PCAFit(mean, components, s[:p], s[:p] ** 2 / (n - 1))


def pca_project(X, p: int = 2, labels=None, seed=None) -> Projection2D:
    X, labels = as_points(X, labels)
    if p != 2:
        raise ValueError("only 2-D projections are supported")
    if X.shape[0] < 2:
        raise ValueError("PCA needs at least two points")
    if np.all(X == X[0]):
        warnings.warn("all points coincide; PCA projection is all zeros", DegenerateInputWarning)
        return Projection2D(np.zeros((X.shape[0], 2)), "pca", seed, labels, degenerate=True)
    fit = fit_pca(X, p)
    Y = fit.transform(X)
    return Projection2D(Y, "pca", seed, labels, trace=fit.explained_variance)
