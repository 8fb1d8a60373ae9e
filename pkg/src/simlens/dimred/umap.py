"""UMAP: fuzzy k-NN graph plus negative-sampling layout optimization."""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from ..errors import TooFewPoints
from ._types import Projection2D, as_points, squared_distances
from .pca import fit_pca

KERNEL_FLOOR = 1e-12
GRAD_CLIP = 4.0


@dataclass(frozen=True)
class UmapConfig:
    n_neighbors: int = 15
    min_dist: float = 0.1
    epochs: int = 200
    negative_samples: int = 5
    learning_rate: float = 1.0
    spread: float = 1.0

    def __post_init__(self):
        if self.n_neighbors < 2:
            raise ValueError("n_neighbors must be >= 2")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass(frozen=True, eq=False)
class UmapGraph:
    data: np.ndarray
    labels: tuple
    knn_indices: np.ndarray  # n x k, nearest first, ties by index
    knn_distances: np.ndarray
    rho: np.ndarray
    sigma: np.ndarray
    calibrated: np.ndarray  # False where every neighbour sits at distance rho
    directed: np.ndarray  # n x n memberships before symmetrization
    weights: np.ndarray  # symmetric fuzzy union

    @property
    def n_neighbors(self) -> int:
        return self.knn_indices.shape[1]

    def edges(self) -> list[tuple[int, int, float]]:
        i, j = np.nonzero(np.triu(self.weights, k=1))
        return [(int(a), int(b), float(self.weights[a, b])) for a, b in zip(i, j)]


def nearest_neighbors(X: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact k-NN (self excluded); equal distances resolve to the lower index."""
    D = np.sqrt(squared_distances(X))
    np.fill_diagonal(D, np.inf)
    idx = np.argsort(D, axis=1, kind="stable")[:, :k]
    return idx, np.take_along_axis(D, idx, axis=1)


def membership_sum(d: np.ndarray, rho: float, sigma: float) -> float:
    return float(np.exp(-(d - rho) / (sigma + KERNEL_FLOOR)).sum())


def calibrate_bandwidths(
    knn_distances: np.ndarray, tol: float = 1e-6, max_iter: int = 200
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-point rho (nearest distance) and sigma with membership sum = log2(k).

    Returns:
        (rho, sigma, calibrated)
    """
    n, k = knn_distances.shape
    target = np.log2(k)
    rho = knn_distances[:, 0].copy()
    sigma = np.empty(n)
    calibrated = np.ones(n, dtype=bool)
    positive = knn_distances[knn_distances > 0]
    fallback = 1e-3 * positive.mean() if positive.size else 1.0
    for i in range(n):
        d = knn_distances[i]
        # the sum never drops below the count of neighbours at distance rho
        if np.count_nonzero(d <= rho[i]) > target:
            sigma[i] = fallback
            calibrated[i] = False
            continue
        lo, hi = 0.0, np.inf
        mid = max(float(np.mean(d - rho[i])), KERNEL_FLOOR)
        for _ in range(max_iter):
            s = membership_sum(d, rho[i], mid)
            if abs(s - target) < tol:
                break
            if s > target:
                hi = mid
                mid = 0.5 * (lo + mid)
            else:
                lo = mid
                mid = mid * 2.0 if np.isinf(hi) else 0.5 * (mid + hi)
        sigma[i] = mid
    return rho, sigma, calibrated


def umap_graph(E, config: UmapConfig | None = None, labels=None) -> UmapGraph:
    config = config or UmapConfig()
    X, labels = as_points(E, labels)
    n = X.shape[0]
    if n < 3:
        raise TooFewPoints("UMAP needs at least 3 points")
    k = min(config.n_neighbors, n - 1)
    idx, dist = nearest_neighbors(X, k)
    rho, sigma, calibrated = calibrate_bandwidths(dist)

    directed = np.zeros((n, n))
    member = np.exp(-(dist - rho[:, None]) / (sigma[:, None] + KERNEL_FLOOR))
    np.put_along_axis(directed, idx, member, axis=1)
    weights = directed + directed.T - directed * directed.T
    return UmapGraph(X, labels, idx, dist, rho, sigma, calibrated, directed, weights)


@functools.lru_cache(maxsize=16)
def fit_ab(min_dist: float, spread: float = 1.0) -> tuple[float, float]:
    """Least-squares fit of ``1 / (1 + a x^(2b))`` to the offset-exponential target curve."""
    x = np.linspace(0.0, 3.0 * spread, 300)
    y = np.where(x < min_dist, 1.0, np.exp(-(x - min_dist) / spread))
    (a, b), _ = curve_fit(lambda x, a, b: 1.0 / (1.0 + a * x ** (2 * b)), x, y)
    return float(a), float(b)


def low_dim_similarity(d2: np.ndarray, a: float, b: float) -> np.ndarray:
    return 1.0 / (1.0 + a * np.power(d2, b))


def _initial_layout(X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if np.all(X == X[0]):
        return rng.uniform(-10.0, 10.0, size=(X.shape[0], 2))
    Y = fit_pca(X, 2).transform(X)
    return 10.0 * Y / np.abs(Y).max()


def umap_optimize(graph: UmapGraph, config: UmapConfig | None = None, *, seed: int) -> Projection2D:
    """Minimize the fuzzy cross-entropy by epoch-batched SGD with negative sampling.

    Each edge is visited at a rate proportional to its weight. Within an
    epoch, all sampled attractive and repulsive moves are computed from the
    same layout and applied together, which keeps the run deterministic and
    vectorized. ``trace`` holds the mean sampled loss per epoch.
    """
    config = config or UmapConfig()
    a, b = fit_ab(config.min_dist, config.spread)
    rng = np.random.default_rng(seed)
    W = graph.weights
    n = W.shape[0]

    W = np.where(W >= W.max() / config.epochs, W, 0.0)
    np.fill_diagonal(W, 0.0)
    heads, tails = np.nonzero(W)
    w = W[heads, tails]
    epochs_per_sample = w.max() / w
    next_sample = epochs_per_sample.copy()

    Y = _initial_layout(graph.data, rng)
    trace = np.empty(config.epochs)
    for epoch in range(config.epochs):
        alpha = config.learning_rate * (1.0 - epoch / config.epochs)
        active = next_sample <= epoch + 1
        h, t = heads[active], tails[active]
        next_sample[active] += epochs_per_sample[active]
        delta = np.zeros_like(Y)

        diff = Y[h] - Y[t]
        d2 = np.einsum("ij,ij->i", diff, diff)
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = np.where(
                d2 > 0, -2.0 * a * b * np.power(d2, b - 1.0) / (1.0 + a * np.power(d2, b)), 0.0
            )
        g = np.clip(coef[:, None] * diff, -GRAD_CLIP, GRAD_CLIP)
        np.add.at(delta, h, alpha * g)
        np.add.at(delta, t, -alpha * g)
        pos_loss = -np.log(np.maximum(low_dim_similarity(d2, a, b), KERNEL_FLOOR))

        neg = rng.integers(0, n, size=(h.size, config.negative_samples))
        valid = neg != h[:, None]
        diff_n = Y[h][:, None, :] - Y[neg]
        d2n = np.einsum("ijk,ijk->ij", diff_n, diff_n)
        coef_n = 2.0 * b / ((0.001 + d2n) * (1.0 + a * np.power(d2n, b)))
        g_n = np.where(
            (d2n > 0)[..., None], np.clip(coef_n[..., None] * diff_n, -GRAD_CLIP, GRAD_CLIP), GRAD_CLIP
        )
        g_n = np.where(valid[..., None], g_n, 0.0)
        np.add.at(delta, h, alpha * g_n.sum(axis=1))
        neg_loss = -np.log(np.maximum(1.0 - low_dim_similarity(d2n[valid], a, b), KERNEL_FLOOR))

        Y = Y + delta
        trace[epoch] = (pos_loss.sum() + neg_loss.sum()) / max(h.size, 1)
    return Projection2D(Y, "umap", seed, graph.labels, trace=trace)


def umap_project(X, config: UmapConfig | None = None, *, seed: int, labels=None) -> Projection2D:
    config = config or UmapConfig()
    return umap_optimize(umap_graph(X, config, labels), config, seed=seed)
