"""Exact (all-pairs) t-SNE."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PerplexityTooLarge, TooFewPoints
from ._types import Projection2D, as_points, squared_distances
from .pca import fit_pca


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    early_exaggeration: float = 12.0
    exaggeration_iterations: int = 250
    initial_momentum: float = 0.5
    final_momentum: float = 0.8
    init_scale: float = 1e-4
    min_gain: float = 0.01

    def __post_init__(self):
        if self.perplexity < 2:
            raise ValueError("perplexity must be >= 2")
        if self.iterations < 250:
            raise ValueError("iterations must be >= 250")


def _row_distribution(d: np.ndarray, beta: float) -> tuple[np.ndarray, float]:
    # shift by the smallest distance: same distribution, no underflow
    w = np.exp(-(d - d.min()) * beta)
    p = w / w.sum()
    nz = p > 0
    return p, float(-(p[nz] * np.log2(p[nz])).sum())


def conditional_probabilities(
    D_sq: np.ndarray, perplexity: float, tol: float = 1e-5, max_iter: int = 200
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gaussian conditionals ``P[i, j] = p(j | i)`` calibrated to ``perplexity``.

    ``beta_i = 1 / (2 sigma_i^2)`` is bisected until the row entropy is within
    ``tol`` bits of ``log2(perplexity)``.

    Returns:
        (P, sigma, entropy) with entropies in bits.
    """
    D_sq = np.asarray(D_sq, dtype=np.float64)
    n = D_sq.shape[0]
    target = np.log2(perplexity)
    P = np.zeros((n, n))
    sigma = np.empty(n)
    entropy = np.empty(n)
    for i in range(n):
        others = np.r_[0:i, i + 1 : n]
        d = D_sq[i, others]
        spread = d.max() - d.min()
        beta = 1.0 / spread if spread > 0 else 1.0
        lo, hi = 0.0, np.inf
        for _ in range(max_iter):
            p, h = _row_distribution(d, beta)
            if abs(h - target) < tol:
                break
            if h > target:  # too flat: sharpen
                lo = beta
                beta = beta * 2.0 if np.isinf(hi) else 0.5 * (beta + hi)
            else:
                hi = beta
                beta = 0.5 * (beta + lo)
        P[i, others] = p
        sigma[i] = np.sqrt(1.0 / (2.0 * beta)) if beta > 0 else np.inf
        entropy[i] = h
    return P, sigma, entropy


def joint_probabilities(X: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized input affinities ``(p(j|i) + p(i|j)) / 2n``; sums to one."""
    P_cond, _, _ = conditional_probabilities(squared_distances(X), perplexity)
    return (P_cond + P_cond.T) / (2.0 * X.shape[0])


def _entropy_term(P: np.ndarray) -> float:
    mask = P > 0
    return float(np.sum(P[mask] * np.log(P[mask])))


def _kl_and_gradient(P: np.ndarray, Y: np.ndarray, p_log_p: float, exaggeration: float = 1.0):
    # KL from log Q = log(num) - log(Z); one kernel evaluation serves both outputs
    num = 1.0 / (1.0 + squared_distances(Y))  # diagonal is exactly 1 here
    log_num = np.log(num)
    np.fill_diagonal(num, 0.0)
    Z = num.sum()
    kl = p_log_p - float(np.sum(P * log_num)) + float(P.sum()) * np.log(Z)
    W = (exaggeration * P - num / Z) * num
    grad = 4.0 * (W.sum(axis=1)[:, None] * Y - W @ Y)
    return kl, grad


def kl_divergence(P: np.ndarray, Y: np.ndarray) -> float:
    return kl_gradient(P, Y)[0]


def kl_gradient(P: np.ndarray, Y: np.ndarray) -> tuple[float, np.ndarray]:
    """KL(P || Q) and its gradient with respect to the layout ``Y``."""
    return _kl_and_gradient(P, Y, _entropy_term(P))


def effective_perplexity(config: TsneConfig, n: int) -> float:
    perplexity = min(config.perplexity, (n - 1) / 3.0)
    if perplexity < 2:
        raise PerplexityTooLarge(
            f"perplexity {config.perplexity} clamps to {perplexity:.3g} for n={n}; need at least 7 points"
        )
    return perplexity


def initial_layout(X: np.ndarray, scale: float, seed: int) -> np.ndarray:
    if np.all(X == X[0]):
        return np.random.default_rng(seed).standard_normal((X.shape[0], 2)) * scale
    Y = fit_pca(X, 2).transform(X)
    std = Y[:, 0].std()
    return Y / std * scale if std > 0 else Y


def tsne_project(X, config: TsneConfig | None = None, *, seed: int, labels=None) -> Projection2D:
    """Embed the rows of ``X`` in 2-D by gradient descent on KL(P || Q).

    The returned projection's ``trace`` holds the KL divergence at the initial
    layout followed by its value after every iteration.
    """
    config = config or TsneConfig()
    X, labels = as_points(X, labels)
    n = X.shape[0]
    if n < 4:
        raise TooFewPoints("t-SNE needs at least 4 points")
    P = joint_probabilities(X, effective_perplexity(config, n))

    Y = initial_layout(X, config.init_scale, seed)
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    p_log_p = _entropy_term(P)
    # the learning rate is scaled for the gradient without its constant factor 4
    step = config.learning_rate / 4.0
    trace = []
    for it in range(config.iterations):
        if it == config.exaggeration_iterations:
            # the objective changes here; velocity and gains from the exaggerated phase are stale
            update[:] = 0.0
            gains[:] = 1.0
        early = it < config.exaggeration_iterations
        kl, grad = _kl_and_gradient(P, Y, p_log_p, config.early_exaggeration if early else 1.0)
        trace.append(kl)
        momentum = config.initial_momentum if early else config.final_momentum
        gains = np.where(update * grad < 0, gains + 0.2, gains * 0.8)
        np.maximum(gains, config.min_gain, out=gains)
        update = momentum * update - step * gains * grad
        Y = Y + update
        Y -= Y.mean(axis=0)
    trace.append(_kl_and_gradient(P, Y, p_log_p)[0])
    return Projection2D(Y, "tsne", seed, labels, trace=np.array(trace))
