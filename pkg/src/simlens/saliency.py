"""Closed-form token saliency: the norm of d sim(F1, F2) / d e_i for every code token."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NaNGradient, ZeroNormEmbedding
from .simcore import DEFAULT_POOLING, _as_matrix, _check_dims, _unit_rows, normalize_pooling, unit_cosines


@dataclass(frozen=True, eq=False)
class SaliencyVector:
    fragment_id: str
    scores: np.ndarray
    pooling: str
    paired_fragment_id: str
    labels: tuple[str, ...] = ()


def mean_pool_gradients(X1: np.ndarray, X2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-token gradients of the cosine between the two mean-pooled vectors.

    Every token of a fragment receives the same gradient (scaled by ``1/n``).
    """
    u = X1.mean(axis=0)
    v = X2.mean(axis=0)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ZeroNormEmbedding("mean-pooled embedding has zero norm")
    uv = u @ v
    du = v / (nu * nv) - uv * u / (nu**3 * nv)
    dv = u / (nu * nv) - uv * v / (nv**3 * nu)
    g1 = np.tile(du / X1.shape[0], (X1.shape[0], 1))
    g2 = np.tile(dv / X2.shape[0], (X2.shape[0], 1))
    return g1, g2


def greedy_match_gradients(X1: np.ndarray, X2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-token (sub)gradients of the two-sided greedy-match score.

    Each ``max`` routes its gradient to a single winner; ties go to the lowest
    index (``np.argmax`` semantics).
    """
    U1, n1 = _unit_rows(X1)
    U2, n2 = _unit_rows(X2)
    C = unit_cosines(U1, U2)
    m1, m2 = X1.shape[0], X2.shape[0]

    # weight[i, j]: coefficient of cos(e_i, f_j) in the score
    weight = np.zeros_like(C)
    weight[np.arange(m1), C.argmax(axis=1)] += 0.5 / m1
    weight[C.argmax(axis=0), np.arange(m2)] += 0.5 / m2

    # d cos(e, f) / d e = (f_hat - cos * e_hat) / |e|
    g1 = (weight @ U2 - (weight * C).sum(axis=1)[:, None] * U1) / n1[:, None]
    g2 = (weight.T @ U1 - (weight * C).sum(axis=0)[:, None] * U2) / n2[:, None]
    return g1, g2


def saliency_map(E1, E2, pooling: str = DEFAULT_POOLING) -> tuple[SaliencyVector, SaliencyVector]:
    pooling = normalize_pooling(pooling)
    X1, l1 = _as_matrix(E1)
    X2, l2 = _as_matrix(E2)
    _check_dims(X1, X2)
    if pooling == "mean_pool_cosine":
        g1, g2 = mean_pool_gradients(X1, X2)
    else:
        g1, g2 = greedy_match_gradients(X1, X2)
    if not (np.all(np.isfinite(g1)) and np.all(np.isfinite(g2))):
        raise NaNGradient("similarity gradient is not finite")
    id1 = getattr(E1, "fragment_id", "fragment_1")
    id2 = getattr(E2, "fragment_id", "fragment_2")
    return (
        SaliencyVector(id1, np.linalg.norm(g1, axis=1), pooling, id2, l1),
        SaliencyVector(id2, np.linalg.norm(g2, axis=1), pooling, id1, l2),
    )
