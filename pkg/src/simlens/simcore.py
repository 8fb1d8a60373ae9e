"""Token-level and fragment-level similarity.

Special (delimiter) tokens are removed before any matrix or pooled score is
formed, so every function here works on code tokens only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embedder import AttentionTensor, BackendConfig, CodeFragment, EmbeddingMatrix, embed, tokenize
from .errors import DimMismatch, HeadMismatch, ZeroNormEmbedding

POOLINGS = ("mean_pool_cosine", "greedy_match")
DEFAULT_POOLING = "greedy_match"
_POOLING_ALIASES = {"mean": "mean_pool_cosine", "greedy": "greedy_match"}


def normalize_pooling(pooling: str) -> str:
    pooling = _POOLING_ALIASES.get(pooling, pooling)
    if pooling not in POOLINGS:
        raise ValueError(f"unknown pooling {pooling!r}; expected one of {POOLINGS}")
    return pooling


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    kind: str
    values: np.ndarray
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class FragmentSimilarity:
    value: float
    pooling: str


def _as_matrix(E) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(E, EmbeddingMatrix):
        E = E.content()
        return E.values, E.labels
    values = np.atleast_2d(np.asarray(E, dtype=np.float64))
    return values, tuple(str(i) for i in range(values.shape[0]))


def _unit_rows(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0) or not np.all(np.isfinite(norms)):
        raise ZeroNormEmbedding("embedding contains a zero-norm or non-finite row")
    return X / norms[:, None], norms


def _check_dims(X1: np.ndarray, X2: np.ndarray) -> None:
    if X1.shape[1] != X2.shape[1]:
        raise DimMismatch(f"embedding widths differ: {X1.shape[1]} vs {X2.shape[1]}")
    if X1.shape[0] == 0 or X2.shape[0] == 0:
        raise ValueError("need at least one code token on each side")


def unit_cosines(U1: np.ndarray, U2: np.ndarray) -> np.ndarray:
    # einsum (not BLAS) keeps every entry's summation order identical, so equal
    # rows give bitwise-equal cosines and argument order does not matter
    return np.clip(np.einsum("id,jd->ij", U1, U2), -1.0, 1.0)


def cosine_values(X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
    U1, _ = _unit_rows(X1)
    U2, _ = _unit_rows(X2)
    return unit_cosines(U1, U2)


def cosine_matrix(E1, E2) -> SimilarityMatrix:
    """Cosine similarity between every code token of ``E1`` and every code token of ``E2``.

    Accepts :class:`EmbeddingMatrix` objects or plain 2-D arrays.
    """
    X1, l1 = _as_matrix(E1)
    X2, l2 = _as_matrix(E2)
    _check_dims(X1, X2)
    return SimilarityMatrix("cosine", cosine_values(X1, X2), l1, l2)


def _as_attention(A) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(A, AttentionTensor):
        A = A.content()
        return A.values, A.labels
    values = np.asarray(A, dtype=np.float64)
    if values.ndim == 2:
        values = values[None]
    return values, tuple(str(i) for i in range(values.shape[1]))


def attention_product(A1, A2) -> SimilarityMatrix:
    """Head-averaged product ``A1 A2^T`` of two attention tensors.

    When the fragments differ in length the column (key) axis of both tensors
    is zero-padded to the longer length, so row ``i`` of the result is the dot
    product of token ``i``'s attention distribution in fragment one with token
    ``j``'s distribution in fragment two, aligned by key position.
    """
    V1, l1 = _as_attention(A1)
    V2, l2 = _as_attention(A2)
    if V1.shape[0] != V2.shape[0]:
        raise HeadMismatch(f"head counts differ: {V1.shape[0]} vs {V2.shape[0]}")
    width = max(V1.shape[2], V2.shape[2])
    P1 = np.pad(V1, ((0, 0), (0, 0), (0, width - V1.shape[2])))
    P2 = np.pad(V2, ((0, 0), (0, 0), (0, width - V2.shape[2])))
    S = np.einsum("hik,hjk->ij", P1, P2) / V1.shape[0]
    return SimilarityMatrix("attention_product", S, l1, l2)


def mean_pool_cosine(X1: np.ndarray, X2: np.ndarray) -> float:
    u = X1.mean(axis=0)
    v = X2.mean(axis=0)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ZeroNormEmbedding("mean-pooled embedding has zero norm")
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def greedy_match(X1: np.ndarray, X2: np.ndarray) -> float:
    """Average of best-match cosines in both directions."""
    C = cosine_values(X1, X2)
    return float(0.5 * (C.max(axis=1).mean() + C.max(axis=0).mean()))


def fragment_similarity(E1, E2, pooling: str = DEFAULT_POOLING) -> FragmentSimilarity:
    pooling = normalize_pooling(pooling)
    X1, _ = _as_matrix(E1)
    X2, _ = _as_matrix(E2)
    _check_dims(X1, X2)
    if pooling == "mean_pool_cosine":
        value = mean_pool_cosine(X1, X2)
    else:
        value = greedy_match(X1, X2)
    return FragmentSimilarity(value, pooling)


def similarity_table(embeddings: Sequence, pooling: str = DEFAULT_POOLING) -> np.ndarray:
    """Symmetric matrix of pooled similarities between already-embedded fragments."""
    n = len(embeddings)
    out = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            out[i, j] = out[j, i] = fragment_similarity(embeddings[i], embeddings[j], pooling).value
    return out


def fragment_matrix(
    corpus: Sequence[CodeFragment], config: BackendConfig, pooling: str = DEFAULT_POOLING
) -> np.ndarray:
    if len(corpus) < 2:
        raise ValueError("fragment_matrix needs at least two fragments")
    embeddings = [embed(tokenize(f, config), config) for f in corpus]
    return similarity_table(embeddings, pooling)
