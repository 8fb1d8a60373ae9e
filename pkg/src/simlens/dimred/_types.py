from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..embedder import EmbeddingMatrix


@dataclass(frozen=True, eq=False)
class Projection2D:
    points: np.ndarray
    method: str
    seed: Optional[int]
    source_labels: tuple[tuple[str, str], ...]
    trace: np.ndarray = field(default_factory=lambda: np.empty(0))
    degenerate: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"projection points must be n x 2, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise FloatingPointError(f"{self.method} produced non-finite coordinates")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "trace", np.asarray(self.trace, dtype=np.float64))
        object.__setattr__(self, "source_labels", tuple(tuple(l) for l in self.source_labels))


def stack_embeddings(*matrices: EmbeddingMatrix) -> tuple[np.ndarray, tuple[tuple[str, str], ...]]:
    """Stack the code-token rows of several fragments into one input array.

    Returns the array and a ``(fragment_id, token surface)`` label per row.
    """
    rows, labels = [], []
    for E in matrices:
        E = E.content()
        rows.append(E.values)
        labels.extend((E.fragment_id, surface) for surface in E.labels)
    return np.vstack(rows), tuple(labels)


def as_points(X, labels: Optional[Sequence] = None):
    if isinstance(X, EmbeddingMatrix):
        X, labels = stack_embeddings(X)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected an n x d array, got shape {X.shape}")
    if labels is None:
        labels = tuple(("", str(i)) for i in range(X.shape[0]))
    elif len(labels) != X.shape[0]:
        raise ValueError("one label per row is required")
    return X, tuple(labels)


def squared_distances(X: np.ndarray) -> np.ndarray:
    sq = np.einsum("ij,ij->i", X, X)
    D = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(D, 0.0, out=D)
    np.fill_diagonal(D, 0.0)
    return D
