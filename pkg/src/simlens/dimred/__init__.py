"""Two-dimensional projections of token embeddings: PCA, exact t-SNE and UMAP."""
from __future__ import annotations

from ._types import Projection2D, stack_embeddings
from .pca import PCAFit, fit_pca, pca_project
from .tsne import (
    TsneConfig,
    conditional_probabilities,
    joint_probabilities,
    kl_divergence,
    kl_gradient,
    tsne_project,
)
from .umap import UmapConfig, UmapGraph, fit_ab, umap_graph, umap_optimize, umap_project

METHODS = ("pca", "tsne", "umap")


def project(X, method: str, *, seed: int, labels=None, tsne: TsneConfig | None = None,
            umap: UmapConfig | None = None) -> Projection2D:
    if method == "pca":
        return pca_project(X, labels=labels, seed=seed)
    if method == "tsne":
        return tsne_project(X, tsne, seed=seed, labels=labels)
    if method == "umap":
        return umap_project(X, umap, seed=seed, labels=labels)
    raise ValueError(f"unknown projection method {method!r}; expected one of {METHODS}")


__all__ = [
    "METHODS",
    "PCAFit",
    "Projection2D",
    "TsneConfig",
    "UmapConfig",
    "UmapGraph",
    "conditional_probabilities",
    "fit_ab",
    "fit_pca",
    "joint_probabilities",
    "kl_divergence",
    "kl_gradient",
    "pca_project",
    "project",
    "stack_embeddings",
    "tsne_project",
    "umap_graph",
    "umap_optimize",
    "umap_project",
]
