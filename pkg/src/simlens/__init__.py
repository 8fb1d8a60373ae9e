"""Interpretable token-level similarity between source-code fragments."""
from .dimred import Projection2D, TsneConfig, UmapConfig, pca_project, project, tsne_project, umap_graph, umap_optimize
from .embedder import (
    AttentionTensor,
    BackendConfig,
    CodeFragment,
    EmbeddingMatrix,
    Token,
    TokenSequence,
    attentions,
    embed,
    tokenize,
)
from .saliency import SaliencyVector, saliency_map
from .simcore import (
    FragmentSimilarity,
    SimilarityMatrix,
    attention_product,
    cosine_matrix,
    fragment_matrix,
    fragment_similarity,
)

__version__ = "0.1.0"
