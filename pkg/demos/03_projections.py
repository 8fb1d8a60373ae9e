# %% [markdown]
# # Projecting token embeddings to 2-D
#
# PCA, exact t-SNE and UMAP, all implemented with numpy. Each pair of
# fragments is projected jointly so both sets of tokens share one map.

# %%
import numpy as np

from simlens import BackendConfig, embed, tokenize
from simlens.dimred import TsneConfig, UmapConfig, pca_project, stack_embeddings, tsne_project, umap_graph, umap_project
from simlens.report import fixture

config = BackendConfig(seed=7)
E = [embed(tokenize(fixture(n), config), config) for n in ("bubble", "merge")]
X, labels = stack_embeddings(*E)
print(X.shape, labels[:3])

# %% [markdown]
# PCA signs are fixed (largest loading of each axis positive), so the
# layout is reproducible. Its trace holds the explained variances.

# %%
pca = pca_project(X, labels=labels)
print(pca.points[:3], pca.trace)

# %% [markdown]
# t-SNE returns its KL divergence after every iteration.

# %%
tsne = tsne_project(X, TsneConfig(), seed=7, labels=labels)
print("KL start %.3f, after exaggeration %.3f, end %.3f" % (tsne.trace[0], tsne.trace[250], tsne.trace[-1]))

# %% [markdown]
# UMAP first builds a fuzzy k-NN graph. The nearest neighbour always gets
# weight exactly 1 and the bandwidths are solved per point.

# %%
graph = umap_graph(X, UmapConfig(), labels)
print(graph.directed[np.arange(5), graph.knn_indices[:5, 0]])
print(graph.rho[:5].round(3), graph.sigma[:5].round(3))

umap = umap_project(X, UmapConfig(), seed=7, labels=labels)
print("sampled loss first/last epoch: %.3f / %.3f" % (umap.trace[0], umap.trace[-1]))

# %% [markdown]
# Same seed, same bits.

# %%
again = umap_project(X, UmapConfig(), seed=7, labels=labels)
print(again.points.tobytes() == umap.points.tobytes())
