# %% [markdown]
# # Token and fragment similarity
#
# Cosine similarity between token vectors, the head-averaged attention
# product, and two ways of pooling a token matrix into one fragment score.

# %%
import numpy as np

from simlens import BackendConfig, attention_product, attentions, cosine_matrix, embed, fragment_similarity, tokenize
from simlens.report import fixture

np.set_printoptions(precision=3, suppress=True)
config = BackendConfig(seed=7)

seqs = {name: tokenize(fixture(name), config) for name in ("bubble", "insertion")}
emb = {name: embed(s, config) for name, s in seqs.items()}

S = cosine_matrix(emb["bubble"], emb["insertion"])
print(S.values.shape)
print(S.row_labels[:6])
print(S.values[:6, :6])

# %% [markdown]
# Attention maps of different lengths are zero-padded on the key axis
# before multiplying, so the product is n1 x n2 and stays in [0, 1].

# %%
P = attention_product(attentions(seqs["bubble"], config), attentions(seqs["insertion"], config))
print(P.values.shape, P.values.min(), P.values.max())

# %% [markdown]
# Mean pooling compares two averaged vectors. Greedy matching averages each
# token's best match in both directions and is the default.

# %%
for pooling in ("mean_pool_cosine", "greedy_match"):
    print(pooling, round(fragment_similarity(emb["bubble"], emb["insertion"], pooling).value, 4))

# %% [markdown]
# A tiny hand-checkable case: {[1,0],[0,1]} against {[1,0]} gives
# 1/2 * ((1 + 0)/2 + 1) = 0.75.

# %%
print(fragment_similarity(np.eye(2), np.array([[1.0, 0.0]]), "greedy_match").value)
