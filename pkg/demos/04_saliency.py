# %% [markdown]
# # Which tokens drive the similarity score?
#
# Saliency is the norm of the gradient of the fragment score with respect to
# each token's embedding, in closed form.

# %%
import numpy as np

from simlens import BackendConfig, embed, saliency_map, tokenize
from simlens.report import fixture

config = BackendConfig(seed=7)
bubble = embed(tokenize(fixture("bubble"), config), config)
quick = embed(tokenize(fixture("quick"), config), config)

# %% [markdown]
# Under mean pooling every token of a fragment gets the same score, which is
# why greedy matching is the default.

# %%
s_mean, _ = saliency_map(bubble, quick, "mean_pool_cosine")
print(np.ptp(s_mean.scores))

s1, s2 = saliency_map(bubble, quick, "greedy_match")
top = np.argsort(s1.scores)[::-1][:8]
for i in top:
    print(f"{s1.labels[i]:>12s}  {s1.scores[i]:.4f}")

# %% [markdown]
# Repeated surfaces (every `(` has the same stub vector) tie for the max, and
# the tie goes to the lowest index: the first occurrence collects the whole
# gradient and its copies get nothing. Finite differences cannot agree at
# such a kink, so the check below uses a token that appears once.

# %%
from simlens.saliency import greedy_match_gradients
from simlens.simcore import greedy_match

surfaces = list(s1.labels)
unique = [i for i, t in enumerate(surfaces) if surfaces.count(t) == 1 and t not in s2.labels]
i = max(unique, key=lambda j: s1.scores[j])
print("checking", repr(surfaces[i]))

X1, X2 = bubble.values, quick.values
g, _ = greedy_match_gradients(X1, X2)
h = 1e-5
fd = np.zeros(X1.shape[1])
for k in range(X1.shape[1]):
    Xp, Xm = X1.copy(), X1.copy()
    Xp[i, k] += h
    Xm[i, k] -= h
    fd[k] = (greedy_match(Xp, X2) - greedy_match(Xm, X2)) / (2 * h)
print(np.linalg.norm(g[i] - fd) / np.linalg.norm(fd))
