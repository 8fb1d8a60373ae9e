# %% [markdown]
# # Tokens, embeddings and attention
#
# Every analysis starts from a token sequence. The stub backend splits code on
# identifiers, numbers and operators, and gives each token a seeded random
# vector, so everything below runs without model weights.

# %%
import numpy as np

from simlens import BackendConfig, CodeFragment, attentions, embed, tokenize

config = BackendConfig(kind="stub", seed=7)
frag = CodeFragment("swap", "a, b = b, a")
seq = tokenize(frag, config)
for tok in seq.tokens:
    print(tok.token_id, repr(tok.surface), tok.char_span)

# %% [markdown]
# Identical surfaces map to identical vectors.

# %%
E = embed(seq, config)
print(E.values.shape)
print(np.array_equal(E.values[0], E.values[5]))  # "a" ... "a"

# %% [markdown]
# Attention comes as one row-stochastic n x n map per head.

# %%
A = attentions(seq, config)
print(A.values.shape)
print(A.values.sum(axis=2).round(6))

np.set_printoptions(precision=3, suppress=True)
print(A.values[0])

# %% [markdown]
# With real weights, point `SIMLENS_MODEL_DIR` at a directory holding
# `model.onnx` and `tokenizer.json` and use `BackendConfig(kind="model")`.
# Delimiter tokens such as `<s>` are then flagged `is_special` and dropped
# by every downstream computation.
