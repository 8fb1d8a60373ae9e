import math
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simlens import BackendConfig, CodeFragment, attentions, embed, tokenize
from simlens.embedder import MAX_TOKENS, StubBackend, load_backend
from simlens.errors import EmptyInput, SequenceTooLong
from simlens.report import fixture

# Frozen from a hand-run of the split rule over the bubble-sort listing:
# 6 + 6 + 8 + 14 + 13 + 23 tokens on its six lines.
BUBBLE_TOKEN_COUNT = 70


def test_tokenize_simple_assignment(stub7):
    seq = tokenize(CodeFragment("x", "a = 1"), stub7)
    assert seq.surfaces == ["a", "=", "1"]
    assert len(seq) == 3
    assert [t.char_span for t in seq.tokens] == [(0, 1), (2, 3), (4, 5)]


@pytest.mark.parametrize("source", ["", "   ", "\n\t\n"])
def test_blank_source_rejected(source):
    with pytest.raises(EmptyInput):
        CodeFragment("blank", source)


def test_bubble_sort_token_count(stub7):
    assert len(tokenize(fixture("bubble"), stub7)) == BUBBLE_TOKEN_COUNT


def test_bubble_sort_first_line_tokens(stub7):
    seq = tokenize(fixture("bubble"), stub7)
    assert seq.surfaces[:6] == ["def", "bubble_sort", "(", "arr", ")", ":"]


@pytest.mark.parametrize(
    "source, expected",
    [
        ("x//=2", ["x", "//=", "2"]),
        ("a==b!=c", ["a", "==", "b", "!=", "c"]),
        ("i += 1", ["i", "+=", "1"]),
        ("f(x)->y", ["f", "(", "x", ")", "->", "y"]),
        ("3.14*r**2", ["3.14", "*", "r", "**", "2"]),
        ("j >=0", ["j", ">=", "0"]),
    ],
)
def test_operator_boundaries(stub7, source, expected):
    assert tokenize(CodeFragment("op", source), stub7).surfaces == expected


@settings(max_examples=60, deadline=None)
@given(st.text(alphabet=st.characters(min_codepoint=9, max_codepoint=126), min_size=1, max_size=80))
def test_span_integrity(source):
    if not source.strip():
        return
    config = BackendConfig(seed=1)
    seq = tokenize(CodeFragment("p", source), config)
    spans = [t.char_span for t in seq.tokens]
    assert all(s < e for s, e in spans)
    assert all(spans[k][1] <= spans[k + 1][0] for k in range(len(spans) - 1))
    assert "".join(source[s:e] for s, e in spans) == re.sub(r"\s+", "", source)
    assert all(t.surface == source[s:e] for t, (s, e) in zip(seq.tokens, spans))


def test_too_long_sequence_rejected(stub7):
    source = " ".join(["x"] * (MAX_TOKENS + 1))
    with pytest.raises(SequenceTooLong):
        tokenize(CodeFragment("long", source), stub7)
    assert len(tokenize(CodeFragment("ok", " ".join(["x"] * MAX_TOKENS)), stub7)) == MAX_TOKENS


def test_embed_is_deterministic(stub7):
    seq = tokenize(fixture("quick"), stub7)
    a = embed(seq, stub7).values
    b = embed(seq, BackendConfig(kind="stub", seed=7)).values
    assert a.tobytes() == b.tobytes()
    assert a.shape == (len(seq), 64)
    assert np.all(np.isfinite(a))


def test_identical_tokens_get_identical_rows(stub7):
    E = embed(tokenize(CodeFragment("xx", "x x"), stub7), stub7).values
    assert np.array_equal(E[0], E[1])


def test_seed_changes_embedding():
    frag = CodeFragment("s", "a = b + 1")
    c1, c2 = BackendConfig(seed=1), BackendConfig(seed=2)
    e1 = embed(tokenize(frag, c1), c1).values
    e2 = embed(tokenize(frag, c2), c2).values
    assert np.any(e1 != e2)


def test_stub_dims_configurable():
    config = BackendConfig(seed=3, stub_dim=12, stub_heads=3)
    seq = tokenize(CodeFragment("s", "a = b"), config)
    assert embed(seq, config).dim == 12
    assert attentions(seq, config).heads == 3


def test_stub_dim_must_split_into_heads():
    with pytest.raises(ValueError):
        BackendConfig(stub_dim=10, stub_heads=4)


@pytest.mark.parametrize("name", ["bubble", "selection", "insertion", "merge", "quick"])
def test_attention_rows_are_distributions(stub7, name):
    A = attentions(tokenize(fixture(name), stub7), stub7).values
    assert A.shape[0] == 4
    assert np.all(A >= 0)
    assert np.max(np.abs(A.sum(axis=2) - 1.0)) < 1e-5


def test_single_token_attention_is_one(stub7):
    A = attentions(tokenize(CodeFragment("one", "x"), stub7), stub7)
    assert A.values.shape == (4, 1, 1)
    assert np.all(A.values == 1.0)


def _reference_attention(vectors, w_q, w_k):
    """Scaled dot-product attention probabilities with plain Python loops."""
    n, d_k = len(vectors), len(w_q)

    def project(W, v):
        return [sum(W[r][c] * v[c] for c in range(len(v))) for r in range(len(W))]

    Q = [project(w_q, v) for v in vectors]
    K = [project(w_k, v) for v in vectors]
    out = []
    for i in range(n):
        logits = [sum(Q[i][c] * K[j][c] for c in range(d_k)) / math.sqrt(d_k) for j in range(n)]
        top = max(logits)
        ex = [math.exp(l - top) for l in logits]
        total = sum(ex)
        out.append([e / total for e in ex])
    return out


def test_stub_attention_matches_direct_formula():
    config = BackendConfig(seed=11)
    seq = tokenize(CodeFragment("four", "i = j + 1"), config)
    assert len(seq) == 5
    seq4 = type(seq)(seq.fragment_id, seq.tokens[:4], seq.source)
    backend = load_backend(config)
    assert isinstance(backend, StubBackend)
    vectors = [backend.token_vector(s).tolist() for s in seq4.surfaces]
    A = attentions(seq4, config).values
    for h in range(config.stub_heads):
        w_q, w_k, _ = backend.head_weights(h)
        expected = np.array(_reference_attention(vectors, w_q.tolist(), w_k.tolist()))
        np.testing.assert_allclose(A[h], expected, rtol=0, atol=1e-6)


def test_attend_shapes(stub7):
    seq = tokenize(CodeFragment("s", "a = b + c"), stub7)
    out = load_backend(stub7).attend(seq)
    assert out.shape == (4, 5, 16)


def test_empty_sequence_rejected(stub7):
    seq = tokenize(CodeFragment("s", "a"), stub7)
    empty = type(seq)("e", (), "")
    with pytest.raises(EmptyInput):
        embed(empty, stub7)
    with pytest.raises(EmptyInput):
        attentions(empty, stub7)
