"""Tokens, contextual embeddings and attention tensors for code fragments.

Two backends sit behind the same three calls (:func:`tokenize`, :func:`embed`,
:func:`attentions`):

* ``stub`` -- deterministic and file-free. Tokens come from a regular
  expression split, vectors are drawn from a generator keyed on
  ``(seed, token surface)`` and attention is real scaled dot-product attention
  over those vectors with seeded projection matrices.
* ``model`` -- an ONNX export of a transformer encoder plus a ``tokenizer.json``
  subword tokenizer. The graph must expose ``last_hidden_state`` and the
  last layer's attention probabilities.
"""
from __future__ import annotations

import functools
import hashlib
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (
    AttentionUnavailable,
    DimensionMismatch,
    EmptyInput,
    ModelLoadError,
    SequenceTooLong,
    TokenizerLoadError,
)

MAX_TOKENS = 512
MODEL_DIR_ENV = "SIMLENS_MODEL_DIR"
DEFAULT_MODEL_FILE = "model.onnx"
DEFAULT_TOKENIZER_FILE = "tokenizer.json"

# Identifiers, numbers, multi-character operators, then any single visible
# character. Whitespace never ends up inside a token.
STUB_TOKEN_PATTERN = re.compile(
    r"""
    [^\W\d]\w*
    | \d+(?:\.\d+)?
    | \*\*= | //= | >>= | <<= | \.\.\.
    | == | != | <= | >= | // | \*\* | \+= | -= | \*= | /= | %= | &= | \|= | \^=
    | -> | << | >> | :=
    | \S
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class CodeFragment:
    id: str
    source: str
    language: str = "python"

    def __post_init__(self):
        if not self.source.strip():
            raise EmptyInput(f"fragment {self.id!r} has blank source")


@dataclass(frozen=True)
class Token:
    token_id: int
    surface: str
    char_span: tuple[int, int]
    is_special: bool = False


@dataclass(frozen=True)
class TokenSequence:
    fragment_id: str
    tokens: tuple[Token, ...]
    source: str = ""

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    @property
    def special_mask(self) -> np.ndarray:
        return np.array([t.is_special for t in self.tokens], dtype=bool)

    def content_tokens(self) -> list[Token]:
        return [t for t in self.tokens if not t.is_special]


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """``n x d`` token vectors, one row per token of a :class:`TokenSequence`."""

    fragment_id: str
    values: np.ndarray
    labels: tuple[str, ...]
    special: np.ndarray = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DimensionMismatch(f"embedding matrix must be 2-D, got shape {values.shape}")
        special = self.special
        if special is None:
            special = np.zeros(values.shape[0], dtype=bool)
        special = np.asarray(special, dtype=bool)
        if len(self.labels) != values.shape[0] or special.shape != (values.shape[0],):
            raise DimensionMismatch("labels/special mask do not match the number of rows")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "special", special)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def content(self) -> "EmbeddingMatrix":
        """Same matrix without the rows of special (delimiter) tokens."""
        if not self.special.any():
            return self
        keep = ~self.special
        return EmbeddingMatrix(
            self.fragment_id,
            self.values[keep],
            tuple(l for l, s in zip(self.labels, self.special) if not s),
        )


@dataclass(frozen=True, eq=False)
class AttentionTensor:
    """``H x n x n`` row-stochastic attention probabilities."""

    fragment_id: str
    values: np.ndarray
    labels: tuple[str, ...]
    special: np.ndarray = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 3 or values.shape[1] != values.shape[2]:
            raise DimensionMismatch(f"attention tensor must be H x n x n, got {values.shape}")
        special = self.special
        if special is None:
            special = np.zeros(values.shape[1], dtype=bool)
        special = np.asarray(special, dtype=bool)
        if len(self.labels) != values.shape[1] or special.shape != (values.shape[1],):
            raise DimensionMismatch("labels/special mask do not match the attention size")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "special", special)

    @property
    def heads(self) -> int:
        return self.values.shape[0]

    @property
    def size(self) -> int:
        return self.values.shape[1]

    def content(self) -> "AttentionTensor":
        """Drop special-token rows and columns, then renormalize each row to sum to 1."""
        if not self.special.any():
            return self
        keep = ~self.special
        sub = self.values[:, keep][:, :, keep]
        mass = sub.sum(axis=2, keepdims=True)
        # a row that attended only to delimiters falls back to uniform
        uniform = np.full_like(sub, 1.0 / max(sub.shape[2], 1))
        sub = np.where(mass > 0, sub / np.where(mass > 0, mass, 1.0), uniform)
        return AttentionTensor(
            self.fragment_id,
            sub,
            tuple(l for l, s in zip(self.labels, self.special) if not s),
        )


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "stub"
    model_path: Optional[str] = None
    tokenizer_path: Optional[str] = None
    seed: int = 0
    stub_dim: int = 64
    stub_heads: int = 4

    def __post_init__(self):
        if self.kind not in ("stub", "model"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.kind == "stub":
            if self.stub_dim < 1 or self.stub_heads < 1:
                raise ValueError("stub_dim and stub_heads must be positive")
            if self.stub_dim % self.stub_heads:
                raise ValueError("stub_dim must be divisible by stub_heads")

    def resolved(self) -> "BackendConfig":
        """Fill missing model/tokenizer paths from ``$SIMLENS_MODEL_DIR``."""
        if self.kind != "model":
            return self
        model_dir = os.environ.get(MODEL_DIR_ENV)
        model_path, tokenizer_path = self.model_path, self.tokenizer_path
        if model_dir:
            if model_path is None:
                model_path = str(Path(model_dir) / DEFAULT_MODEL_FILE)
            if tokenizer_path is None:
                tokenizer_path = str(Path(model_dir) / DEFAULT_TOKENIZER_FILE)
        return BackendConfig(
            "model", model_path, tokenizer_path, self.seed, self.stub_dim, self.stub_heads
        )

    def echo(self) -> dict:
        """JSON-friendly description with file paths reduced to basenames."""
        cfg = self.resolved()
        out = {"kind": cfg.kind, "seed": cfg.seed}
        if cfg.kind == "stub":
            out.update(stub_dim=cfg.stub_dim, stub_heads=cfg.stub_heads)
        else:
            out.update(
                model=Path(cfg.model_path).name if cfg.model_path else None,
                tokenizer=Path(cfg.tokenizer_path).name if cfg.tokenizer_path else None,
            )
        return out


def _keyed_rng(*parts) -> np.random.Generator:
    digest = hashlib.blake2b("\x00".join(map(str, parts)).encode("utf-8"), digest_size=8)
    return np.random.default_rng(int.from_bytes(digest.digest(), "little"))


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    expd = np.exp(shifted)
    return expd / expd.sum(axis=-1, keepdims=True)


def _check_length(n: int, fragment_id: str) -> None:
    if n > MAX_TOKENS:
        raise SequenceTooLong(
            f"fragment {fragment_id!r} has {n} tokens; the limit is {MAX_TOKENS}"
        )


class StubBackend:
    """Deterministic synthetic backend; needs no files."""

    concurrent = True

    def __init__(self, config: BackendConfig):
        self.config = config
        self.dim = config.stub_dim
        self.heads = config.stub_heads
        self.head_dim = config.stub_dim // config.stub_heads

    def tokenize(self, fragment: CodeFragment) -> TokenSequence:
        tokens = []
        for match in STUB_TOKEN_PATTERN.finditer(fragment.source):
            surface = match.group(0)
            token_id = int.from_bytes(
                hashlib.blake2b(surface.encode("utf-8"), digest_size=4).digest(), "little"
            ) & 0x7FFFFFFF
            tokens.append(Token(token_id, surface, (match.start(), match.end())))
        if not tokens:
            raise EmptyInput(f"fragment {fragment.id!r} produced no tokens")
        _check_length(len(tokens), fragment.id)
        return TokenSequence(fragment.id, tuple(tokens), fragment.source)

    def token_vector(self, surface: str) -> np.ndarray:
        return _keyed_rng(self.config.seed, "embed", surface).standard_normal(self.dim)

    def embed(self, seq: TokenSequence) -> EmbeddingMatrix:
        cache: dict[str, np.ndarray] = {}
        rows = []
        for surface in seq.surfaces:
            if surface not in cache:
                cache[surface] = self.token_vector(surface)
            rows.append(cache[surface])
        return EmbeddingMatrix(seq.fragment_id, np.vstack(rows), tuple(seq.surfaces), seq.special_mask)

    def head_weights(self, head: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Query, key and value projections (each ``d_k x d``) for one head."""
        rng = _keyed_rng(self.config.seed, "attention", head)
        scale = 1.0 / np.sqrt(self.dim)
        w_q, w_k, w_v = (rng.standard_normal((self.head_dim, self.dim)) * scale for _ in range(3))
        return w_q, w_k, w_v

    def _probabilities(self, values: np.ndarray) -> np.ndarray:
        probs = []
        for h in range(self.heads):
            w_q, w_k, _ = self.head_weights(h)
            q = values @ w_q.T
            k = values @ w_k.T
            probs.append(_softmax_rows(q @ k.T / np.sqrt(self.head_dim)))
        return np.stack(probs)

    def attentions(self, seq: TokenSequence) -> AttentionTensor:
        values = self.embed(seq).values
        return AttentionTensor(
            seq.fragment_id, self._probabilities(values), tuple(seq.surfaces), seq.special_mask
        )

    def attend(self, seq: TokenSequence) -> np.ndarray:
        """Attention-weighted values, ``H x n x d_k``."""
        values = self.embed(seq).values
        probs = self._probabilities(values)
        return np.stack([probs[h] @ (values @ self.head_weights(h)[2].T) for h in range(self.heads)])


_ATTENTION_NAME = re.compile(r"^(?:last_)?attentions?(?:[._/:-]?(\d+))?$")


class ModelBackend:
    """ONNX Runtime session over a serialized encoder plus a ``tokenizer.json``."""

    # InferenceSession.run may be called from several threads.
    concurrent = True

    def __init__(self, config: BackendConfig):
        self.config = config
        if not config.tokenizer_path or not Path(config.tokenizer_path).is_file():
            raise TokenizerLoadError(f"tokenizer definition not found: {config.tokenizer_path}")
        if not config.model_path or not Path(config.model_path).is_file():
            raise ModelLoadError(f"model graph not found: {config.model_path}")
        try:
            from tokenizers import Tokenizer
        except ImportError as exc:
            raise TokenizerLoadError("the 'tokenizers' package is required for the model backend") from exc
        try:
            self.tokenizer = Tokenizer.from_file(config.tokenizer_path)
        except Exception as exc:
            raise TokenizerLoadError(f"cannot load tokenizer {config.tokenizer_path}: {exc}") from exc
        try:
            import onnxruntime as ort
        except ImportError as exc:
            raise ModelLoadError("the 'onnxruntime' package is required for the model backend") from exc
        try:
            self.session = ort.InferenceSession(config.model_path, providers=["CPUExecutionProvider"])
        except Exception as exc:
            raise ModelLoadError(f"cannot load model {config.model_path}: {exc}") from exc

        self.input_names = [i.name for i in self.session.get_inputs()]
        if "input_ids" not in self.input_names:
            raise ModelLoadError("model graph has no 'input_ids' input")
        outputs = [o.name for o in self.session.get_outputs()]
        if "last_hidden_state" not in outputs:
            raise ModelLoadError("model graph has no 'last_hidden_state' output")
        self.attention_output = self._pick_attention(outputs)
        self.dim: Optional[int] = None

    @staticmethod
    def _pick_attention(outputs: Sequence[str]) -> Optional[str]:
        best, best_layer = None, -1
        for name in outputs:
            m = _ATTENTION_NAME.match(name)
            if m:
                layer = int(m.group(1)) if m.group(1) is not None else 10**9
                if layer > best_layer:
                    best, best_layer = name, layer
        return best

    def tokenize(self, fragment: CodeFragment) -> TokenSequence:
        enc = self.tokenizer.encode(fragment.source)
        if not enc.ids:
            raise EmptyInput(f"fragment {fragment.id!r} produced no tokens")
        _check_length(len(enc.ids), fragment.id)
        tokens = tuple(
            Token(int(i), piece, (int(s), int(e)), bool(sp))
            for i, piece, (s, e), sp in zip(enc.ids, enc.tokens, enc.offsets, enc.special_tokens_mask)
        )
        return TokenSequence(fragment.id, tokens, fragment.source)

    def _run(self, seq: TokenSequence, names: list[str]) -> list[np.ndarray]:
        n = len(seq)
        feed = {"input_ids": np.array([[t.token_id for t in seq.tokens]], dtype=np.int64)}
        if "attention_mask" in self.input_names:
            feed["attention_mask"] = np.ones((1, n), dtype=np.int64)
        if "token_type_ids" in self.input_names:
            feed["token_type_ids"] = np.zeros((1, n), dtype=np.int64)
        if "position_ids" in self.input_names:
            feed["position_ids"] = np.arange(n, dtype=np.int64)[None, :]
        try:
            return self.session.run(names, feed)
        except Exception as exc:
            raise ModelLoadError(f"inference failed: {exc}") from exc

    def embed(self, seq: TokenSequence) -> EmbeddingMatrix:
        (hidden,) = self._run(seq, ["last_hidden_state"])
        hidden = np.asarray(hidden, dtype=np.float64)
        if hidden.ndim == 3:
            hidden = hidden[0]
        if hidden.ndim != 2 or hidden.shape[0] != len(seq):
            raise DimensionMismatch(f"hidden states of shape {hidden.shape} for {len(seq)} tokens")
        if self.dim is None:
            self.dim = hidden.shape[1]
        elif hidden.shape[1] != self.dim:
            raise DimensionMismatch(f"hidden width changed from {self.dim} to {hidden.shape[1]}")
        return EmbeddingMatrix(seq.fragment_id, hidden, tuple(seq.surfaces), seq.special_mask)

    def attentions(self, seq: TokenSequence) -> AttentionTensor:
        if self.attention_output is None:
            raise AttentionUnavailable("model graph exports no attention probabilities")
        (att,) = self._run(seq, [self.attention_output])
        att = np.asarray(att, dtype=np.float64)
        if att.ndim == 4:
            att = att[0]
        n = len(seq)
        if att.ndim != 3 or att.shape[1:] != (n, n):
            raise DimensionMismatch(f"attention of shape {att.shape} for {n} tokens")
        # float32 exports drift slightly off the simplex
        att = np.clip(att, 0.0, None)
        att = att / att.sum(axis=2, keepdims=True)
        return AttentionTensor(seq.fragment_id, att, tuple(seq.surfaces), seq.special_mask)


@functools.lru_cache(maxsize=8)
def _load(config: BackendConfig):
    if config.kind == "stub":
        return StubBackend(config)
    return ModelBackend(config)


def load_backend(config: BackendConfig):
    """Backend instance for ``config``; model sessions are loaded once and reused."""
    return _load(config.resolved())


def tokenize(fragment: CodeFragment, config: BackendConfig) -> TokenSequence:
    return load_backend(config).tokenize(fragment)


def embed(seq: TokenSequence, config: BackendConfig) -> EmbeddingMatrix:
    if not len(seq):
        raise EmptyInput("cannot embed an empty token sequence")
    return load_backend(config).embed(seq)


def attentions(seq: TokenSequence, config: BackendConfig) -> AttentionTensor:
    if not len(seq):
        raise EmptyInput("cannot compute attention for an empty token sequence")
    return load_backend(config).attentions(seq)
