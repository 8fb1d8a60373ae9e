"""Pairwise comparison pipeline and the versioned JSON report it produces.

Figures are always rendered from the report dictionary, never from live
objects, so re-loading a report file reproduces every figure byte for byte.
"""
from __future__ import annotations

import itertools
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..dimred import METHODS, TsneConfig, UmapConfig, project, stack_embeddings
from ..embedder import (
    AttentionTensor,
    BackendConfig,
    CodeFragment,
    EmbeddingMatrix,
    TokenSequence,
    attentions,
    embed,
    tokenize,
)
from ..saliency import saliency_map
from ..simcore import (
    DEFAULT_POOLING,
    attention_product,
    cosine_matrix,
    fragment_similarity,
    normalize_pooling,
    similarity_table,
)
from . import svg

SCHEMA = "simlens.report/1"
REPORT_FILE = "report.json"
HEATMAP_FILE = "fragments_heatmap.svg"


@dataclass(frozen=True, eq=False)
class Analysis:
    fragment: CodeFragment
    tokens: TokenSequence
    embedding: EmbeddingMatrix
    attention: AttentionTensor


def analyze(fragment: CodeFragment, config: BackendConfig) -> Analysis:
    seq = tokenize(fragment, config)
    return Analysis(fragment, seq, embed(seq, config), attentions(seq, config))


def pair_name(a: str, b: str) -> str:
    return f"{a}-{b}"


def _matrix_dict(sim) -> dict:
    return {
        "kind": sim.kind,
        "row_labels": list(sim.row_labels),
        "col_labels": list(sim.col_labels),
        "values": sim.values.tolist(),
    }


def _fragment_dict(an: Analysis) -> dict:
    return {
        "id": an.fragment.id,
        "language": an.fragment.language,
        "source": an.fragment.source,
        "token_count": len(an.tokens.content_tokens()),
        "tokens": [
            {"surface": t.surface, "span": list(t.char_span), "special": t.is_special}
            for t in an.tokens.tokens
        ],
    }


def compare_pair(
    a: Analysis,
    b: Analysis,
    *,
    seed: int,
    pooling: str = DEFAULT_POOLING,
    methods: Sequence[str] = METHODS,
    tsne: Optional[TsneConfig] = None,
    umap: Optional[UmapConfig] = None,
) -> dict:
    pooling = normalize_pooling(pooling)
    X, labels = stack_embeddings(a.embedding, b.embedding)
    projections = {}
    for method in methods:
        proj = project(X, method, seed=seed, labels=labels, tsne=tsne, umap=umap)
        projections[method] = {
            "method": proj.method,
            "seed": proj.seed,
            "labels": [list(l) for l in proj.source_labels],
            "points": proj.points.tolist(),
            "trace": proj.trace.tolist(),
            "degenerate": proj.degenerate,
        }
    s1, s2 = saliency_map(a.embedding, b.embedding, pooling)
    return {
        "name": pair_name(a.fragment.id, b.fragment.id),
        "a": a.fragment.id,
        "b": b.fragment.id,
        "fragment_similarity": fragment_similarity(a.embedding, b.embedding, pooling).value,
        "cosine": _matrix_dict(cosine_matrix(a.embedding, b.embedding)),
        "attention_product": _matrix_dict(attention_product(a.attention, b.attention)),
        "projections": projections,
        "saliency": [
            {"fragment_id": s.fragment_id, "paired_fragment_id": s.paired_fragment_id,
             "pooling": s.pooling, "scores": s.scores.tolist()}
            for s in (s1, s2)
        ],
    }


def build_report(
    fragments: Sequence[CodeFragment],
    config: BackendConfig,
    *,
    seed: int,
    pooling: str = DEFAULT_POOLING,
    mode: str = "all",
    methods: Sequence[str] = METHODS,
    tsne: Optional[TsneConfig] = None,
    umap: Optional[UmapConfig] = None,
) -> dict:
    """Analyze every fragment and every unordered pair.

    ``mode`` is ``"compare"`` (exactly two fragments, token-level figures) or
    ``"all"`` (fragment heatmap plus per-pair scatter and saliency figures).
    """
    from .. import __version__

    if mode not in ("compare", "all"):
        raise ValueError(f"unknown report mode {mode!r}")
    if len(fragments) < 2 or (mode == "compare" and len(fragments) != 2):
        raise ValueError("compare takes exactly two fragments; report-all at least two")
    ids = [f.id for f in fragments]
    if len(set(ids)) != len(ids):
        raise ValueError(f"fragment ids must be unique, got {ids}")
    pooling = normalize_pooling(pooling)
    analyses = [analyze(f, config) for f in fragments]
    table = similarity_table([an.embedding for an in analyses], pooling)
    pairs = [
        compare_pair(a, b, seed=seed, pooling=pooling, methods=methods, tsne=tsne, umap=umap)
        for a, b in itertools.combinations(analyses, 2)
    ]
    return {
        "schema": SCHEMA,
        "tool_version": __version__,
        "mode": mode,
        "backend": config.echo(),
        "seeds": {"backend": config.seed, "projection": seed},
        "pooling": pooling,
        "methods": list(methods),
        "fragments": [_fragment_dict(an) for an in analyses],
        "fragment_similarity": {"ids": ids, "values": table.tolist()},
        "pairs": pairs,
    }


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=1, ensure_ascii=False) + "\n"


def load_report(path) -> dict:
    report = json.loads(Path(path).read_text(encoding="utf-8"))
    if report.get("schema") != SCHEMA:
        raise ValueError(f"unsupported report schema {report.get('schema')!r}")
    return report


def _content_spans(fragment: dict) -> list[list[int]]:
    return [t["span"] for t in fragment["tokens"] if not t["special"]]


def saliency_figure(report: dict, pair: dict) -> str:
    frags = {f["id"]: f for f in report["fragments"]}
    panels = []
    for entry in pair["saliency"]:
        frag = frags[entry["fragment_id"]]
        panels.append({
            "fragment_id": frag["id"],
            "source": frag["source"],
            "spans": _content_spans(frag),
            "scores": entry["scores"],
        })
    return svg.render_saliency(panels, f"saliency ({pair['saliency'][0]['pooling']}): {pair['a']} vs {pair['b']}")


def scatter_figure(pair: dict, method: str) -> str:
    proj = pair["projections"][method]
    groups = [l[0] for l in proj["labels"]]
    labels = [l[1] for l in proj["labels"]]
    return svg.render_scatter(proj["points"], groups, labels, f"{method.upper()}: {pair['a']} vs {pair['b']}")


def render_figures(report: dict) -> dict[str, str]:
    """File name -> SVG text for every figure the report's mode calls for."""
    figures: dict[str, str] = {}
    if report["mode"] == "all":
        fs = report["fragment_similarity"]
        figures[HEATMAP_FILE] = svg.render_heatmap(
            fs["values"], fs["ids"], fs["ids"], f"fragment similarity ({report['pooling']})"
        )
    for pair in report["pairs"]:
        name = pair["name"]
        if report["mode"] == "compare":
            for key, short in (("cosine", "cosine"), ("attention_product", "attention")):
                m = pair[key]
                figures[f"{name}_{short}.svg"] = svg.render_heatmap(
                    m["values"], m["row_labels"], m["col_labels"],
                    f"{key.replace('_', ' ')}: {pair['a']} vs {pair['b']}",
                )
        for method in report["methods"]:
            figures[f"{name}_{method}.svg"] = scatter_figure(pair, method)
        figures[f"{name}_saliency.svg"] = saliency_figure(report, pair)
    return figures


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_outputs(report: dict, out_dir, figures: bool = True) -> list[Path]:
    """Write ``report.json`` and (optionally) all figures; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / REPORT_FILE]
    _atomic_write(written[0], dumps_report(report))
    if figures:
        for name, text in render_figures(report).items():
            path = out / name
            _atomic_write(path, text)
            written.append(path)
    return written


def expected_figure_count(n_fragments: int, mode: str = "all", methods: Iterable[str] = METHODS) -> int:
    n_pairs = n_fragments * (n_fragments - 1) // 2
    per_pair = len(tuple(methods)) + 1
    if mode == "compare":
        return n_pairs * (per_pair + 2)
    return 1 + n_pairs * per_pair
