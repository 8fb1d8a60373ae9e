"""Command-line entry point: ``simlens {tokenize,compare,report-all,project,saliency}``.

Exit codes: 0 success, 2 usage error, 3 backend load failure, 4 compute error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..dimred import METHODS, project, stack_embeddings
from ..embedder import BackendConfig, load_backend
from ..errors import BackendLoadError, EmptyInput, SimlensError
from ..saliency import saliency_map
from . import driver, svg
from .fixtures import fixture_corpus, resolve_fragment

EXIT_USAGE = 2
EXIT_BACKEND = 3
EXIT_COMPUTE = 4


class UsageError(Exception):
    pass


def _backend_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=("stub", "model"), default="stub")
    p.add_argument("--model", metavar="PATH", help="ONNX graph (default: $SIMLENS_MODEL_DIR/model.onnx)")
    p.add_argument("--tokenizer", metavar="PATH",
                   help="tokenizer.json (default: $SIMLENS_MODEL_DIR/tokenizer.json)")
    p.add_argument("--seed", type=int, default=7)


def _output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", metavar="DIR", default="simlens_out")
    p.add_argument("--no-figures", action="store_true", help="write the JSON report only")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simlens",
        description="Token-level similarity, projections and saliency for code fragments. "
                    "Fragments are file paths or fixtures:<bubble|selection|insertion|merge|quick>.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tokenize", help="print the token sequence of a fragment as JSON")
    p.add_argument("fragment")
    _backend_args(p)

    p = sub.add_parser("compare", help="full comparison of two fragments")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--pooling", choices=("mean", "greedy"), default="greedy")
    _backend_args(p)
    _output_args(p)

    p = sub.add_parser("report-all", help="fragment heatmap plus all pairwise figures")
    p.add_argument("fragments", nargs="*", help="defaults to the five sorting fixtures")
    p.add_argument("--pooling", choices=("mean", "greedy"), default="greedy")
    _backend_args(p)
    _output_args(p)

    p = sub.add_parser("project", help="joint 2-D projection of two fragments' tokens")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--method", choices=METHODS, default="pca")
    _backend_args(p)
    _output_args(p)

    p = sub.add_parser("saliency", help="per-token saliency of a fragment pair")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--pooling", choices=("mean", "greedy"), default="greedy")
    _backend_args(p)
    _output_args(p)
    return parser


def _config(args) -> BackendConfig:
    config = BackendConfig(kind=args.backend, model_path=args.model, tokenizer_path=args.tokenizer,
                           seed=args.seed)
    load_backend(config)  # surface load failures before any compute
    return config


def _fragments(specs):
    try:
        return [resolve_fragment(s) for s in specs]
    except (KeyError, FileNotFoundError, EmptyInput, UnicodeDecodeError) as exc:
        raise UsageError(str(exc).strip("'\"")) from exc


def _write_json(path: Path, payload: dict) -> None:
    driver._atomic_write(path, json.dumps(payload, indent=1, ensure_ascii=False) + "\n")


def cmd_tokenize(args) -> int:
    (fragment,) = _fragments([args.fragment])
    config = _config(args)
    seq = load_backend(config).tokenize(fragment)
    payload = {
        "fragment_id": seq.fragment_id,
        "backend": config.echo(),
        "tokens": [{"token_id": t.token_id, "surface": t.surface, "span": list(t.char_span),
                    "special": t.is_special} for t in seq.tokens],
    }
    print(json.dumps(payload, indent=1, ensure_ascii=False))
    return 0


def cmd_compare(args) -> int:
    fragments = _fragments([args.a, args.b])
    config = _config(args)
    report = driver.build_report(fragments, config, seed=args.seed, pooling=args.pooling, mode="compare")
    written = driver.write_outputs(report, args.out, figures=not args.no_figures)
    print(f"wrote {len(written)} files to {args.out}", file=sys.stderr)
    return 0


def cmd_report_all(args) -> int:
    fragments = _fragments(args.fragments) if args.fragments else fixture_corpus()
    if len(fragments) < 2:
        raise UsageError("report-all needs at least two fragments")
    config = _config(args)
    report = driver.build_report(fragments, config, seed=args.seed, pooling=args.pooling, mode="all")
    written = driver.write_outputs(report, args.out, figures=not args.no_figures)
    print(f"wrote {len(written)} files to {args.out}", file=sys.stderr)
    return 0


def _embed_pair(args):
    fragments = _fragments([args.a, args.b])
    config = _config(args)
    return [driver.analyze(f, config) for f in fragments]


def cmd_project(args) -> int:
    a, b = _embed_pair(args)
    X, labels = stack_embeddings(a.embedding, b.embedding)
    proj = project(X, args.method, seed=args.seed, labels=labels)
    name = f"{driver.pair_name(a.fragment.id, b.fragment.id)}_{args.method}"
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / f"{name}.json", {
        "schema": driver.SCHEMA,
        "method": proj.method,
        "seed": proj.seed,
        "labels": [list(l) for l in proj.source_labels],
        "points": proj.points.tolist(),
        "trace": proj.trace.tolist(),
        "degenerate": proj.degenerate,
    })
    if not args.no_figures:
        driver._atomic_write(out / f"{name}.svg", svg.render_scatter(
            proj.points, [l[0] for l in proj.source_labels], [l[1] for l in proj.source_labels],
            f"{args.method.upper()}: {a.fragment.id} vs {b.fragment.id}"))
    return 0


def cmd_saliency(args) -> int:
    a, b = _embed_pair(args)
    s1, s2 = saliency_map(a.embedding, b.embedding, args.pooling)
    name = f"{driver.pair_name(a.fragment.id, b.fragment.id)}_saliency"
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    panels = []
    for an, s in ((a, s1), (b, s2)):
        content = an.tokens.content_tokens()
        entries.append({"fragment_id": s.fragment_id, "paired_fragment_id": s.paired_fragment_id,
                        "pooling": s.pooling, "tokens": [t.surface for t in content],
                        "scores": s.scores.tolist()})
        panels.append({"fragment_id": an.fragment.id, "source": an.fragment.source,
                       "spans": [list(t.char_span) for t in content], "scores": s.scores.tolist()})
    _write_json(out / f"{name}.json", {"schema": driver.SCHEMA, "saliency": entries})
    if not args.no_figures:
        driver._atomic_write(out / f"{name}.svg", svg.render_saliency(
            panels, f"saliency ({s1.pooling}): {a.fragment.id} vs {b.fragment.id}"))
    return 0


COMMANDS = {
    "tokenize": cmd_tokenize,
    "compare": cmd_compare,
    "report-all": cmd_report_all,
    "project": cmd_project,
    "saliency": cmd_saliency,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"simlens: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BackendLoadError as exc:
        print(f"simlens: backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (SimlensError, ValueError, FloatingPointError) as exc:
        print(f"simlens: compute error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
