"""Rewrite the committed golden files from the current implementation.

Run only after checking the new outputs by eye: ``python tests/golden/regenerate.py``.
"""
import json
from pathlib import Path

from simlens import BackendConfig, embed, tokenize
from simlens.dimred import pca_project, stack_embeddings
from simlens.report import fixture, fixture_corpus, render_heatmap, render_scatter
from simlens.simcore import fragment_matrix

HERE = Path(__file__).parent
CONFIG = BackendConfig(kind="stub", seed=7)


def fragment_matrix_golden() -> dict:
    corpus = fixture_corpus()
    return {
        "backend": CONFIG.echo(),
        "ids": [f.id for f in corpus],
        "greedy_match": fragment_matrix(corpus, CONFIG, "greedy_match").tolist(),
        "mean_pool_cosine": fragment_matrix(corpus, CONFIG, "mean_pool_cosine").tolist(),
    }


def heatmap_golden(golden: dict) -> str:
    return render_heatmap(golden["greedy_match"], golden["ids"], golden["ids"], "fragment similarity (greedy_match)")


def pair_scatter_golden() -> str:
    E = [embed(tokenize(fixture(n), CONFIG), CONFIG) for n in ("bubble", "insertion")]
    X, labels = stack_embeddings(*E)
    proj = pca_project(X, labels=labels)
    return render_scatter(proj.points, [l[0] for l in labels], [l[1] for l in labels],
                          "PCA: bubble_sort vs insertion_sort")


def identity_scatter_golden() -> str:
    return render_scatter([[0.0, 0.0], [1.0, 1.0]], ["a", "b"], ["p", "q"], "identity")


def main():
    golden = fragment_matrix_golden()
    (HERE / "fragment_matrix_stub_seed7.json").write_text(json.dumps(golden, indent=1) + "\n")
    (HERE / "fragments_heatmap_stub_seed7.svg").write_text(heatmap_golden(golden))
    (HERE / "bubble_sort-insertion_sort_pca.svg").write_text(pair_scatter_golden())
    (HERE / "scatter_identity.svg").write_text(identity_scatter_golden())


if __name__ == "__main__":
    main()
