"""Sorting-algorithm fixtures, the comparison report pipeline, SVG figures and the CLI."""
from .driver import (
    SCHEMA,
    analyze,
    build_report,
    compare_pair,
    dumps_report,
    expected_figure_count,
    load_report,
    render_figures,
    write_outputs,
)
from .fixtures import FIXTURES, fixture, fixture_corpus, resolve_fragment
from .svg import render_heatmap, render_saliency, render_scatter
