"""Deterministic standalone SVG figures: heatmaps, scatter plots and saliency renders.

Every figure shares one fixed three-stop linear colour ramp
(``RAMP_LOW`` -> ``RAMP_MID`` -> ``RAMP_HIGH``). Values are mapped linearly
from the data minimum to the data maximum; when all values are equal the
ramp falls back to the fixed range [0, 1] (so 0.5 lands on ``RAMP_MID`` and
1.0 on ``RAMP_HIGH``).
"""
from __future__ import annotations

from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

RAMP_LOW = (49, 54, 149)     # #313695
RAMP_MID = (255, 255, 191)   # #ffffbf
RAMP_HIGH = (165, 0, 38)     # #a50026
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
FONT = "DejaVu Sans Mono, Menlo, Consolas, monospace"


def _hex(rgb) -> str:
    return "#%02x%02x%02x" % tuple(int(round(c)) for c in rgb)


def ramp_color(t: float) -> str:
    t = float(np.clip(t, 0.0, 1.0))
    if t <= 0.5:
        lo, hi, u = RAMP_LOW, RAMP_MID, t / 0.5
    else:
        lo, hi, u = RAMP_MID, RAMP_HIGH, (t - 0.5) / 0.5
    return _hex(tuple(a + (b - a) * u for a, b in zip(lo, hi)))


def ramp_positions(values: np.ndarray) -> tuple[np.ndarray, float, float]:
    values = np.asarray(values, dtype=np.float64)
    vmin, vmax = float(values.min()), float(values.max())
    if vmax > vmin:
        return (values - vmin) / (vmax - vmin), vmin, vmax
    return np.clip(values, 0.0, 1.0), vmin, vmax


def _text(x, y, s, size, anchor="start", extra="") -> str:
    return (
        f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size:.1f}" text-anchor="{anchor}"'
        f'{extra}>{escape(s)}</text>'
    )


def _document(width: float, height: float, body: list[str], title: str) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}" font-family="{FONT}">'
    )
    parts = [head, f"<title>{escape(title)}</title>",
             f'<rect x="0" y="0" width="{width:.0f}" height="{height:.0f}" fill="#ffffff"/>']
    parts.extend(body)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _colorbar(x: float, y: float, height: float, vmin: float, vmax: float) -> list[str]:
    steps = 32
    h = height / steps
    out = []
    for k in range(steps):
        t = 1.0 - (k + 0.5) / steps
        out.append(f'<rect x="{x:.2f}" y="{y + k * h:.2f}" width="12" height="{h + 0.05:.2f}" '
                   f'fill="{ramp_color(t)}"/>')
    out.append(_text(x + 16, y + 8, f"{vmax:.3g}", 10))
    out.append(_text(x + 16, y + height, f"{vmin:.3g}", 10))
    return out


def render_heatmap(
    values,
    row_labels: Sequence[str],
    col_labels: Optional[Sequence[str]] = None,
    title: str = "",
) -> str:
    """Grid of coloured cells; cell values are printed when the grid is at most 12 x 12."""
    M = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if not np.all(np.isfinite(M)):
        raise ValueError("heatmap values must be finite")
    col_labels = row_labels if col_labels is None else col_labels
    n_rows, n_cols = M.shape
    cell = float(np.clip(640.0 / max(n_rows, n_cols), 6.0, 56.0))
    font = min(11.0, cell * 0.8)
    margin_left = 12 + font * 0.62 * max((len(l) for l in row_labels), default=1)
    margin_top = 40 + font * 0.62 * max((len(l) for l in col_labels), default=1)
    width = margin_left + n_cols * cell + 70
    height = margin_top + n_rows * cell + 20

    pos, vmin, vmax = ramp_positions(M)
    body = [_text(margin_left, 20, title, 14)] if title else []
    for i in range(n_rows):
        for j in range(n_cols):
            x, y = margin_left + j * cell, margin_top + i * cell
            body.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cell:.2f}" height="{cell:.2f}" '
                        f'fill="{ramp_color(pos[i, j])}"/>')
    if n_rows <= 12 and n_cols <= 12:
        for i in range(n_rows):
            for j in range(n_cols):
                x = margin_left + (j + 0.5) * cell
                y = margin_top + (i + 0.5) * cell + font * 0.35
                body.append(_text(x, y, f"{M[i, j]:.2f}", font, "middle"))
    for i, label in enumerate(row_labels):
        y = margin_top + (i + 0.5) * cell + font * 0.35
        body.append(_text(margin_left - 4, y, label, font, "end"))
    for j, label in enumerate(col_labels):
        x = margin_left + (j + 0.5) * cell + font * 0.35
        y = margin_top - 4
        body.append(_text(x, y, label, font, "start", f' transform="rotate(-90 {x:.2f} {y:.2f})"'))
    body.extend(_colorbar(margin_left + n_cols * cell + 12, margin_top, min(n_rows * cell, 240.0), vmin, vmax))
    return _document(width, height, body, title or "heatmap")


def _axis_range(v: np.ndarray) -> tuple[float, float]:
    lo, hi = float(v.min()), float(v.max())
    span = hi - lo
    if span <= 0:
        span = 1.0
        lo, hi = lo - 0.5, hi + 0.5
        return lo, hi
    return lo - 0.05 * span, hi + 0.05 * span


def render_scatter(
    points,
    groups: Sequence[str],
    labels: Optional[Sequence[str]] = None,
    title: str = "",
) -> str:
    """One colour per group (fragment id) with a legend; axes padded by 5% of the data span."""
    P = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if not np.all(np.isfinite(P)):
        raise ValueError("scatter coordinates must be finite")
    order = list(dict.fromkeys(groups))
    colors = {g: PALETTE[k % len(PALETTE)] for k, g in enumerate(order)}
    width, height = 560.0, 480.0
    left, right, top, bottom = 60.0, 170.0, 40.0, 40.0
    pw, ph = width - left - right, height - top - bottom
    if P.shape[0]:
        (x0, x1), (y0, y1) = _axis_range(P[:, 0]), _axis_range(P[:, 1])
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0

    body = [_text(left, 24, title, 14)] if title else []
    body.append(f'<rect x="{left:.2f}" y="{top:.2f}" width="{pw:.2f}" height="{ph:.2f}" '
                f'fill="none" stroke="#444444" stroke-width="1"/>')
    body.append(_text(left, top + ph + 16, f"{x0:.3g}", 10))
    body.append(_text(left + pw, top + ph + 16, f"{x1:.3g}", 10, "end"))
    body.append(_text(left - 4, top + ph, f"{y0:.3g}", 10, "end"))
    body.append(_text(left - 4, top + 10, f"{y1:.3g}", 10, "end"))
    for k, (x, y) in enumerate(P):
        cx = left + (x - x0) / (x1 - x0) * pw
        cy = top + ph - (y - y0) / (y1 - y0) * ph
        tip = f"<title>{escape(labels[k])}</title>" if labels is not None else ""
        body.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="3.5" fill="{colors[groups[k]]}" '
                    f'fill-opacity="0.75">{tip}</circle>')
    for k, g in enumerate(order):
        y = top + 14 + k * 18
        body.append(f'<circle cx="{left + pw + 16:.2f}" cy="{y - 4:.2f}" r="5" fill="{colors[g]}"/>')
        body.append(_text(left + pw + 26, y, g, 11))
    return _document(width, height, body, title or "scatter")


def _token_cells(source: str, spans: Sequence[Sequence[int]]):
    line_starts = [0] + [i + 1 for i, c in enumerate(source) if c == "\n"]
    out = []
    for start, end in spans:
        line = int(np.searchsorted(line_starts, start, side="right")) - 1
        out.append((line, start - line_starts[line], end - start))
    return out, len(line_starts)


def render_saliency(panels: Sequence[dict], title: str = "") -> str:
    """Source listings with every code token shaded by its saliency score.

    ``panels`` holds one dict per fragment with keys ``fragment_id``,
    ``source``, ``spans`` (character spans of the scored tokens) and
    ``scores``. A single colour scale is shared by all panels.
    """
    all_scores = np.concatenate([np.asarray(p["scores"], dtype=np.float64) for p in panels])
    if not np.all(np.isfinite(all_scores)):
        raise ValueError("saliency scores must be finite")
    vmin, vmax = 0.0, float(all_scores.max()) if all_scores.size else 0.0
    char_w, line_h, font = 7.2, 16.0, 12.0
    top = 56.0

    layouts = []
    x = 20.0
    for p in panels:
        cells, n_lines = _token_cells(p["source"], p["spans"])
        cols = max((len(l) for l in p["source"].split("\n")), default=1)
        layouts.append((x, cells))
        x += max(cols, len(p["fragment_id"])) * char_w + 40
    width = x + 60
    height = top + max(_token_cells(p["source"], [])[1] for p in panels) * line_h + 30

    body = [_text(20, 22, title, 14)] if title else []
    for (x0, cells), p in zip(layouts, panels):
        body.append(_text(x0, top - 14, p["fragment_id"], 12, extra=' font-weight="bold"'))
        scores = np.asarray(p["scores"], dtype=np.float64)
        for (line, col, length), score, (s, e) in zip(cells, scores, p["spans"]):
            t = 0.5 if vmax <= vmin else (score - vmin) / (vmax - vmin)
            rx, ry = x0 + col * char_w, top + line * line_h
            body.append(f'<rect x="{rx:.2f}" y="{ry:.2f}" width="{length * char_w:.2f}" '
                        f'height="{line_h - 2:.2f}" fill="{ramp_color(t)}">'
                        f'<title>{escape(p["source"][s:e])}: {score:.4g}</title></rect>')
            body.append(_text(rx, ry + line_h - 5, p["source"][s:e], font))
    body.extend(_colorbar(width - 50, top, 200.0, vmin, vmax))
    return _document(width, height, body, title or "saliency")
