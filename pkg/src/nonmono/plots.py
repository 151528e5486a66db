"""Dependency-free SVG bar charts for model-comparison metrics."""
from __future__ import annotations

from xml.etree import ElementTree as ET
from xml.sax.saxutils import escape

WIDTH = 960
HEIGHT = 360
MARGIN_LEFT = 60
MARGIN_BOTTOM = 70
MARGIN_TOP = 40
BAR_GAP = 2


def svg_bar_chart(
    title: str,
    labels: list[str],
    values: list[float],
    baseline: float | None = None,
    baseline_label: str = "Features' average",
) -> str:
    """Render one metric as a bar chart (callers pass values sorted ascending);
    the optional baseline is drawn as a dotted reference line."""
    if len(labels) != len(values):
        raise ValueError("labels and values must have equal length")
    plot_w = WIDTH - MARGIN_LEFT - 20
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    top = max([v for v in values] + ([baseline] if baseline is not None else []) + [1e-9])
    n = max(len(values), 1)
    bar_w = max(plot_w / n - BAR_GAP, 1.0)

    def x(i: int) -> float:
        return MARGIN_LEFT + i * plot_w / n

    def y(v: float) -> float:
        return MARGIN_TOP + plot_h * (1 - v / top)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14">{escape(title)}</text>',
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" '
        f'y2="{MARGIN_TOP + plot_h}" stroke="black"/>',
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP + plot_h}" x2="{MARGIN_LEFT + plot_w}" '
        f'y2="{MARGIN_TOP + plot_h}" stroke="black"/>',
        f'<text x="15" y="{MARGIN_TOP}" font-family="sans-serif" font-size="10">{top:.4g}</text>',
        '<text x="15" y="%s" font-family="sans-serif" font-size="10">0</text>' % (MARGIN_TOP + plot_h),
    ]
    for i, (label, value) in enumerate(zip(labels, values)):
        bx = x(i)
        by = y(value)
        parts.append(
            f'<rect x="{bx:.2f}" y="{by:.2f}" width="{bar_w:.2f}" '
            f'height="{MARGIN_TOP + plot_h - by:.2f}" fill="#4878a8"/>'
        )
        lx = bx + bar_w / 2
        ly = MARGIN_TOP + plot_h + 8
        parts.append(
            f'<text x="{lx:.2f}" y="{ly:.2f}" font-family="sans-serif" font-size="8" '
            f'text-anchor="end" transform="rotate(-90 {lx:.2f} {ly:.2f})">{escape(label)}</text>'
        )
    if baseline is not None:
        by = y(baseline)
        parts.append(
            f'<line x1="{MARGIN_LEFT}" y1="{by:.2f}" x2="{MARGIN_LEFT + plot_w}" y2="{by:.2f}" '
            f'stroke="black" stroke-dasharray="3,3"/>'
        )
        parts.append(
            f'<text x="{MARGIN_LEFT + 4}" y="{by - 4:.2f}" font-family="sans-serif" '
            f'font-size="10">{escape(baseline_label)} ({baseline:.4g})</text>'
        )
    parts.append("</svg>")
    svg = "\n".join(parts)
    ET.fromstring(svg)  # guarantee well-formed output
    return svg
