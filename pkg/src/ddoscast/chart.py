"""Standalone SVG line charts, no plotting dependency.

Output bytes are a pure function of the input (no timestamps, fixed
geometry), one ``<polyline>`` per data series; axes, grid and legend use
``<line>``/``<text>`` so polyline count equals series count.
"""

from __future__ import annotations

from .errors import EmptySeriesError, LengthMismatchError

WIDTH = 960
HEIGHT = 480
MARGIN_LEFT = 70
MARGIN_RIGHT = 20
MARGIN_TOP = 40
MARGIN_BOTTOM = 50

PLOT_X0 = MARGIN_LEFT
PLOT_X1 = WIDTH - MARGIN_RIGHT
PLOT_Y0 = MARGIN_TOP
PLOT_Y1 = HEIGHT - MARGIN_BOTTOM

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def render_line_chart(series_list, labels, title: str, x_labels=None) -> bytes:
    """Render aligned series as one SVG line chart.

    All series must share one length of at least two points; ``labels``
    names them in the legend. ``x_labels``, when given, annotates the first
    and last x positions (e.g. period keys).
    """
    if not series_list:
        raise EmptySeriesError("no series to plot")
    series = [[float(v) for v in s] for s in series_list]
    n = len(series[0])
    if n < 2:
        raise EmptySeriesError("series need at least 2 points")
    if any(len(s) != n for s in series):
        raise LengthMismatchError("series lengths differ")
    if len(labels) != len(series):
        raise LengthMismatchError("one label per series required")
    if x_labels is not None and len(x_labels) != n:
        raise LengthMismatchError("one x label per point required")

    vmin = min(min(s) for s in series)
    vmax = max(max(s) for s in series)
    if vmax == vmin:
        vmin -= 1.0
        vmax += 1.0
    span_x = PLOT_X1 - PLOT_X0
    span_y = PLOT_Y1 - PLOT_Y0

    def x_at(i: int) -> float:
        return PLOT_X0 + span_x * i / (n - 1)

    def y_at(v: float) -> float:
        return PLOT_Y1 - span_y * (v - vmin) / (vmax - vmin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{_escape(title)}</text>',
    ]

    # y grid + tick labels
    ticks = 4
    for k in range(ticks + 1):
        v = vmin + (vmax - vmin) * k / ticks
        y = y_at(v)
        parts.append(
            f'<line x1="{PLOT_X0}" y1="{_fmt(y)}" x2="{PLOT_X1}" y2="{_fmt(y)}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{PLOT_X0 - 8}" y="{_fmt(y + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{v:.4g}</text>'
        )

    # axes
    parts.append(
        f'<line x1="{PLOT_X0}" y1="{PLOT_Y0}" x2="{PLOT_X0}" y2="{PLOT_Y1}" '
        f'stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{PLOT_X0}" y1="{PLOT_Y1}" x2="{PLOT_X1}" y2="{PLOT_Y1}" '
        f'stroke="black" stroke-width="1"/>'
    )

    # x tick labels: first and last point (period keys when provided)
    first_label = _escape(str(x_labels[0])) if x_labels is not None else "0"
    last_label = _escape(str(x_labels[-1])) if x_labels is not None else str(n - 1)
    parts.append(
        f'<text x="{PLOT_X0}" y="{PLOT_Y1 + 18}" text-anchor="start" '
        f'font-family="sans-serif" font-size="11">{first_label}</text>'
    )
    parts.append(
        f'<text x="{PLOT_X1}" y="{PLOT_Y1 + 18}" text-anchor="end" '
        f'font-family="sans-serif" font-size="11">{last_label}</text>'
    )

    # data
    for idx, values in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        points = " ".join(f"{_fmt(x_at(i))},{_fmt(y_at(v))}" for i, v in enumerate(values))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>'
        )

    # legend, top-right inside the plot
    for idx, label in enumerate(labels):
        color = PALETTE[idx % len(PALETTE)]
        ly = PLOT_Y0 + 14 + 16 * idx
        parts.append(
            f'<line x1="{PLOT_X1 - 150}" y1="{ly}" x2="{PLOT_X1 - 126}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{PLOT_X1 - 120}" y="{ly + 4}" font-family="sans-serif" '
            f'font-size="12">{_escape(str(label))}</text>'
        )

    parts.append("</svg>")
    return "\n".join(parts).encode("utf-8")
