"""Static SVG rendering of accuracy-vs-epoch curves.

No plotting dependency: the chart is assembled as text, which keeps the
output byte-deterministic and diff-able in review. Every history row
becomes one polyline vertex — no resampling or smoothing — and the
coordinate transform is exposed (``x_for_epoch`` / ``y_for_accuracy``) so
tests can assert the curves encode the CSV values exactly.
"""

from __future__ import annotations

from .trainer import MetricHistory

WIDTH = 640.0
HEIGHT = 400.0
MARGIN_LEFT = 60.0
MARGIN_RIGHT = 20.0
MARGIN_TOP = 30.0
MARGIN_BOTTOM = 40.0
PLOT_WIDTH = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
PLOT_HEIGHT = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

# Accuracy is always drawn against the full [0, 1] range so curves from
# different runs are comparable without rescaling.
CURVE_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b")


def x_for_epoch(epoch: int, n_epochs: int) -> float:
    span = max(1, n_epochs - 1)
    return MARGIN_LEFT + (epoch - 1) * PLOT_WIDTH / span


def y_for_accuracy(accuracy: float) -> float:
    return MARGIN_TOP + (1.0 - accuracy) * PLOT_HEIGHT


def polyline_points(history: MetricHistory, n_epochs: int) -> str:
    return " ".join(
        f"{x_for_epoch(row.epoch, n_epochs)!r},{y_for_accuracy(row.test_accuracy)!r}"
        for row in history.rows
    )


def _axis_ticks(n_epochs: int) -> list[int]:
    step = max(1, n_epochs // 10)
    ticks = {1, n_epochs}
    ticks.update(range(step, n_epochs + 1, step))
    return sorted(ticks)


def render_accuracy_plot(curves: list[tuple[str, MetricHistory]]) -> str:
    """Render labeled accuracy curves; returns the SVG document text."""
    if not curves:
        raise ValueError("nothing to plot: no histories given")
    if len(curves) > len(CURVE_COLORS):
        raise ValueError(f"at most {len(CURVE_COLORS)} curves supported")
    for label, history in curves:
        if not history.rows:
            raise ValueError(f"history {label!r} has no rows")
    n_epochs = max(h.rows[-1].epoch for _, h in curves)

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:g}"'
        f' height="{HEIGHT:g}" viewBox="0 0 {WIDTH:g} {HEIGHT:g}">'
    )
    out.append(f'<rect width="{WIDTH:g}" height="{HEIGHT:g}" fill="white"/>')
    out.append(
        f'<text x="{WIDTH / 2:g}" y="18" text-anchor="middle"'
        ' font-family="sans-serif" font-size="13">Test accuracy by epoch</text>'
    )

    for decile in range(11):
        acc = decile / 10.0
        y = y_for_accuracy(acc)
        out.append(
            f'<line x1="{MARGIN_LEFT:g}" y1="{y!r}" x2="{WIDTH - MARGIN_RIGHT:g}"'
            f' y2="{y!r}" stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{MARGIN_LEFT - 6:g}" y="{y + 4!r}" text-anchor="end"'
            f' font-family="sans-serif" font-size="10">{acc:.1f}</text>'
        )
    for tick in _axis_ticks(n_epochs):
        x = x_for_epoch(tick, n_epochs)
        y0 = HEIGHT - MARGIN_BOTTOM
        out.append(
            f'<line x1="{x!r}" y1="{y0:g}" x2="{x!r}" y2="{y0 + 4:g}"'
            ' stroke="#333333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{x!r}" y="{y0 + 16:g}" text-anchor="middle"'
            f' font-family="sans-serif" font-size="10">{tick}</text>'
        )
    out.append(
        f'<line x1="{MARGIN_LEFT:g}" y1="{MARGIN_TOP:g}" x2="{MARGIN_LEFT:g}"'
        f' y2="{HEIGHT - MARGIN_BOTTOM:g}" stroke="#333333" stroke-width="1"/>'
    )
    out.append(
        f'<line x1="{MARGIN_LEFT:g}" y1="{HEIGHT - MARGIN_BOTTOM:g}"'
        f' x2="{WIDTH - MARGIN_RIGHT:g}" y2="{HEIGHT - MARGIN_BOTTOM:g}"'
        ' stroke="#333333" stroke-width="1"/>'
    )
    out.append(
        f'<text x="{MARGIN_LEFT + PLOT_WIDTH / 2:g}" y="{HEIGHT - 6:g}"'
        ' text-anchor="middle" font-family="sans-serif" font-size="11">epoch</text>'
    )

    for i, (label, history) in enumerate(curves):
        color = CURVE_COLORS[i]
        out.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5"'
            f' points="{polyline_points(history, n_epochs)}"/>'
        )
        ly = MARGIN_TOP + 14 + 16 * i
        lx = MARGIN_LEFT + 10
        out.append(
            f'<line x1="{lx:g}" y1="{ly:g}" x2="{lx + 22:g}" y2="{ly:g}"'
            f' stroke="{color}" stroke-width="1.5"/>'
        )
        out.append(
            f'<text x="{lx + 28:g}" y="{ly + 4:g}" font-family="sans-serif"'
            f' font-size="11">{_escape(label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )
