"""
Observed-vs-predicted scatter plots.
"""
import io
from typing import Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# Fixed salt so element ids, and therefore the file bytes, repeat between runs
SVG_STYLE = {"svg.hashsalt": "gsv-mode-share", "svg.fonttype": "none"}


def render_scatter_svg(
    points: Sequence[Tuple[float, float]],
    title: str = "",
    x_label: str = "Observed (%)",
    y_label: str = "Predicted (%)",
) -> str:
    """Render (observed, predicted) pairs with a y = x reference line.

    Both axes share one range starting at 0 so the reference line is the diagonal.
    The reference line and the points carry the SVG ids ``identity`` and ``points``.

    Args:
        points: (observed, predicted) pairs in percent
        title: Optional plot title
        x_label: Horizontal axis label
        y_label: Vertical axis label

    Returns:
        The SVG document as text
    """
    observed = [obs for obs, _ in points]
    predicted = [pred for _, pred in points]
    limit = max(observed + predicted, default=0.0) * 1.05 or 1.0

    with plt.rc_context(SVG_STYLE):
        fig, ax = plt.subplots(figsize=(6, 6))
        try:
            ax.plot([0.0, limit], [0.0, limit], linestyle="--", color="grey", linewidth=1, gid="identity")
            ax.scatter(observed, predicted, s=16, color="steelblue", gid="points")
            ax.set_xlim(0.0, limit)
            ax.set_ylim(0.0, limit)
            ax.set_aspect("equal")
            ax.set_xlabel(x_label)
            ax.set_ylabel(y_label)
            if title:
                ax.set_title(title)
            ax.grid(True, alpha=0.3)
            fig.tight_layout()
            buffer = io.StringIO()
            fig.savefig(buffer, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return buffer.getvalue()
