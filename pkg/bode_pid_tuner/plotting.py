"""Minimal static SVG charts of step responses (needs the ``vis`` extra)."""

import io
from typing import Mapping

from .logging_conf import configure_logging
from .models import StepResult

logger = configure_logging("bode-pid-tuner.plotting")


def step_chart_svg(responses: Mapping[str, StepResult], title: str = "Closed-loop step response") -> str:
    """Line chart of y(t) for one or more labelled step responses, as SVG text.

    Raises:
        ValueError: If matplotlib is not installed
    """
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise ValueError("SVG output needs matplotlib; install bode-pid-tuner[vis]") from exc

    with matplotlib.rc_context({"svg.hashsalt": "bode-pid-tuner", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(8, 4.5))
        for label, result in responses.items():
            ax.plot(result.t, result.y, linewidth=1.5, label=label)
        ax.axhline(1.0, color="gray", linestyle="--", linewidth=0.8)
        ax.set_xlabel("t [s]")
        ax.set_ylabel("y")
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        if len(responses) > 1:
            ax.legend()

        buffer = io.StringIO()
        fig.savefig(buffer, format="svg", bbox_inches="tight", metadata={"Date": None})
        plt.close(fig)

    logger.debug("Rendered step chart with %d trace(s)", len(responses))
    return buffer.getvalue()
