"""Dot-and-whisker rendering of simulation summaries.

Uses the Agg backend so the CLI can run headless; SVG output is made
byte-stable by pinning the hash salt and stripping the date metadata.
"""
from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .presets import PRESET_INDEX
from .simulate import SimulationSummary

SVG_HASHSALT = "spillover-lab"


def _display_label(model_id: str) -> str:
    if model_id in PRESET_INDEX:
        return f"Figure {model_id[3:].upper()}"
    return model_id


def render_summary_plot(summaries: Sequence[SimulationSummary], path: str) -> None:
    """Point = mean estimate, whiskers = empirical 2.5/97.5 percentile range.

    Vertical guides mark the two recurring true values: dashed at 0.5 for
    the direct spillover, dash-dot at 0.2 for the reduced target under a
    0.3 reverse-direction effect.
    """
    if not summaries:
        raise ValueError("nothing to plot")
    with plt.rc_context({"svg.hashsalt": SVG_HASHSALT}):
        height = max(2.5, 0.55 * len(summaries) + 1.2)
        fig, ax = plt.subplots(figsize=(7.0, height))
        ys = range(len(summaries))
        means = [s.mean_sc for s in summaries]
        low_err = [s.mean_sc - s.pct_low for s in summaries]
        high_err = [s.pct_high - s.mean_sc for s in summaries]
        ax.errorbar(
            means, list(ys), xerr=[low_err, high_err],
            fmt="o", color="black", ecolor="black", elinewidth=1.2,
            capsize=3, markersize=5,
        )
        ax.axvline(0.5, linestyle="--", color="0.45", linewidth=1.0)
        ax.axvline(0.2, linestyle="-.", color="0.45", linewidth=1.0)
        ax.set_yticks(list(ys))
        ax.set_yticklabels([_display_label(s.model_id) for s in summaries])
        ax.invert_yaxis()
        ax.set_xlabel("estimated spillover coefficient")
        mode = summaries[0].exposure_mode
        ax.set_title(f"Gain-score spillover estimates ({mode} exposures)")
        fig.tight_layout()
        if path.lower().endswith(".svg"):
            fig.savefig(path, format="svg", metadata={"Date": None})
        else:
            fig.savefig(path, dpi=150)
        plt.close(fig)
