"""Matplotlib figure rendering for the CLI report paths.

Figures are written next to the delimited outputs: a per-type metric chart
mirroring the summarisation-score heatmaps, and a bits-per-token bar chart
for entropy reports.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .lm import EntropyReport
from .pipeline import TypeAggregate

_TYPE_COMPONENTS = ("gestalt", "rouge1_recall", "rouge1_precision", "embed_recall", "embed_precision")
_TYPE_LABELS = ("Gestalt", "ROUGE-1 Rec", "ROUGE-1 Prec", "Embed Rec", "Embed Prec")


def render_type_figure(aggregates: Sequence[TypeAggregate], path: str | Path, title: str = "") -> Path:
    """Horizontal heat-style chart of per-type median scores."""
    path = Path(path)
    present = [
        (comp, label)
        for comp, label in zip(_TYPE_COMPONENTS, _TYPE_LABELS)
        if any(comp in agg.medians for agg in aggregates)
    ]
    types = [agg.note_type for agg in aggregates]
    data = np.array(
        [[agg.medians.get(comp, np.nan) for comp, _ in present] for agg in aggregates],
        dtype=np.float64,
    )
    height = max(2.0, 0.32 * len(types) + 1.2)
    fig, ax = plt.subplots(figsize=(8.0, height))
    mesh = ax.imshow(data, aspect="auto", cmap="viridis", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(len(present)), [label for _, label in present], rotation=30, ha="right")
    ax.set_yticks(range(len(types)), types)
    ax.set_title(title or "Median pairwise scores by note type")
    fig.colorbar(mesh, ax=ax, label="median score")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_bits_figure(entries: Sequence[tuple[str, EntropyReport]], path: str | Path, title: str = "") -> Path:
    """Bar chart of cross-entropy bits/token per evaluated split."""
    path = Path(path)
    labels = [label for label, _ in entries]
    bits = [report.cross_entropy_bits for _, report in entries]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(labels) + 2.0), 3.6))
    bars = ax.bar(labels, bits, color="#3b6ea5")
    ax.bar_label(bars, fmt="%.3f")
    ax.set_ylabel("cross-entropy (bits/token)")
    ax.set_title(title or "Cross-entropy by split")
    upper = [r.upper_bound_bits for _, r in entries if r.upper_bound_bits is not None]
    if upper:
        ax.axhline(max(upper), linestyle="--", color="grey", linewidth=1, label="uniform upper bound")
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
