"""Per-level hole census: tab-separated table and a bar chart."""

from __future__ import annotations

import csv
from collections.abc import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from margnorm.normality import LevelCensus  # noqa: E402

COLUMNS = ("level", "candidates", "lattice_points", "semigroup_points", "holes", "lp_calls")


def write_census(census: Sequence[LevelCensus], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in census:
            writer.writerow([getattr(row, c) for c in COLUMNS])


def plot_census(census: Sequence[LevelCensus], path, title: str = "") -> None:
    """Lattice points and holes per sample size, log scale."""
    levels = [c.level for c in census]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    width = 0.4
    ax.bar([x - width / 2 for x in levels], [c.lattice_points for c in census], width,
           label="cone lattice points", color="0.6")
    ax.bar([x + width / 2 for x in levels], [c.holes for c in census], width,
           label="holes", color="tab:red")
    ax.set_yscale("symlog", linthresh=1)
    ax.set_xlabel("sample size N")
    ax.set_ylabel("count")
    ax.set_xticks(levels)
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)
