"""Figure rendering for run artifacts (PNG files next to the CSV/JSON)."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .vqe import ConvergenceRecord


def plot_convergence(
    records: Sequence[ConvergenceRecord],
    path: Union[str, Path],
    title: str = "",
    reference: Optional[float] = None,
) -> Path:
    """Best-so-far expectation per trial versus evaluation count."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for rec in records:
        ax.plot(
            range(len(rec.evaluations)),
            rec.best_so_far(),
            linewidth=1.0,
            alpha=0.8,
            label=f"trial {rec.trial_id}",
        )
    if reference is not None:
        ax.axhline(
            reference, color="black", linestyle="--", linewidth=1.0,
            label="brute-force minimum",
        )
    ax.set_xlabel("evaluation")
    ax.set_ylabel("best expectation so far")
    if title:
        ax.set_title(title)
    if len(records) <= 10:
        ax.legend(fontsize=7, ncol=2)
    ax.margins(x=0.02)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
