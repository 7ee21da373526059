"""Figure rendering for experiment results.

Renders one grouped bar chart per run: miss counts per cache level for
every experiment, plus a transactions chart when any result carries GPU
transactions distinct from its trace length. Files are written next to
the CSV output; the CSV remains the canonical artifact.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import ExperimentConfig
from .hierarchy import SimResult


def _experiment_id(result: SimResult) -> str:
    cfg: ExperimentConfig = result.workload_echo["config"]
    return cfg.id


def plot_results(results: Sequence[SimResult], out_dir) -> list[Path]:
    """Render summary figures for a result set; returns written paths."""
    out_dir = Path(out_dir)
    if not results:
        return []
    written = []

    ids = [_experiment_id(r) for r in results]
    level_names: list[str] = []
    for r in results:
        for s in r.per_level:
            if s.name not in level_names:
                level_names.append(s.name)

    x = np.arange(len(ids))
    width = 0.8 / max(len(level_names), 1)
    fig, ax = plt.subplots(figsize=(max(6.0, 1.2 * len(ids) + 2), 4.5))
    for li, name in enumerate(level_names):
        misses = [
            next((s.misses for s in r.per_level if s.name == name), 0)
            for r in results
        ]
        ax.bar(x + li * width, misses, width, label=f"{name} misses")
    ax.set_xticks(x + width * (len(level_names) - 1) / 2)
    ax.set_xticklabels(ids, rotation=30, ha="right")
    ax.set_ylabel("misses")
    ax.set_title("Cache misses per level")
    ax.legend()
    fig.tight_layout()
    path = out_dir / "misses.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    if any(r.transactions != r.trace_length for r in results):
        fig, ax = plt.subplots(figsize=(max(6.0, 1.2 * len(ids) + 2), 4.5))
        ax.bar(x, [r.transactions for r in results], 0.6, color="tab:orange")
        ax.set_xticks(x)
        ax.set_xticklabels(ids, rotation=30, ha="right")
        ax.set_ylabel("memory transactions")
        ax.set_title("Coalesced memory transactions")
        fig.tight_layout()
        path = out_dir / "transactions.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    return written
